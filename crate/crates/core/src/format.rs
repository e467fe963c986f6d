//! Line-oriented text format for instances.
//!
//! ```text
//! # comment
//! dim 2
//! Q 0 0 1
//! Q 1 1 -1
//! g 0 1
//! m 2
//! A 0 0 1
//! A 0 1 -1
//! b 0 0.5
//! hollow ellipsoid
//! W 0 0 4
//! W 1 1 4
//! c -0.25
//! end
//! ```
//!
//! `Q` and `W` take upper-triangle entries (lower ones are mirrored). Inside a
//! `hollow ellipsoid` block, `b` lines belong to the ellipsoid; the block
//! closes at `end`, at the next `hollow` line, or at the end of the input.
//! Unlisted entries are zero.

use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TrsError};
use crate::instance::{Ellipsoid, HollowSpec, LinearConstraintBlock, TrsInstance};
use crate::linalg::SymSparseMatrix;

struct EllipsoidDraft {
    line: usize,
    w: DMatrix<f64>,
    w_seen: HashSet<(usize, usize)>,
    b: DVector<f64>,
    b_seen: HashSet<usize>,
    c: Option<f64>,
}

enum HollowDraft {
    None,
    NormLb(f64),
    Ellipsoids(Vec<EllipsoidDraft>),
}

struct Cursor<'a> {
    line: usize,
    toks: std::str::SplitWhitespace<'a>,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> TrsError {
        TrsError::Parse {
            line: self.line,
            reason: reason.into(),
        }
    }

    fn index(&mut self, what: &str) -> Result<usize> {
        let tok = self.toks.next().ok_or_else(|| self.err(format!("missing {what}")))?;
        tok.parse::<usize>()
            .map_err(|_| self.err(format!("bad {what} `{tok}`")))
    }

    fn value(&mut self) -> Result<f64> {
        let tok = self.toks.next().ok_or_else(|| self.err("missing value"))?;
        let v = tok
            .parse::<f64>()
            .map_err(|_| self.err(format!("bad number `{tok}`")))?;
        if !v.is_finite() {
            return Err(self.err(format!("non-finite number `{tok}`")));
        }
        Ok(v)
    }

    fn finish(&mut self) -> Result<()> {
        match self.toks.next() {
            Some(t) => Err(self.err(format!("unexpected trailing token `{t}`"))),
            None => Ok(()),
        }
    }
}

fn check_range(line: usize, what: &str, idx: usize, bound: usize) -> Result<()> {
    if idx >= bound {
        return Err(TrsError::DimensionMismatch(format!(
            "line {line}: {what} index {idx} out of range (size {bound})"
        )));
    }
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<TrsInstance> {
    let mut n: Option<usize> = None;
    let mut q_entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut q_seen: HashSet<(usize, usize)> = HashSet::new();
    let mut g: Option<DVector<f64>> = None;
    let mut g_seen: HashSet<usize> = HashSet::new();
    let mut m: Option<usize> = None;
    let mut a: Option<DMatrix<f64>> = None;
    let mut a_seen: HashSet<(usize, usize)> = HashSet::new();
    let mut b: Option<DVector<f64>> = None;
    let mut b_seen: HashSet<usize> = HashSet::new();
    let mut hollow = HollowDraft::None;
    let mut in_block = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        let Some(key) = toks.next() else { continue };
        let mut cur = Cursor { line, toks };

        if key == "dim" {
            if n.is_some() {
                return Err(cur.err("`dim` given twice"));
            }
            let d = cur.index("dimension")?;
            cur.finish()?;
            n = Some(d);
            g = Some(DVector::zeros(d));
            continue;
        }
        let Some(dim) = n else {
            return Err(cur.err(format!("`{key}` before `dim`")));
        };

        match key {
            "Q" => {
                in_block = false;
                let (r, c, v) = (cur.index("row")?, cur.index("column")?, cur.value()?);
                cur.finish()?;
                check_range(line, "Q row", r, dim)?;
                check_range(line, "Q column", c, dim)?;
                if !q_seen.insert((r.min(c), r.max(c))) {
                    return Err(cur.err(format!("duplicate Q entry ({r}, {c})")));
                }
                q_entries.push((r, c, v));
            }
            "g" => {
                in_block = false;
                let (k, v) = (cur.index("index")?, cur.value()?);
                cur.finish()?;
                check_range(line, "g", k, dim)?;
                if !g_seen.insert(k) {
                    return Err(cur.err(format!("duplicate g entry {k}")));
                }
                g.as_mut().expect("set with dim")[k] = v;
            }
            "m" => {
                in_block = false;
                if m.is_some() {
                    return Err(cur.err("`m` given twice"));
                }
                let rows = cur.index("row count")?;
                cur.finish()?;
                m = Some(rows);
                a = Some(DMatrix::zeros(rows, dim));
                b = Some(DVector::zeros(rows));
            }
            "A" => {
                in_block = false;
                let rows = m.ok_or_else(|| cur.err("`A` before `m`"))?;
                let (r, c, v) = (cur.index("row")?, cur.index("column")?, cur.value()?);
                cur.finish()?;
                check_range(line, "A row", r, rows)?;
                check_range(line, "A column", c, dim)?;
                if !a_seen.insert((r, c)) {
                    return Err(cur.err(format!("duplicate A entry ({r}, {c})")));
                }
                a.as_mut().expect("set with m")[(r, c)] = v;
            }
            "b" if in_block => {
                let HollowDraft::Ellipsoids(list) = &mut hollow else {
                    unreachable!("block implies ellipsoid list")
                };
                let e = list.last_mut().expect("block has an ellipsoid");
                let (k, v) = (cur.index("index")?, cur.value()?);
                cur.finish()?;
                check_range(line, "ellipsoid b", k, dim)?;
                if !e.b_seen.insert(k) {
                    return Err(cur.err(format!("duplicate ellipsoid b entry {k}")));
                }
                e.b[k] = v;
            }
            "b" => {
                let rows = m.ok_or_else(|| cur.err("`b` before `m`"))?;
                let (k, v) = (cur.index("index")?, cur.value()?);
                cur.finish()?;
                check_range(line, "b", k, rows)?;
                if !b_seen.insert(k) {
                    return Err(cur.err(format!("duplicate b entry {k}")));
                }
                b.as_mut().expect("set with m")[k] = v;
            }
            "W" | "c" => {
                if !in_block {
                    return Err(cur.err(format!("`{key}` outside a hollow ellipsoid block")));
                }
                let HollowDraft::Ellipsoids(list) = &mut hollow else {
                    unreachable!("block implies ellipsoid list")
                };
                let e = list.last_mut().expect("block has an ellipsoid");
                if key == "W" {
                    let (r, c, v) = (cur.index("row")?, cur.index("column")?, cur.value()?);
                    cur.finish()?;
                    check_range(line, "W row", r, dim)?;
                    check_range(line, "W column", c, dim)?;
                    if !e.w_seen.insert((r.min(c), r.max(c))) {
                        return Err(cur.err(format!("duplicate W entry ({r}, {c})")));
                    }
                    e.w[(r, c)] = v;
                    e.w[(c, r)] = v;
                } else {
                    let v = cur.value()?;
                    cur.finish()?;
                    if e.c.replace(v).is_some() {
                        return Err(cur.err("duplicate `c` in ellipsoid block"));
                    }
                }
            }
            "hollow" => {
                let kind = cur.toks.next().ok_or_else(|| cur.err("missing hollow kind"))?;
                match kind {
                    "norm_lb" => {
                        let l = cur.value()?;
                        cur.finish()?;
                        if !matches!(hollow, HollowDraft::None) {
                            return Err(cur.err("only one hollow specification is allowed"));
                        }
                        hollow = HollowDraft::NormLb(l);
                        in_block = false;
                    }
                    "ellipsoid" => {
                        cur.finish()?;
                        let draft = EllipsoidDraft {
                            line,
                            w: DMatrix::zeros(dim, dim),
                            w_seen: HashSet::new(),
                            b: DVector::zeros(dim),
                            b_seen: HashSet::new(),
                            c: None,
                        };
                        match &mut hollow {
                            HollowDraft::None => hollow = HollowDraft::Ellipsoids(vec![draft]),
                            HollowDraft::Ellipsoids(list) => list.push(draft),
                            HollowDraft::NormLb(_) => {
                                return Err(cur.err("cannot mix norm_lb and ellipsoid hollows"))
                            }
                        }
                        in_block = true;
                    }
                    other => return Err(cur.err(format!("unknown hollow kind `{other}`"))),
                }
            }
            "end" => {
                cur.finish()?;
                if !in_block {
                    return Err(cur.err("`end` outside a hollow ellipsoid block"));
                }
                in_block = false;
            }
            other => return Err(cur.err(format!("unknown keyword `{other}`"))),
        }
    }

    let n = n.ok_or(TrsError::Parse {
        line: text.lines().count().max(1),
        reason: "missing `dim`".into(),
    })?;
    let q = SymSparseMatrix::from_triplets(n, q_entries)?;
    let constraints = match (a, b) {
        (Some(a), Some(b)) => Some(LinearConstraintBlock::new(a, b)?),
        _ => None,
    };
    let hollow = match hollow {
        HollowDraft::None => HollowSpec::None,
        HollowDraft::NormLb(l) => HollowSpec::NormLowerBound(l),
        HollowDraft::Ellipsoids(list) => {
            let mut out = Vec::with_capacity(list.len());
            for d in list {
                let c = d.c.unwrap_or(0.0);
                out.push(Ellipsoid::new(d.w, d.b, c).map_err(|e| match e {
                    TrsError::NotPositiveDefinite { pivot } => TrsError::Parse {
                        line: d.line,
                        reason: format!("ellipsoid W is not positive definite (pivot {pivot})"),
                    },
                    other => other,
                })?);
            }
            HollowSpec::EllipsoidUnion(out)
        }
    };
    TrsInstance::new(q, g.expect("set with dim"), constraints, hollow)
}

/// Writes an instance so that [`parse_instance`] reproduces it exactly.
pub fn serialize_instance(inst: &TrsInstance) -> String {
    let mut s = String::new();
    let n = inst.dim();
    writeln!(s, "dim {n}").unwrap();
    for &(r, c, v) in inst.q.entries() {
        writeln!(s, "Q {r} {c} {v:?}").unwrap();
    }
    for (i, v) in inst.g.iter().enumerate() {
        if *v != 0.0 {
            writeln!(s, "g {i} {v:?}").unwrap();
        }
    }
    if let Some(cons) = &inst.constraints {
        writeln!(s, "m {}", cons.rows()).unwrap();
        for r in 0..cons.rows() {
            for c in 0..n {
                let v = cons.a[(r, c)];
                if v != 0.0 {
                    writeln!(s, "A {r} {c} {v:?}").unwrap();
                }
            }
        }
        for (i, v) in cons.b.iter().enumerate() {
            if *v != 0.0 {
                writeln!(s, "b {i} {v:?}").unwrap();
            }
        }
    }
    match &inst.hollow {
        HollowSpec::None => {}
        HollowSpec::NormLowerBound(l) => writeln!(s, "hollow norm_lb {l:?}").unwrap(),
        HollowSpec::EllipsoidUnion(list) => {
            for e in list {
                writeln!(s, "hollow ellipsoid").unwrap();
                for r in 0..n {
                    for c in r..n {
                        let v = e.w()[(r, c)];
                        if v != 0.0 {
                            writeln!(s, "W {r} {c} {v:?}").unwrap();
                        }
                    }
                }
                for (i, v) in e.b().iter().enumerate() {
                    if *v != 0.0 {
                        writeln!(s, "b {i} {v:?}").unwrap();
                    }
                }
                writeln!(s, "c {:?}", e.c()).unwrap();
                writeln!(s, "end").unwrap();
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let inst = parse_instance("dim 2\nQ 0 0 1\nQ 1 1 -1\n").unwrap();
        assert_eq!(inst.dim(), 2);
        assert_eq!(inst.q.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        assert_eq!(inst.g, DVector::zeros(2));
        assert!(inst.constraints.is_none());
        assert_eq!(inst.hollow, HollowSpec::None);
    }

    #[test]
    fn constrained_document() {
        let text = "\
# two halfspaces
dim 2
Q 0 0 1
Q 1 1 -1
g 0 1
m 2
A 0 0 1
A 0 1 -1
A 1 0 -1
A 1 1 -1
b 0 0.5
b 1 0.5
";
        let inst = parse_instance(text).unwrap();
        let c = inst.constraints.as_ref().unwrap();
        assert_eq!(c.a, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, -1.0]));
        assert_eq!(c.b.as_slice(), &[0.5, 0.5]);
        assert_eq!(inst.g.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn a_with_too_many_columns() {
        let text = "dim 2\nm 1\nA 0 2 1\nb 0 0\n";
        assert!(matches!(parse_instance(text), Err(TrsError::DimensionMismatch(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_instance("dim 2\nQ 0 0 nan\n") {
            Err(TrsError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_instance("dim 2\n\nfoo 1\n") {
            Err(TrsError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_instance("Q 0 0 1\n"), Err(TrsError::Parse { line: 1, .. })));
        assert!(matches!(parse_instance(""), Err(TrsError::Parse { .. })));
        assert!(matches!(
            parse_instance("dim 1\nQ 0 0 1\nQ 0 0 2\n"),
            Err(TrsError::Parse { line: 3, .. })
        ));
        assert!(matches!(parse_instance("dim 1\nA 0 0 1\n"), Err(TrsError::Parse { .. })));
        assert!(matches!(parse_instance("dim 1\nm 1\nb 1 1\n"), Err(TrsError::DimensionMismatch(_))));
    }

    #[test]
    fn hollow_blocks() {
        let text = "\
dim 2
Q 1 1 -1
hollow ellipsoid
W 0 0 4
W 1 1 4
c -0.25
end
hollow ellipsoid
W 0 0 1
W 1 1 1
b 0 -0.5
c 0.2
";
        let inst = parse_instance(text).unwrap();
        let HollowSpec::EllipsoidUnion(list) = &inst.hollow else {
            panic!()
        };
        assert_eq!(list.len(), 2);
        assert_eq!(list[1].b().as_slice(), &[-0.5, 0.0]);
        assert!(inst.constraints.is_none());

        let lb = parse_instance("dim 1\nhollow norm_lb 0.5\n").unwrap();
        assert_eq!(lb.hollow, HollowSpec::NormLowerBound(0.5));
        assert!(parse_instance("dim 1\nhollow ellipsoid\nW 0 0 -1\n").is_err());
        assert!(parse_instance("dim 1\nc 1\n").is_err());
    }

    #[test]
    fn round_trip_fixture_like() {
        let text = "dim 2\nQ 0 0 1\nQ 1 1 -2\ng 0 -1.5\nm 2\nA 0 1 -1\nA 1 1 1\nb 0 -0.5\nb 1 -0.5\nhollow norm_lb 0.1\n";
        let inst = parse_instance(text).unwrap();
        let again = parse_instance(&serialize_instance(&inst)).unwrap();
        assert_eq!(inst, again);
    }
}
