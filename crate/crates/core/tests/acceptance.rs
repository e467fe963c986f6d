//! End-to-end acceptance checks. Runs as a plain binary (no libtest harness)
//! and prints one PASS/FAIL line per criterion.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use chull::ConvexHullWrapper;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use trskit::conditions::{
    check_condition_convexify, check_condition_dimensionality, check_condition_relaxation, check_hollow_containment,
    ConditionStatus,
};
use trskit::eigen::min_eigenvalue;
use trskit::hull::{build_wt, compute_s, verify_spectrum_path, EpigraphPoint, HullModel, HullWitness};
use trskit::linalg::dense_eig;
use trskit::oracle::{grid_minimize, secular_solve};
use trskit::{
    solve, Ellipsoid, HollowSpec, LinearConstraintBlock, SolveSettings, TrsError, TrsInstance, TrsSolution,
};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> std::result::Result<Duration, String> {
    let el = start.elapsed();
    if el < limit {
        Ok(el)
    } else {
        Err(format!("runtime {:.2?} exceeds {:.0?}", el, limit))
    }
}

fn solve_ok(inst: &TrsInstance, settings: &SolveSettings) -> std::result::Result<TrsSolution, String> {
    solve(inst, settings).map_err(|e| format!("solve failed: {e}"))
}

/// Strip instance: relaxation value, non-tightness and the grid optimum.
fn criterion_1() -> Check {
    const VALUE_TOL: f64 = 1e-6;
    const INTERIOR_MARGIN: f64 = 1e-3;
    const GRID_RESOLUTION: f64 = 1e-3;
    const GRID_TOL: f64 = 2e-3;
    let inst = fixture("strip.trs");
    let start = Instant::now();
    let sol = match solve(&inst, &SolveSettings::default()) {
        Err(TrsError::TightnessNotCertified { solution, .. }) => *solution,
        Ok(sol) => return Err(format!("unexpectedly certified: {:?}", sol.certificate)),
        Err(e) => return Err(format!("solve failed: {e}")),
    };
    let el = within(Duration::from_secs(1), start)?;
    ensure!((sol.f_value + 2.75).abs() <= VALUE_TOL, "relaxation value {}", sol.f_value);
    ensure!(sol.norm_y < 1.0 - INTERIOR_MARGIN, "‖y*‖ = {}", sol.norm_y);
    ensure!(!sol.tight, "flagged tight");
    let grid = grid_minimize(&inst, GRID_RESOLUTION).map_err(|e| e.to_string())?;
    let closed = (1.0 - 6.0 * 3.0_f64.sqrt()) / 4.0;
    ensure!((grid.value - closed).abs() <= GRID_TOL, "grid Opt_h {} vs {}", grid.value, closed);
    ensure!(sol.f_value - sol.gap <= grid.value, "lower bound above Opt_h");
    Ok(format!(
        "f* = {:.9}, ‖y*‖ = {:.4}, grid Opt_h = {:.6}, solve {:.2?}",
        sol.f_value, sol.norm_y, grid.value, el
    ))
}

fn status_is(s: &ConditionStatus, satisfied: bool) -> bool {
    match s {
        ConditionStatus::Satisfied { .. } => satisfied,
        ConditionStatus::Violated => !satisfied,
        ConditionStatus::Inconclusive(_) => false,
    }
}

/// Condition statuses on the three small fixtures.
fn criterion_2() -> Check {
    let start = Instant::now();
    let err = |e: TrsError| e.to_string();
    let cone = fixture("descent_cone.trs");
    let r = check_condition_relaxation(&cone).map_err(err)?;
    ensure!(status_is(&r.status, true), "descent cone relaxation: {:?}", r.status);
    let w = r.witness().ok_or("no witness")?;
    ensure!((w - DVector::from_vec(vec![0.0, -1.0])).norm() < 1e-9, "witness {w}");
    let dmn = check_condition_dimensionality(&cone).map_err(err)?;
    ensure!(status_is(&dmn.status, false), "descent cone dimensionality: {:?}", dmn.status);

    let strip = fixture("strip.trs");
    let r = check_condition_relaxation(&strip).map_err(err)?;
    ensure!(status_is(&r.status, false), "strip relaxation: {:?}", r.status);

    let half = fixture("halfplane.trs");
    let r = check_condition_relaxation(&half).map_err(err)?;
    ensure!(status_is(&r.status, true), "halfplane relaxation: {:?}", r.status);
    let c = check_condition_convexify(&half).map_err(err)?;
    ensure!(status_is(&c.status, false), "halfplane convexify: {:?}", c.status);
    let el = within(Duration::from_secs(1), start)?;
    Ok(format!("all five statuses match ({el:.2?})"))
}

/// Classical instances against the secular oracle, including hard cases.
fn criterion_3() -> Check {
    const VALUE_TOL: f64 = 1e-5;
    const NORM_TOL: f64 = 1e-6;
    const GAP_TOL: f64 = 1e-8;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for i in 0..200 {
        let hard = i < 50;
        let n = rng.random_range(5..=50);
        let u = orthogonal(n, &mut rng);
        let eig = spectrum(n, 0.1, &mut rng);
        let q = symmetric(&u, &eig);
        let mut c = gaussian_vec(n, &mut rng);
        if hard {
            c[0] = 0.0;
            let phi: f64 = (1..n).map(|k| (c[k] / (eig[k] - eig[0])).powi(2)).sum();
            c *= rng.random_range(0.2..0.9) / phi.sqrt();
        }
        let g = &u * c;
        let inst = TrsInstance::classical(sparse(&q), g.clone()).unwrap();
        let settings = SolveSettings {
            seed: i,
            ..SolveSettings::default()
        };
        let sol = solve_ok(&inst, &settings)?;
        let exact = secular_solve(&q, &g).map_err(|e| e.to_string())?;
        ensure!(exact.hard_case == hard, "instance {i}: oracle hard_case = {}", exact.hard_case);
        let dv = (sol.h_value - exact.value).abs() / sol.scale;
        let dn = (sol.norm_y - 1.0).abs();
        let dhf = (sol.h_value - sol.f_value).abs() / sol.scale;
        ensure!(dv <= VALUE_TOL, "instance {i} (n={n}, hard={hard}): value error {dv:e}");
        ensure!(dn <= NORM_TOL, "instance {i}: |‖y‖-1| = {dn:e}");
        ensure!(dhf <= GAP_TOL, "instance {i} (n={n}, hard={hard}): |h-f|/scale = {dhf:e}");
        worst = (worst.0.max(dv), worst.1.max(dn), worst.2.max(dhf));
    }
    let el = within(Duration::from_secs(30), start)?;
    Ok(format!(
        "worst value err {:.1e}, norm err {:.1e}, |h-f| {:.1e} ({el:.2?})",
        worst.0, worst.1, worst.2
    ))
}

/// Lanczos estimates on sparse matrices against the dense spectrum.
fn criterion_4() -> Check {
    const EPS: f64 = 1e-8;
    const DELTA: f64 = 0.01;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut accurate = 0;
    let mut max_iters = 0;
    for i in 0..100 {
        let n = rng.random_range(20..=200);
        let q = random_sparse(n, 6, &mut rng);
        let est = min_eigenvalue(&q, EPS, DELTA, i).map_err(|e| format!("instance {i}: {e}"))?;
        let exact = dense_eig(&q.to_dense()).unwrap().min();
        ensure!(est.lambda_hat >= exact, "instance {i}: λ̂ {} below λ_min {}", est.lambda_hat, exact);
        if est.lambda_hat - exact <= EPS {
            accurate += 1;
        }
        let budget = (4.0 * (q.inf_norm() / EPS).sqrt() * (n as f64 / DELTA).ln()).ceil().min(n as f64) as usize;
        ensure!(est.iterations <= budget, "instance {i}: {} iterations > budget {budget}", est.iterations);
        max_iters = max_iters.max(est.iterations);
    }
    ensure!(accurate >= 99, "only {accurate}/100 within ε");
    let el = within(Duration::from_secs(60), start)?;
    Ok(format!("{accurate}/100 within ε, max {max_iters} iterations ({el:.2?})"))
}

/// Crude shifts: the returned value exceeds the optimum by at most the
/// certified gap plus twice the shift accuracy.
fn criterion_5() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..30 {
        let eps = if i % 2 == 0 { 1e-2 } else { 1e-3 };
        let n = rng.random_range(2..=30);
        let u = orthogonal(n, &mut rng);
        let q = symmetric(&u, &spectrum(n, 0.05, &mut rng));
        let g = gaussian_vec(n, &mut rng) * rng.random_range(0.05..1.0);
        let inst = TrsInstance::classical(sparse(&q), g.clone()).unwrap();
        let settings = SolveSettings {
            eigen_epsilon: eps,
            seed: i,
            ..SolveSettings::default()
        };
        let sol = solve_ok(&inst, &settings)?;
        let opt = secular_solve(&q, &g).unwrap().value;
        let excess = sol.h_value - opt;
        ensure!(excess <= sol.gap + 2.0 * eps, "instance {i}: excess {excess:e} > gap {:e} + 2ε", sol.gap);
        let shifted = &q - DMatrix::identity(n, n) * sol.gamma;
        let min_f = secular_solve(&shifted, &g).unwrap().value + sol.gamma;
        ensure!(
            sol.f_value - min_f <= sol.gap + 1e-12 * sol.scale,
            "instance {i}: surrogate error {:e} above certified gap {:e}",
            sol.f_value - min_f,
            sol.gap
        );
        worst = worst.max(excess - sol.gap - 2.0 * eps);
    }
    let el = within(Duration::from_secs(20), start)?;
    Ok(format!("largest (excess - gap - 2ε) = {worst:.2e} ({el:.2?})"))
}

/// Inertia of the aggregated matrices along `t ∈ [0, 1]`.
fn criterion_6() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..50 {
        let n = rng.random_range(1..=10);
        let u = orthogonal(n, &mut rng);
        let eig = spectrum(n, 0.05, &mut rng);
        let q = symmetric(&u, &eig);
        let g = gaussian_vec(n, &mut rng);
        let inst = TrsInstance::classical(sparse(&q), g.clone()).unwrap();
        let report = verify_spectrum_path(&inst, 101).map_err(|e| format!("instance {i}: {e}"))?;
        let s = compute_s(eig[0]).unwrap();
        ensure!((report.s - s).abs() <= 1e-12, "instance {i}: s = {} vs {s}", report.s);
        // Independent assembly of W_s.
        let mut w = DMatrix::zeros(n + 2, n + 2);
        w.view_mut((0, 0), (n, n)).copy_from(&(DMatrix::identity(n, n) * (1.0 - s) + &q * s));
        w.view_mut((0, n), (n, 1)).copy_from(&(&g * s));
        w.view_mut((n, 0), (1, n)).copy_from(&(g.transpose() * s));
        w[(n, n)] = -(1.0 - s);
        w[(n, n + 1)] = -s / 2.0;
        w[(n + 1, n)] = -s / 2.0;
        let built = build_wt(&inst, report.s).unwrap();
        ensure!((&built - &w).amax() <= 1e-12, "instance {i}: W_s assembly differs");
        let e = dense_eig(&w).unwrap();
        let norm = e.norm();
        let neg = e.eigenvalues.iter().filter(|&&v| v < -1e-10 * norm).count();
        let smallest = e.eigenvalues.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        ensure!(neg == 1, "instance {i}: {neg} negatives at s");
        ensure!(smallest <= 1e-8 * norm, "instance {i}: W_s not singular ({smallest:e})");
        for &(t, k) in &report.counts {
            if t <= s {
                ensure!(k == 1, "instance {i}: {k} negatives at t = {t}");
            } else if t > s + 0.01 {
                ensure!(k >= 2, "instance {i}: {k} negatives at t = {t}");
            }
        }
    }
    let el = within(Duration::from_secs(20), start)?;
    Ok(format!("50 instances, 101 grid values each ({el:.2?})"))
}

/// Lower convex envelope of sampled points `(y_i, h_i)`, `y_i ∈ R²`, as the
/// maximum of the lower-face planes of their 3D convex hull.
struct SampledEnvelope {
    planes: Vec<[f64; 3]>,
}

impl SampledEnvelope {
    fn new(samples: &[(DVector<f64>, f64)]) -> Self {
        let pts: Vec<Vec<f64>> = samples.iter().map(|(y, h)| vec![y[0], y[1], *h]).collect();
        let hull = ConvexHullWrapper::try_new(&pts, None).expect("sample hull");
        let (verts, idx) = hull.vertices_indices();
        let mut planes = Vec::new();
        for tri in idx.chunks(3) {
            let (p, q, r) = (&verts[tri[0]], &verts[tri[1]], &verts[tri[2]]);
            let u = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
            let v = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
            let nrm = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
            let len = (nrm[0].powi(2) + nrm[1].powi(2) + nrm[2].powi(2)).sqrt();
            // Outward normals pointing down mark the lower hull.
            if nrm[2] < -1e-9 * len {
                let (b0, b1) = (-nrm[0] / nrm[2], -nrm[1] / nrm[2]);
                planes.push([p[2] - b0 * p[0] - b1 * p[1], b0, b1]);
            }
        }
        Self { planes }
    }

    fn value(&self, y: &DVector<f64>) -> f64 {
        self.planes
            .iter()
            .fold(f64::NEG_INFINITY, |m, p| m.max(p[0] + p[1] * y[0] + p[2] * y[1]))
    }
}

/// Hull membership against a sampled hull, plus witness reconstruction.
fn criterion_7() -> Check {
    const BAND: f64 = 1e-2;
    const RECON_TOL: f64 = 1e-10;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut compared, mut witnesses) = (0, 0);
    for i in 0..20 {
        let u = orthogonal(2, &mut rng);
        let q = symmetric(&u, &spectrum(2, 0.1, &mut rng));
        let g = gaussian_vec(2, &mut rng) * 0.5;
        let inst = TrsInstance::classical(sparse(&q), g).unwrap();
        let model = HullModel::new(&inst).map_err(|e| e.to_string())?;
        let mut samples: Vec<(DVector<f64>, f64)> = circle(2000).into_iter().map(|y| {
            let h = inst.h(&y);
            (y, h)
        }).collect();
        while samples.len() < 10_000 {
            let r = rng.random::<f64>().sqrt();
            let y = unit_vec(2, &mut rng) * r;
            let h = inst.h(&y);
            samples.push((y, h));
        }
        let envelope = SampledEnvelope::new(&samples);
        for j in 0..1000 {
            let yq = unit_vec(2, &mut rng) * (0.98 * rng.random::<f64>().sqrt());
            let fq = model.f(&yq);
            let xq = fq + rng.random_range(-0.5..0.5);
            let p = EpigraphPoint::new(yq.clone(), xq);
            let member = model.in_conv_x(&p).unwrap();
            ensure!(member.exact, "instance {i}: classical hull reported inexact");
            if (xq - fq).abs() > BAND {
                let sampled = envelope.value(&yq) <= xq;
                ensure!(sampled == member.member, "instance {i}, query {j}: sampled {sampled} vs {}", member.member);
                compared += 1;
            }
            if member.member {
                match model.hull_witness(&p).map_err(|e| format!("instance {i}: {e}"))? {
                    HullWitness::InX => ensure!(inst.h(&yq) <= xq + 1e-10 * model.scale, "InX for a point outside X"),
                    HullWitness::Combination { x_delta, x_eps, weights } => {
                        let y = &x_delta.y * weights.0 + &x_eps.y * weights.1;
                        let x = x_delta.x_last * weights.0 + x_eps.x_last * weights.1;
                        ensure!((y - &yq).norm() <= RECON_TOL, "instance {i}: y reconstruction");
                        ensure!((x - xq).abs() <= RECON_TOL, "instance {i}: x reconstruction {:e}", (x - xq).abs());
                        for end in [&x_delta, &x_eps] {
                            ensure!(end.y.norm() <= 1.0 + RECON_TOL, "endpoint outside ball");
                            ensure!(inst.h(&end.y) <= end.x_last + RECON_TOL * model.scale, "endpoint outside X");
                        }
                        witnesses += 1;
                    }
                }
            }
        }
    }
    let el = within(Duration::from_secs(60), start)?;
    Ok(format!("{compared} comparisons, {witnesses} witnesses ({el:.2?})"))
}

/// Norm-interval instances against the annulus grid.
fn criterion_8() -> Check {
    const GRID_TOL: f64 = 2e-3;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    for i in 0..50 {
        let n = 1 + i % 3;
        let l = [0.0, 0.5, 0.9][(i / 3) % 3];
        let u = orthogonal(n, &mut rng);
        let q = symmetric(&u, &spectrum(n, 0.1, &mut rng));
        let g = gaussian_vec(n, &mut rng) * 0.7;
        let inst = TrsInstance::new(sparse(&q), g, None, HollowSpec::NormLowerBound(l)).unwrap();
        let sol = solve_ok(&inst, &SolveSettings::default())?;
        let nrm = sol.y.norm();
        ensure!(nrm >= l - 1e-9 && nrm <= 1.0 + 1e-9, "instance {i}: ‖y‖ = {nrm} outside [{l}, 1]");
        let grid = grid_minimize(&inst, 1e-2).map_err(|e| e.to_string())?;
        let d = (sol.h_value - grid.value).abs();
        ensure!(d <= GRID_TOL, "instance {i} (n={n}, l={l}): solver {} vs grid {}", sol.h_value, grid.value);
        worst = worst.max(d);
    }
    let el = within(Duration::from_secs(60), start)?;
    Ok(format!("worst |solver - grid| = {worst:.1e} ({el:.2?})"))
}

struct HollowCase {
    inst: TrsInstance,
    expect: bool,
}

fn ellipsoid_from_axes(center: &DVector<f64>, rot: &DMatrix<f64>, axes: &[f64]) -> Ellipsoid {
    let inv_sq: Vec<f64> = axes.iter().map(|a| 1.0 / (a * a)).collect();
    let w = symmetric(rot, &inv_sq);
    let b = -(&w * center);
    let c = (&w * center).dot(center) - 1.0;
    Ellipsoid::new(w, b, c).unwrap()
}

/// Grid test of containment: `(max ‖y‖, min slack)` over grid points of the ellipsoids.
fn grid_containment(list: &[Ellipsoid], row: Option<(&DVector<f64>, f64)>, n: usize) -> (f64, f64) {
    let step = if n == 2 { 0.005 } else { 0.02 };
    let k = (3.0 / step) as usize + 1;
    let (mut max_norm, mut min_slack) = (0.0_f64, f64::INFINITY);
    let mut idx = vec![0usize; n];
    loop {
        let y = DVector::from_iterator(n, idx.iter().map(|&i| -1.5 + i as f64 * step));
        if list.iter().any(|e| e.value(&y) <= 0.0) {
            max_norm = max_norm.max(y.norm());
            if let Some((a, b)) = row {
                min_slack = min_slack.min(a.dot(&y) - b);
            }
        }
        let mut d = 0;
        loop {
            if d == n {
                return (max_norm, min_slack);
            }
            idx[d] += 1;
            if idx[d] < k {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn hollow_case(rng: &mut ChaCha8Rng) -> HollowCase {
    loop {
        let n = rng.random_range(2..=3);
        let d = unit_vec(n, rng);
        let q = symmetric(&orthogonal_with(&d, rng), &spectrum(n, 0.2, rng));
        let g = gaussian_vec(n, rng) * 0.6;
        let count = rng.random_range(1..=2);
        let list: Vec<Ellipsoid> = (0..count)
            .map(|_| {
                let center = unit_vec(n, rng) * (0.7 * rng.random::<f64>());
                let axes: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.5)).collect();
                ellipsoid_from_axes(&center, &orthogonal(n, rng), &axes)
            })
            .collect();
        let row = rng.random_bool(0.5).then(|| {
            let a = unit_vec(n, rng);
            let a = &a - &d * a.dot(&d);
            (a.normalize(), rng.random_range(-0.9..0.2))
        });
        let (max_norm, min_slack) = grid_containment(&list, row.as_ref().map(|(a, b)| (a, *b)), n);
        let step = if n == 2 { 0.005 } else { 0.02 };
        // Skip configurations the grid cannot classify reliably.
        if (1.0 - 3.0 * step..1.0 + 0.01).contains(&max_norm) || (-0.01..3.0 * step).contains(&min_slack) {
            continue;
        }
        let expect = max_norm < 1.0 && min_slack >= 0.0;
        let constraints = row.map(|(a, b)| {
            LinearConstraintBlock::new(DMatrix::from_row_slice(1, n, a.as_slice()), DVector::from_vec(vec![b])).unwrap()
        });
        let inst = TrsInstance::new(sparse(&q), g, constraints, HollowSpec::EllipsoidUnion(list)).unwrap();
        return HollowCase { inst, expect };
    }
}

/// Ellipsoid containment verdicts and hollow solves.
fn criterion_9() -> Check {
    const GRID_TOL: f64 = 2e-3;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let settings = SolveSettings::default();
    let (mut satisfied, mut worst) = (0, 0.0_f64);
    for i in 0..30 {
        let case = hollow_case(&mut rng);
        let report = check_hollow_containment(&case.inst, &settings).map_err(|e| format!("case {i}: {e}"))?;
        ensure!(
            report.is_satisfied() == case.expect,
            "case {i}: verdict {:?} but grid says {} ({:?})",
            report.status,
            case.expect,
            report.details
        );
        if !case.expect {
            continue;
        }
        satisfied += 1;
        let sol = solve_ok(&case.inst, &settings)?;
        ensure!(case.inst.feasible(&sol.y, 1e-9), "case {i}: returned point infeasible");
        let grid = grid_minimize(&case.inst, 1e-2).map_err(|e| e.to_string())?;
        let d = (sol.h_value - grid.value).abs();
        ensure!(d <= GRID_TOL, "case {i}: solver {} vs grid {}", sol.h_value, grid.value);
        worst = worst.max(d);
    }
    let el = within(Duration::from_secs(60), start)?;
    Ok(format!("{satisfied}/30 contained, worst |solver - grid| = {worst:.1e} ({el:.2?})"))
}

/// Constraints orthogonal to a minimum eigenvector: tight by construction.
fn criterion_10() -> Check {
    const NORM_TOL: f64 = 1e-6;
    const GRID_TOL: f64 = 2e-3;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0_f64;
    for i in 0..30 {
        let n = rng.random_range(2..=3);
        let d = unit_vec(n, &mut rng);
        let q = symmetric(&orthogonal_with(&d, &mut rng), &spectrum(n, 0.3, &mut rng));
        let m = rng.random_range(1..n);
        let y0 = unit_vec(n, &mut rng) * (0.5 * rng.random::<f64>());
        let mut a = DMatrix::zeros(m, n);
        let mut b = DVector::zeros(m);
        for r in 0..m {
            let v = unit_vec(n, &mut rng);
            let v = (&v - &d * v.dot(&d)).normalize();
            a.set_row(r, &v.transpose());
            b[r] = v.dot(&y0) - rng.random_range(0.0..0.3);
        }
        let g = gaussian_vec(n, &mut rng) * 0.8;
        let inst = TrsInstance::new(
            sparse(&q),
            g,
            Some(LinearConstraintBlock::new(a, b).unwrap()),
            HollowSpec::None,
        )
        .unwrap();
        let conv = check_condition_convexify(&inst).map_err(|e| e.to_string())?;
        ensure!(conv.is_satisfied(), "instance {i}: convexify condition {:?}", conv.status);
        let sol = solve_ok(&inst, &SolveSettings::default())?;
        ensure!(sol.tight, "instance {i}: not certified tight ({:?})", sol.certificate);
        ensure!((sol.norm_y - 1.0).abs() <= NORM_TOL, "instance {i}: ‖y‖ = {}", sol.norm_y);
        let grid = grid_minimize(&inst, 1e-2).map_err(|e| e.to_string())?;
        let dv = (sol.h_value - grid.value).abs();
        ensure!(dv <= GRID_TOL, "instance {i}: solver {} vs grid {}", sol.h_value, grid.value);
        worst = worst.max(dv);
    }
    let el = within(Duration::from_secs(30), start)?;
    Ok(format!("30 tight, worst |solver - grid| = {worst:.1e} ({el:.2?})"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("strip relaxation value and non-tightness", criterion_1),
        ("condition statuses on fixtures", criterion_2),
        ("classical sweep vs secular oracle", criterion_3),
        ("Lanczos accuracy on sparse matrices", criterion_4),
        ("crude-shift error bound", criterion_5),
        ("W_t inertia along t", criterion_6),
        ("hull membership vs sampled hull", criterion_7),
        ("norm-interval instances vs grid", criterion_8),
        ("hollow ellipsoid containment", criterion_9),
        ("conic tight instances", criterion_10),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != k + 1) {
            continue;
        }
        match run() {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {why}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
