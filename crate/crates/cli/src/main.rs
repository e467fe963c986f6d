mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use trskit::conditions::{
    check_condition_convexify, check_condition_dimensionality, check_condition_relaxation, check_hollow_containment,
    ConditionReport,
};
use trskit::eigen::min_eigenvalue;
use trskit::hull::{verify_spectrum_path, EpigraphPoint, HullModel};
use trskit::linalg::dense_eig_capped;
use trskit::oracle::{grid_minimize, secular_solve};
use trskit::{parse_instance, solve, HollowSpec, SolveSettings, TrsError, TrsInstance, TrsSolution};

use report::{exit, render_text, CertifyReport, ConditionEntry, EigenReport, RunReport, SolutionReport, SpectrumEntry};

const ORACLE_TOL: f64 = 1e-6;
const BOUND_TOL: f64 = 1e-9;
const GRID_RESOLUTION: f64 = 1e-2;
const GRID_MAX_DIM: usize = 3;
const SPECTRUM_POINTS: usize = 101;

#[derive(Parser, Debug)]
#[command(name = "trskit", version, about = "Trust-region subproblem solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Eigenvalue accuracy and shift margin.
    #[arg(long, global = true, default_value_t = 1e-8)]
    eps: f64,

    /// Failure probability allowed for the Lanczos estimate.
    #[arg(long, global = true, default_value_t = 1e-2)]
    delta: f64,

    /// Target surrogate gap, relative to the instance scale.
    #[arg(long, global = true, default_value_t = 1e-8)]
    gap: f64,

    #[arg(long, global = true, env = "TRSKIT_SEED", default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Largest dimension for dense checks and cross-checks.
    #[arg(long, global = true, default_value_t = trskit::linalg::DEFAULT_DENSE_CAP)]
    dense_cap: usize,

    /// Include wall-clock stage timings (output is then not reproducible).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance and report the point, value and certificate.
    Solve { path: PathBuf },
    /// Evaluate the structural conditions that make the relaxation exact.
    Check { path: PathBuf },
    /// Solve, then cross-check against independent oracles.
    Certify { path: PathBuf },
    /// Estimate the smallest eigenvalue of Q.
    Eig { path: PathBuf },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

impl Cli {
    fn settings(&self) -> SolveSettings {
        SolveSettings {
            eigen_epsilon: self.eps,
            eigen_delta: self.delta,
            apg_gap: self.gap,
            seed: self.seed,
            dense_cap: self.dense_cap,
            ..SolveSettings::default()
        }
    }
}

fn load(name: &str, path: &PathBuf) -> Result<(RunReport, TrsInstance), RunReport> {
    let shown = path.display().to_string();
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            let mut r = RunReport::new(name, &shown, String::new());
            r.status = "io_error".into();
            r.exit_code = exit::INPUT;
            r.message = Some(e.to_string());
            return Err(r);
        }
    };
    let mut r = RunReport::new(name, &shown, hex::encode(Sha256::digest(&bytes)));
    let parsed = String::from_utf8(bytes)
        .map_err(|e| TrsError::Parse {
            line: 0,
            reason: e.to_string(),
        })
        .and_then(|s| parse_instance(&s));
    match parsed {
        Ok(inst) => {
            r.dim = Some(inst.dim());
            Ok((r, inst))
        }
        Err(e) => {
            r.fail(&e);
            Err(r)
        }
    }
}

/// Runs the solver, keeping the partial solution of an uncertified run.
fn run_solve(r: &mut RunReport, inst: &TrsInstance, cli: &Cli) -> Option<TrsSolution> {
    let sol = match solve(inst, &cli.settings()) {
        Ok(s) => s,
        Err(TrsError::TightnessNotCertified { solution, diagnostics }) => {
            let err = TrsError::TightnessNotCertified {
                solution: solution.clone(),
                diagnostics,
            };
            r.fail(&err);
            *solution
        }
        Err(e) => {
            r.fail(&e);
            return None;
        }
    };
    r.solution = Some(SolutionReport::from(&sol));
    if cli.timings {
        r.timings = Some((&sol.timings).into());
    }
    Some(sol)
}

fn cmd_solve(r: &mut RunReport, inst: &TrsInstance, cli: &Cli) {
    run_solve(r, inst, cli);
}

fn cmd_check(r: &mut RunReport, inst: &TrsInstance, cli: &Cli) {
    let settings = cli.settings();
    let mut checks: Vec<Box<dyn Fn() -> trskit::Result<ConditionReport> + '_>> = vec![
        Box::new(|| check_condition_relaxation(inst)),
        Box::new(|| check_condition_dimensionality(inst)),
        Box::new(|| check_condition_convexify(inst)),
    ];
    if inst.hollow != HollowSpec::None {
        checks.push(Box::new(|| check_hollow_containment(inst, &settings)));
    }
    for check in checks {
        match check() {
            Ok(report) => r.conditions.push(ConditionEntry::from(&report)),
            Err(e) => {
                r.fail(&e);
                return;
            }
        }
    }
    if r.conditions.iter().any(|c| c.status != "satisfied") {
        r.status = "conditions_not_satisfied".into();
        r.exit_code = exit::CONDITIONS;
    }
}

fn cmd_certify(r: &mut RunReport, inst: &TrsInstance, cli: &Cli) {
    let Some(sol) = run_solve(r, inst, cli) else {
        return;
    };
    let started = Instant::now();
    let n = inst.dim();
    let mut c = CertifyReport {
        oracle: None,
        oracle_value: None,
        oracle_error: None,
        spectrum: None,
        hull_member: None,
        hull_exact: None,
        agree: true,
        notes: Vec::new(),
    };
    let lower = sol.f_value - sol.gap;
    let classical = !inst.has_constraints() && inst.hollow == HollowSpec::None;

    let oracle = if classical && n <= cli.dense_cap {
        secular_solve(&inst.q.to_dense(), &inst.g).map(|s| ("secular", s.value))
    } else if n <= GRID_MAX_DIM {
        grid_minimize(inst, GRID_RESOLUTION).map(|g| ("grid", g.value))
    } else {
        Err(TrsError::InvalidInput(format!("no oracle for constrained or hollow instances with n = {n}")))
    };
    match oracle {
        Ok((name, value)) => {
            c.oracle = Some(name.into());
            c.oracle_value = Some(value);
            if lower > value + BOUND_TOL * sol.scale {
                c.agree = false;
                c.notes.push(format!("lower bound {lower} exceeds oracle value {value}"));
            }
            if sol.tight {
                let err = sol.h_value - value;
                c.oracle_error = Some(err);
                if err.abs() > ORACLE_TOL * sol.scale {
                    c.agree = false;
                    c.notes.push(format!("h(y) differs from the oracle by {err:.3e}"));
                }
            }
        }
        Err(e) => c.notes.push(format!("oracle skipped: {e}")),
    }

    if sol.eigen_estimate.lambda_hat >= 0.0 {
        c.notes.push("Q is positive semidefinite; spectrum and hull checks skipped".into());
    } else if n > cli.dense_cap {
        c.notes.push(format!("n = {n} exceeds the dense cap; spectrum and hull checks skipped"));
    } else {
        match verify_spectrum_path(inst, SPECTRUM_POINTS) {
            Ok(s) => {
                c.spectrum = Some(SpectrumEntry {
                    s: s.s,
                    lambda_q: s.lambda_q,
                    singularity: s.singularity_at_s,
                    grid_points: SPECTRUM_POINTS,
                })
            }
            Err(e) => {
                c.agree = false;
                c.notes.push(format!("spectrum path: {e}"));
            }
        }
        let membership = HullModel::new(inst).and_then(|m| {
            if let Some(why) = &m.caveat {
                c.notes.push(why.clone());
            }
            m.in_conv_x(&EpigraphPoint::new(sol.y.clone(), sol.h_value))
        });
        match membership {
            Ok(m) => {
                c.hull_member = Some(m.member);
                c.hull_exact = Some(m.exact);
                if !m.member {
                    c.agree = false;
                    c.notes.push("(y, h(y)) rejected by the hull description".into());
                }
            }
            Err(e) => c.notes.push(format!("hull check skipped: {e}")),
        }
    }

    if let Some(t) = r.timings.as_mut() {
        t.certify_ms += started.elapsed().as_secs_f64() * 1e3;
    }
    if !c.agree {
        r.status = "certify_mismatch".into();
        r.exit_code = exit::MISMATCH;
    }
    r.certify = Some(c);
}

fn cmd_eig(r: &mut RunReport, inst: &TrsInstance, cli: &Cli) {
    let started = Instant::now();
    let est = match min_eigenvalue(&inst.q, cli.eps, cli.delta, cli.seed) {
        Ok(e) => e,
        Err(e) => {
            r.fail(&e);
            return;
        }
    };
    let elapsed = started.elapsed();
    let dense = if inst.dim() <= cli.dense_cap {
        match dense_eig_capped(&inst.q.to_dense(), cli.dense_cap) {
            Ok(d) => Some(d.min()),
            Err(e) => {
                r.fail(&e);
                return;
            }
        }
    } else {
        None
    };
    r.eigen = Some(EigenReport::new(&est, dense));
    if cli.timings {
        r.timings = Some(report::TimingsReport {
            eigen_ms: elapsed.as_secs_f64() * 1e3,
            reformulate_ms: 0.0,
            apg_ms: 0.0,
            certify_ms: 0.0,
        });
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, path): (&str, &PathBuf) = match &cli.command {
        Command::Solve { path } => ("solve", path),
        Command::Check { path } => ("check", path),
        Command::Certify { path } => ("certify", path),
        Command::Eig { path } => ("eig", path),
    };
    let report = match load(name, path) {
        Err(r) => r,
        Ok((mut r, inst)) => {
            match &cli.command {
                Command::Solve { .. } => cmd_solve(&mut r, &inst, &cli),
                Command::Check { .. } => cmd_check(&mut r, &inst, &cli),
                Command::Certify { .. } => cmd_certify(&mut r, &inst, &cli),
                Command::Eig { .. } => cmd_eig(&mut r, &inst, &cli),
            }
            r
        }
    };
    match cli.format {
        Format::Text => print!("{}", render_text(&report)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("report serializes")),
    }
    ExitCode::from(report.exit_code as u8)
}
