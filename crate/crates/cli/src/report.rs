use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use trskit::conditions::{ConditionReport, ConditionStatus};
use trskit::eigen::EigenEstimate;
use trskit::{StageTimings, TrsError, TrsSolution};

pub const SCHEMA: u32 = 1;

pub mod exit {
    pub const OK: i32 = 0;
    pub const RUNTIME: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const NOT_CERTIFIED: i32 = 4;
    pub const HOLLOW: i32 = 5;
    pub const CONDITIONS: i32 = 6;
    pub const MISMATCH: i32 = 7;
}

pub fn exit_code(err: &TrsError) -> i32 {
    match err {
        TrsError::Parse { .. } | TrsError::DimensionMismatch(_) | TrsError::InvalidInput(_) => exit::INPUT,
        TrsError::InfeasibleRegion => exit::INFEASIBLE,
        TrsError::TightnessNotCertified { .. } => exit::NOT_CERTIFIED,
        TrsError::HollowConditionViolated(_) => exit::HOLLOW,
        _ => exit::RUNTIME,
    }
}

pub fn status_name(err: &TrsError) -> &'static str {
    match err {
        TrsError::Parse { .. } => "parse_error",
        TrsError::DimensionMismatch(_) | TrsError::InvalidInput(_) => "invalid_input",
        TrsError::InfeasibleRegion => "infeasible",
        TrsError::TightnessNotCertified { .. } => "not_certified",
        TrsError::HollowConditionViolated(_) => "hollow_violated",
        _ => "runtime_error",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub instance: String,
    pub digest: String,
    pub dim: Option<usize>,
    pub status: String,
    pub exit_code: i32,
    pub message: Option<String>,
    pub solution: Option<SolutionReport>,
    pub conditions: Vec<ConditionEntry>,
    pub eigen: Option<EigenReport>,
    pub certify: Option<CertifyReport>,
    pub timings: Option<TimingsReport>,
}

impl RunReport {
    pub fn new(command: &str, instance: &str, digest: String) -> Self {
        Self {
            schema: SCHEMA,
            command: command.to_string(),
            instance: instance.to_string(),
            digest,
            dim: None,
            status: "ok".into(),
            exit_code: exit::OK,
            message: None,
            solution: None,
            conditions: Vec::new(),
            eigen: None,
            certify: None,
            timings: None,
        }
    }

    pub fn fail(&mut self, err: &TrsError) {
        self.status = status_name(err).into();
        self.exit_code = exit_code(err);
        self.message = Some(err.to_string());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub y: Vec<f64>,
    pub h_value: f64,
    pub f_value: f64,
    /// `f_value - gap`: certified lower bound on the relaxation optimum.
    pub lower_bound: f64,
    pub norm_y: f64,
    pub tight: bool,
    pub certificate: String,
    pub iterations: usize,
    pub gap: f64,
    pub gamma: f64,
    pub diagnostics: Vec<String>,
}

impl From<&TrsSolution> for SolutionReport {
    fn from(s: &TrsSolution) -> Self {
        Self {
            y: s.y.iter().copied().collect(),
            h_value: s.h_value,
            f_value: s.f_value,
            lower_bound: s.f_value - s.gap,
            norm_y: s.norm_y,
            tight: s.tight,
            certificate: s.certificate.as_str().into(),
            iterations: s.iterations,
            gap: s.gap,
            gamma: s.gamma,
            diagnostics: s.diagnostics.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub name: String,
    pub status: String,
    pub tolerance: f64,
    pub witness: Option<Vec<f64>>,
    pub details: Vec<String>,
}

impl From<&ConditionReport> for ConditionEntry {
    fn from(r: &ConditionReport) -> Self {
        let mut details = r.details.clone();
        if let ConditionStatus::Inconclusive(why) = &r.status {
            details.insert(0, why.clone());
        }
        Self {
            name: r.id.name().into(),
            status: r.status.name().into(),
            tolerance: r.tolerance,
            witness: r.witness().map(|w| w.iter().copied().collect()),
            details,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub lambda_hat: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub iterations: usize,
    pub budget: usize,
    pub residual: f64,
    pub seed: u64,
    pub dense_lambda_min: Option<f64>,
    pub dense_error: Option<f64>,
}

impl EigenReport {
    pub fn new(e: &EigenEstimate, dense: Option<f64>) -> Self {
        Self {
            lambda_hat: e.lambda_hat,
            epsilon: e.epsilon,
            delta: e.delta,
            iterations: e.iterations,
            budget: e.budget,
            residual: e.residual,
            seed: e.seed,
            dense_lambda_min: dense,
            dense_error: dense.map(|d| e.lambda_hat - d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub s: f64,
    pub lambda_q: f64,
    pub singularity: f64,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub oracle: Option<String>,
    pub oracle_value: Option<f64>,
    pub oracle_error: Option<f64>,
    pub spectrum: Option<SpectrumEntry>,
    pub hull_member: Option<bool>,
    pub hull_exact: Option<bool>,
    pub agree: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingsReport {
    pub eigen_ms: f64,
    pub reformulate_ms: f64,
    pub apg_ms: f64,
    pub certify_ms: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl From<&StageTimings> for TimingsReport {
    fn from(t: &StageTimings) -> Self {
        Self {
            eigen_ms: ms(t.eigen),
            reformulate_ms: ms(t.reformulate),
            apg_ms: ms(t.apg),
            certify_ms: ms(t.certify),
        }
    }
}

fn vec_text(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn render_text(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command     {}", r.command);
    if r.digest.is_empty() {
        let _ = writeln!(out, "instance    {}", r.instance);
    } else {
        let _ = writeln!(out, "instance    {} (sha256 {})", r.instance, r.digest);
    }
    if let Some(n) = r.dim {
        let _ = writeln!(out, "dimension   {n}");
    }
    let _ = writeln!(out, "status      {} (exit {})", r.status, r.exit_code);
    if let Some(m) = &r.message {
        let _ = writeln!(out, "message     {m}");
    }
    if let Some(s) = &r.solution {
        let _ = writeln!(out, "y           {}", vec_text(&s.y));
        let _ = writeln!(out, "h(y)        {:.12}", s.h_value);
        let _ = writeln!(out, "relaxation  {:.12} (lower bound {:.12})", s.f_value, s.lower_bound);
        let _ = writeln!(out, "‖y‖         {:.12}", s.norm_y);
        let _ = writeln!(out, "tight       {} ({})", s.tight, s.certificate);
        let _ = writeln!(out, "iterations  {} (gap {:.3e}, γ = {:.12})", s.iterations, s.gap, s.gamma);
        for d in &s.diagnostics {
            let _ = writeln!(out, "note        {d}");
        }
    }
    for c in &r.conditions {
        let _ = writeln!(out, "condition   {:<20} {}", c.name, c.status);
        if let Some(w) = &c.witness {
            let _ = writeln!(out, "  witness   {}", vec_text(w));
        }
        for d in &c.details {
            let _ = writeln!(out, "  detail    {d}");
        }
    }
    if let Some(e) = &r.eigen {
        let _ = writeln!(out, "lambda_hat  {:.15}", e.lambda_hat);
        let _ = writeln!(out, "residual    {:.3e}", e.residual);
        let _ = writeln!(out, "lanczos     {} steps (budget {})", e.iterations, e.budget);
        if let (Some(d), Some(err)) = (e.dense_lambda_min, e.dense_error) {
            let _ = writeln!(out, "dense       {d:.15} (λ̂ - λ_min = {err:.3e})");
        }
    }
    if let Some(c) = &r.certify {
        if let (Some(o), Some(v)) = (&c.oracle, c.oracle_value) {
            let err = c.oracle_error.map_or(String::new(), |e| format!(", error {e:.3e}"));
            let _ = writeln!(out, "oracle      {o}: {v:.12}{err}");
        }
        if let Some(s) = &c.spectrum {
            let _ = writeln!(out, "spectrum    s = {:.12}, singularity {:.3e}", s.s, s.singularity);
        }
        if let Some(m) = c.hull_member {
            let exact = if c.hull_exact == Some(true) { "exact" } else { "outer approximation" };
            let _ = writeln!(out, "hull        member = {m} ({exact})");
        }
        let _ = writeln!(out, "agree       {}", c.agree);
        for n in &c.notes {
            let _ = writeln!(out, "note        {n}");
        }
    }
    if let Some(t) = &r.timings {
        let _ = writeln!(
            out,
            "timings     eigen {:.3} ms, reformulate {:.3} ms, apg {:.3} ms, certify {:.3} ms",
            t.eigen_ms, t.reformulate_ms, t.apg_ms, t.certify_ms
        );
    }
    out
}
