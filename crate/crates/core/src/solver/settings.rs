use crate::error::{Result, TrsError};
use crate::linalg::DEFAULT_DENSE_CAP;

/// Tolerances and limits for [`crate::solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    /// Accuracy requested from the eigenvalue estimate; also the shift margin.
    pub eigen_epsilon: f64,
    pub eigen_delta: f64,
    /// Target on the certified surrogate gap, relative to the instance scale.
    pub apg_gap: f64,
    pub certify_tol: f64,
    /// `None` means `10 ceil(sqrt(L / gap))`.
    pub max_apg_iters: Option<usize>,
    pub dykstra_iters: usize,
    pub seed: u64,
    /// Largest dimension for which dense condition checks are attempted.
    pub dense_cap: usize,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            eigen_epsilon: 1e-8,
            eigen_delta: 1e-2,
            apg_gap: 1e-8,
            certify_tol: 1e-6,
            max_apg_iters: None,
            dykstra_iters: 500,
            seed: 0,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eigen_epsilon", self.eigen_epsilon),
            ("apg_gap", self.apg_gap),
            ("certify_tol", self.certify_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TrsError::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.eigen_delta > 0.0 && self.eigen_delta < 1.0) {
            return Err(TrsError::InvalidInput(format!(
                "eigen_delta must lie in (0, 1), got {}",
                self.eigen_delta
            )));
        }
        if self.dykstra_iters == 0 || self.max_apg_iters == Some(0) {
            return Err(TrsError::InvalidInput("iteration limits must be positive".into()));
        }
        Ok(())
    }

    /// Iteration cap for a given smoothness constant and absolute gap target.
    pub fn apg_cap(&self, smoothness: f64, gap_abs: f64) -> usize {
        self.max_apg_iters.unwrap_or_else(|| {
            let k = 10.0 * (smoothness / gap_abs).sqrt().ceil();
            if k.is_finite() {
                (k as usize).max(100)
            } else {
                100
            }
        })
    }
}
