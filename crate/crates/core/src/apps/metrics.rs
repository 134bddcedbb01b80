use serde::Serialize;

use crate::linalg::{inner, CVector, C64};
use crate::model::SolveReport;

/// Floor for exact recoveries.
pub const MSE_FLOOR_DB: f64 = -300.0;

/// `10·log₁₀ min_θ ‖e^{jθ}x − s‖²`, floored at [`MSE_FLOOR_DB`].
pub fn metric_mse(x: &CVector, s: &CVector) -> f64 {
    assert_eq!(x.len(), s.len(), "metric_mse: length mismatch");
    let p = inner(x, s);
    let phase = if p.norm() > 0.0 { p / p.norm() } else { C64::new(1.0, 0.0) };
    let err = (x * phase - s).norm_squared();
    if err > 0.0 {
        (10.0 * err.log10()).max(MSE_FLOOR_DB)
    } else {
        MSE_FLOOR_DB
    }
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub phase1_iters: usize,
    pub phase2_iters: usize,
    pub restarts: usize,
    pub feasible: bool,
    pub objective: f64,
    pub max_violation: f64,
    pub violations: usize,
    pub kkt_stationarity: f64,
    pub mse_db: Option<f64>,
    pub wall_time: f64,
}

impl TrialRecord {
    pub fn from_report(seed: u64, r: &SolveReport) -> Self {
        TrialRecord {
            seed,
            phase1_iters: r.iterations_phase1,
            phase2_iters: r.iterations_phase2,
            restarts: r.restarts,
            feasible: r.feasible,
            objective: r.objective,
            max_violation: r.max_violation,
            violations: r.violations,
            kkt_stationarity: r.kkt_stationarity,
            mse_db: r.mse_db,
            wall_time: r.wall_time,
        }
    }
}
