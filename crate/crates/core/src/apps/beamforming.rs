//! Multicast beamforming with the rank-1 engine.
//!
//! Single group: `minimize ‖w‖²  s.t. |hᵢᴴw|² ≥ τ`.
//! With primary users: additionally `|g_kᴴw|² ≤ η`.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admm::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg::{normal_vector, CMatrix, CVector};
use crate::model::{kkt_residual, ConstraintSense, Field, HermitianMatrix, QcqpProblem, SolveReport};
use crate::rank1::{self, canonical_multipliers, CompressedState, PriorSpec, Rank1System, StepInfo, XUpdate};

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingInstance {
    /// Columns are the user channels `hᵢ`.
    pub h_s: CMatrix,
    /// Columns are the protected primary-user channels `g_k`.
    pub g_s: Option<CMatrix>,
    pub tau: f64,
    pub eta: f64,
}

impl BeamformingInstance {
    pub fn n(&self) -> usize {
        self.h_s.nrows()
    }

    pub fn l(&self) -> usize {
        self.g_s.as_ref().map_or(0, |g| g.ncols())
    }

    /// All constraints: `|hᵢᴴw|² ≥ τ` then `|g_kᴴw|² ≤ η`.
    pub fn system(&self) -> Result<Rank1System> {
        let m = self.h_s.ncols();
        let l = self.l();
        let mut a = CMatrix::zeros(self.n(), m + l);
        a.columns_mut(0, m).copy_from(&self.h_s);
        let mut c = vec![self.tau; m];
        let mut senses = vec![ConstraintSense::GreaterEqual; m];
        if let Some(g) = &self.g_s {
            a.columns_mut(m, l).copy_from(g);
            c.extend(std::iter::repeat(self.eta).take(l));
            senses.extend(std::iter::repeat(ConstraintSense::LessEqual).take(l));
        }
        Rank1System::new(a, c, senses)
    }
}

/// Final `w` against the raw constraints, KKT with the last multipliers.
fn report(
    sys: &Rank1System,
    w: CVector,
    phase1: usize,
    phase2: usize,
    restarts: usize,
    feasible: bool,
    last: Option<StepInfo>,
    multipliers: Vec<f64>,
    start: Instant,
) -> Result<SolveReport> {
    let n = sys.n();
    let kkt = if multipliers.len() == sys.m() {
        let p = QcqpProblem::new(HermitianMatrix::identity(n), CVector::zeros(n), sys.constraints()?, Field::Complex)?;
        kkt_residual(&p, &w, &multipliers)?.stationarity
    } else {
        f64::NAN
    };
    Ok(SolveReport {
        iterations_phase1: phase1,
        iterations_phase2: phase2,
        restarts,
        feasible,
        consensus_residual: last.map_or(0.0, |s| s.consensus),
        successive_diff: last.map_or(0.0, |s| s.successive),
        kkt_stationarity: kkt,
        max_violation: sys.max_violation(&w),
        violations: sys.violation_count(&w),
        objective: w.norm_squared(),
        multipliers,
        mse_db: None,
        wall_time: start.elapsed().as_secs_f64(),
        x: w,
    })
}

/// Minimizes `‖w‖²` from the feasible `w0`, keeping the best feasible
/// iterate. Returns `(w, iterations, last step, multipliers)`.
fn minimize_power(
    sys: &Rank1System,
    w0: CVector,
    rho: f64,
    cfg: &SolverConfig,
) -> Result<(CVector, usize, Option<StepInfo>, Vec<f64>)> {
    let update = XUpdate::min_norm(sys.n(), sys.m(), rho)?;
    let mut st = CompressedState::at_point(w0.clone(), sys.m());
    let mut best = (w0.norm_squared(), w0);
    let mut iters = 0;
    let mut last = None;
    while iters < cfg.max_iter_phase2 {
        let info = rank1::step(sys, &mut st, &update, PriorSpec::None);
        iters += 1;
        last = Some(info);
        if info.violations == 0 && st.x.norm_squared() < best.0 {
            best = (st.x.norm_squared(), st.x.clone());
        }
        if info.successive < cfg.tol_successive && info.consensus <= cfg.tol_consensus {
            break;
        }
    }
    let mu = canonical_multipliers(sys, &st, rho);
    let w = if sys.violation_count(&st.x) == 0 && st.x.norm_squared() <= best.0 { st.x } else { best.1 };
    Ok((w, iters, last, mu))
}

/// `w / min |h̃ᵢᴴw|` with `h̃ᵢ = hᵢ/√τ`: the smallest scaling meeting every
/// SNR constraint.
fn scale_to_feasible(h_s: &CMatrix, tau: f64, w: &CVector) -> CVector {
    let min = h_s.ad_mul(w).iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min) / tau.sqrt();
    w.unscale(min)
}

/// Single-group multicast: scale a random complex Gaussian `w` until all
/// constraints hold, then run the compressed `≥` iteration with objective
/// `‖w‖²` and `ρ = 2√m`. The result never has more power than the start.
pub fn mb_single_group(inst: &BeamformingInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    let start = Instant::now();
    if !(inst.tau > 0.0) {
        return Err(Error::InvalidInput(format!("SNR target must be positive, got {}", inst.tau)));
    }
    let single = BeamformingInstance { g_s: None, ..inst.clone() };
    let sys = single.system()?;
    let m = sys.m();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w0 = scale_to_feasible(&inst.h_s, inst.tau, &normal_vector(&mut rng, inst.n(), Field::Complex));
    let rho = 2.0 * (m as f64).sqrt();
    let (w, iters, last, mu) = minimize_power(&sys, w0, rho, cfg)?;
    report(&sys, w, 0, iters, 0, true, last, mu, start)
}

/// Multicast with protected primary users: a `ρ`-free feasibility phase
/// with restarts, then power minimization with `ρ = 2√(m + l)`. Reduces to
/// [`mb_single_group`] when there are no primary users.
pub fn mb_secondary(inst: &BeamformingInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    if inst.l() == 0 {
        return mb_single_group(inst, cfg);
    }
    let start = Instant::now();
    let sys = inst.system()?;
    let (n, m) = (sys.n(), sys.m());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut phase1 = 0;
    let mut found = None;
    let mut restarts = 0;
    let mut last = None;
    let mut x_last = CVector::zeros(n);
    for attempt in 0..=cfg.restarts_phase1 {
        restarts = attempt;
        let x0 = normal_vector(&mut rng, n, Field::Complex);
        let mut st = CompressedState::at_point(x0, m);
        let stats = rank1::run(
            &sys,
            &mut st,
            &XUpdate::Mean,
            PriorSpec::None,
            rank1::StopRule { max_iter: cfg.max_iter_phase1, tol_successive: 0.0, tol_consensus: 0.0, at_feasible: true },
        );
        phase1 += stats.iterations;
        last = stats.last;
        if stats.first_feasible.is_some() {
            found = Some(st.x);
            break;
        }
        x_last = st.x;
    }
    let Some(w_feas) = found else {
        return report(&sys, x_last, phase1, 0, restarts, false, last, Vec::new(), start);
    };
    let rho = 2.0 * (m as f64).sqrt();
    let (w, iters, last, mu) = minimize_power(&sys, w_feas, rho, cfg)?;
    report(&sys, w, phase1, iters, restarts, true, last, mu, start)
}
