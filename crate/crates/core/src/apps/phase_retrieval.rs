//! Phase retrieval `find x  s.t. |aᵢᴴx|² ≈ yᵢ` with the rank-1 engine:
//! exact magnitudes (equalities), quantized magnitudes (two-sided bounds)
//! or a least-squares fit for Gaussian noise.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admm::SolverConfig;
use crate::apps::metrics::metric_mse;
use crate::error::{Error, Result};
use crate::linalg::{normal_vector, CMatrix, CVector};
use crate::model::{ConstraintSense, Field, SolveReport};
use crate::rank1::{self, gaussian_rho, CompressedState, PriorSpec, Rank1System, StepInfo, XUpdate};

/// Power-iteration steps of the spectral initializer.
pub const SPECTRAL_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    Noiseless,
    /// `|yᵢ − |aᵢᴴs|²| ≤ ε`
    Bounded(f64),
    /// Additive white Gaussian noise of this standard deviation.
    Gaussian(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRetrievalInstance {
    /// Columns are the measurement vectors `aᵢ`.
    pub a_s: CMatrix,
    pub y: Vec<f64>,
    pub noise: NoiseModel,
    pub truth: Option<CVector>,
}

impl PhaseRetrievalInstance {
    pub fn n(&self) -> usize {
        self.a_s.nrows()
    }

    pub fn m(&self) -> usize {
        self.a_s.ncols()
    }

    pub fn system(&self) -> Result<Rank1System> {
        let sense = match self.noise {
            NoiseModel::Bounded(eps) => ConstraintSense::Bounded(eps),
            _ => ConstraintSense::Equal,
        };
        Rank1System::uniform(self.a_s.clone(), self.y.clone(), sense)
    }
}

/// Leading eigenvector of `(1/m)Σ yᵢaᵢaᵢᴴ` by power iteration from a random
/// start, scaled to `‖x‖² = Σyᵢ/m`.
pub fn spectral_init(a_s: &CMatrix, y: &[f64], seed: u64) -> CVector {
    let m = a_s.ncols() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = normal_vector(&mut rng, a_s.nrows(), Field::Complex);
    v.unscale_mut(v.norm());
    for _ in 0..SPECTRAL_STEPS {
        let mut p = a_s.ad_mul(&v);
        p.iter_mut().zip(y).for_each(|(pi, &yi)| *pi *= yi);
        let next = a_s * p;
        let norm = next.norm();
        if !(norm > 0.0) {
            break;
        }
        v = next.unscale(norm);
    }
    let power = (y.iter().sum::<f64>() / m).max(0.0);
    v.scale(power.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrInit {
    Spectral,
    Random,
    Given(CVector),
}

/// Runs the compressed iteration matching the noise model until the
/// successive change of `x` drops below `cfg.tol_successive` or
/// `cfg.max_iter_phase2` iterations.
pub fn pr_solve(inst: &PhaseRetrievalInstance, cfg: &SolverConfig, prior: PriorSpec, init: &PrInit) -> Result<SolveReport> {
    let start = Instant::now();
    let sys = inst.system()?;
    let x0 = match init {
        PrInit::Spectral => spectral_init(&inst.a_s, &inst.y, cfg.seed),
        PrInit::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            normal_vector(&mut rng, inst.n(), Field::Complex)
        }
        PrInit::Given(x) => {
            if x.len() != inst.n() {
                return Err(Error::DimensionMismatch { expected: inst.n(), got: x.len() });
            }
            x.clone()
        }
    };
    let mut st = CompressedState::at_point(x0, sys.m());
    let mut iters = 0;
    let mut last: Option<StepInfo> = None;
    let gaussian = matches!(inst.noise, NoiseModel::Gaussian(_));
    let already_done = !gaussian && sys.violation_count(&st.x) == 0;
    if gaussian {
        let rho = gaussian_rho(&sys);
        while iters < cfg.max_iter_phase2 {
            let (info, _) = rank1::step_gaussian(&sys, &mut st, rho, prior)?;
            iters += 1;
            last = Some(info);
            if info.successive < cfg.tol_successive && info.consensus <= cfg.tol_consensus {
                break;
            }
        }
    } else if !already_done {
        let stats = rank1::run(
            &sys,
            &mut st,
            &XUpdate::Mean,
            prior,
            rank1::StopRule {
                max_iter: cfg.max_iter_phase2,
                tol_successive: cfg.tol_successive,
                tol_consensus: cfg.tol_consensus,
                at_feasible: false,
            },
        );
        iters = stats.iterations;
        last = stats.last;
    }
    let x = st.x;
    let (max_violation, violations) =
        if gaussian { (f64::NAN, 0) } else { (sys.max_violation(&x), sys.violation_count(&x)) };
    Ok(SolveReport {
        iterations_phase1: 0,
        iterations_phase2: iters,
        restarts: 0,
        feasible: gaussian || violations == 0,
        consensus_residual: last.map_or(0.0, |s| s.consensus),
        successive_diff: last.map_or(0.0, |s| s.successive),
        kkt_stationarity: f64::NAN,
        max_violation,
        violations,
        objective: rank1::ml_cost(&sys, &x),
        multipliers: Vec::new(),
        mse_db: inst.truth.as_ref().map(|s| metric_mse(&x, s)),
        wall_time: start.elapsed().as_secs_f64(),
        x,
    })
}

/// `min_θ‖e^{jθ}x − s‖² < 10⁻⁵`
pub fn is_resolved(x: &CVector, s: &CVector) -> bool {
    metric_mse(x, s) < -50.0
}
