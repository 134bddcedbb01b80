//! Full-state consensus-ADMM.
//!
//! With scaled duals `uᵢ` and penalty `ρ` one iteration is
//!
//! ```text
//! x  ← (A₀ + mρI)⁻¹ (b₀ + ρ Σᵢ (zᵢ + uᵢ))
//! zᵢ ← argmin ‖zᵢ − x + uᵢ‖²  s.t. constraint i
//! uᵢ ← uᵢ + zᵢ − x
//! ```
//!
//! [`run`] first looks for a feasible point with the objective dropped
//! (`x ← mean(zᵢ + uᵢ)`, independent of `ρ`), restarting from fresh random
//! points when an attempt stalls, and then runs the iteration above from
//! that point.

use std::time::Instant;

use nalgebra::{Cholesky, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{normal_vector, pairwise_sum, CVector, C64};
use crate::model::{kkt_residual, Field, HermitianMatrix, QcqpProblem, SolveReport};
use crate::qcqp1::ConstraintProjector;
use crate::rootfind::RootMethod;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rho: f64,
    /// Per attempt.
    pub max_iter_phase1: usize,
    pub max_iter_phase2: usize,
    pub tol_successive: f64,
    pub tol_consensus: f64,
    /// Re-initializations allowed after the first phase-1 attempt.
    pub restarts_phase1: usize,
    pub root_method: RootMethod,
    pub seed: u64,
    /// Worker threads for the z-updates; results do not depend on it.
    pub threads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: 1.0,
            max_iter_phase1: 1_000,
            max_iter_phase2: 10_000,
            tol_successive: 1e-8,
            tol_consensus: 1e-6,
            restarts_phase1: 10,
            root_method: RootMethod::Bisection,
            seed: 0,
            threads: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Config(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.tol_successive > 0.0) || !(self.tol_consensus > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_iter_phase1 == 0 || self.threads == 0 {
            return Err(Error::Config("iteration caps and thread count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusState {
    pub x: CVector,
    pub z: Vec<CVector>,
    pub u: Vec<CVector>,
}

impl ConsensusState {
    /// `x`, `zᵢ` i.i.d. standard normal in `field`, `uᵢ = 0`.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, m: usize, field: Field) -> Self {
        let x = normal_vector(rng, n, field);
        let z = (0..m).map(|_| normal_vector(rng, n, field)).collect();
        ConsensusState { x, z, u: vec![CVector::zeros(n); m] }
    }

    /// Consensus at `x`: `zᵢ = x`, `uᵢ = 0`.
    pub fn at_point(x: CVector, m: usize) -> Self {
        let n = x.len();
        ConsensusState { z: vec![x.clone(); m], u: vec![CVector::zeros(n); m], x }
    }

    pub fn m(&self) -> usize {
        self.z.len()
    }
}

/// Factorization of `A₀ + mρI`.
#[derive(Debug, Clone)]
pub struct FactorCache {
    kind: Factor,
}

#[derive(Debug, Clone)]
enum Factor {
    /// `A₀ + mρI = sI`
    Scalar(f64),
    Cholesky(Cholesky<C64, Dyn>),
}

impl FactorCache {
    pub fn new(a0: &HermitianMatrix, m: usize, rho: f64) -> Result<Self> {
        let shift = m as f64 * rho;
        if let Some(s) = a0.as_scaled_identity() {
            let d = s + shift;
            if !(d > 0.0) {
                return Err(Error::Config(format!(
                    "A0 + m*rho*I is not positive definite (rho = {rho}); increase rho"
                )));
            }
            return Ok(FactorCache { kind: Factor::Scalar(d) });
        }
        let mut mat = a0.matrix().clone();
        for k in 0..mat.nrows() {
            mat[(k, k)] += C64::new(shift, 0.0);
        }
        match Cholesky::new(mat) {
            Some(ch) => Ok(FactorCache { kind: Factor::Cholesky(ch) }),
            None => Err(Error::Config(format!(
                "A0 + m*rho*I is not positive definite (rho = {rho}); increase rho"
            ))),
        }
    }

    pub fn solve(&self, rhs: &CVector) -> CVector {
        match &self.kind {
            Factor::Scalar(d) => rhs.unscale(*d),
            Factor::Cholesky(ch) => ch.solve(rhs),
        }
    }
}

fn sums(state: &ConsensusState) -> Vec<CVector> {
    state.z.iter().zip(&state.u).map(|(z, u)| z + u).collect()
}

/// `(A₀ + mρI)⁻¹(b₀ + ρΣ(zᵢ + uᵢ))`
pub fn x_update(p: &QcqpProblem, state: &ConsensusState, rho: f64, cache: &FactorCache) -> CVector {
    let total = pairwise_sum(&sums(state), p.n());
    cache.solve(&(p.b0() + total * C64::new(rho, 0.0)))
}

/// Mean of `zᵢ + uᵢ`, accumulated as deviations from the first term so that
/// identical inputs give back exactly that input.
pub fn x_update_feasibility(state: &ConsensusState) -> CVector {
    let v = sums(state);
    let base = v[0].clone();
    let dev: Vec<CVector> = v.iter().map(|vi| vi - &base).collect();
    base + pairwise_sum(&dev, v[0].len()).unscale(v.len() as f64)
}

/// Projects `ζ = x − uᵢ` and updates the dual. Returns `(zᵢ', uᵢ', μ)` where
/// `μ` is the multiplier of the normalized projection.
pub fn z_u_update(
    proj: &ConstraintProjector,
    x: &CVector,
    u: &CVector,
    method: RootMethod,
    field: Field,
) -> Result<(CVector, CVector, f64)> {
    let zeta = x - u;
    let sol = proj.project(&zeta, method)?;
    let mut z = sol.z;
    if field == Field::Real {
        z.iter_mut().for_each(|c| c.im = 0.0);
    }
    let u_new = u + (&z - x);
    Ok((z, u_new, sol.mu))
}

/// `(Σᵢ‖zᵢ − x‖², ‖x − x_prev‖)`
pub fn residuals(state: &ConsensusState, x_prev: &CVector) -> (f64, f64) {
    let consensus = state.z.iter().map(|z| (z - &state.x).norm_squared()).sum();
    (consensus, (&state.x - x_prev).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// Strictly increasing over the whole run.
    pub iteration: usize,
    pub phase: u8,
    pub consensus: f64,
    pub successive: f64,
    pub objective: f64,
    pub max_violation: f64,
}

/// Problem plus precomputed per-constraint data.
pub struct Engine<'a> {
    problem: &'a QcqpProblem,
    projectors: Vec<ConstraintProjector>,
    cfg: SolverConfig,
    pool: Option<rayon::ThreadPool>,
}

impl<'a> Engine<'a> {
    pub fn new(problem: &'a QcqpProblem, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let projectors =
            problem.constraints().iter().map(ConstraintProjector::new).collect::<Result<Vec<_>>>()?;
        let pool = if cfg.threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.threads)
                    .build()
                    .map_err(|e| Error::Config(e.to_string()))?,
            )
        } else {
            None
        };
        Ok(Engine { problem, projectors, cfg, pool })
    }

    pub fn projectors(&self) -> &[ConstraintProjector] {
        &self.projectors
    }

    /// All z/u-updates for the current `x`; returns the multipliers.
    pub fn update_locals(&self, state: &mut ConsensusState) -> Result<Vec<f64>> {
        let method = self.cfg.root_method;
        let field = self.problem.field();
        let x = &state.x;
        let work = |i: usize| z_u_update(&self.projectors[i], x, &state.u[i], method, field);
        let out: Vec<Result<(CVector, CVector, f64)>> = match &self.pool {
            Some(pool) => pool.install(|| (0..state.m()).into_par_iter().map(work).collect()),
            None => (0..state.m()).map(work).collect(),
        };
        let mut mu = Vec::with_capacity(out.len());
        for (i, r) in out.into_iter().enumerate() {
            let (z, u, m) = r?;
            state.z[i] = z;
            state.u[i] = u;
            mu.push(m);
        }
        Ok(mu)
    }

    /// One objective-free iteration.
    pub fn feasibility_step(&self, state: &mut ConsensusState) -> Result<Vec<f64>> {
        state.x = x_update_feasibility(state);
        self.update_locals(state)
    }

    pub fn step(&self, state: &mut ConsensusState, cache: &FactorCache) -> Result<Vec<f64>> {
        state.x = x_update(self.problem, state, self.cfg.rho, cache);
        if self.problem.field() == Field::Real {
            state.x.iter_mut().for_each(|c| c.im = 0.0);
        }
        self.update_locals(state)
    }

    pub fn run(&self) -> Result<SolveReport> {
        self.run_traced(&mut |_| {})
    }

    pub fn run_traced(&self, trace: &mut dyn FnMut(&TraceRow)) -> Result<SolveReport> {
        let start = Instant::now();
        let p = self.problem;
        let cfg = &self.cfg;
        let (n, m) = (p.n(), p.m());
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut tick = 0usize;

        let mut iters1 = 0;
        let mut restarts = 0;
        let mut found: Option<CVector> = None;
        let mut last = ConsensusState::at_point(CVector::zeros(n), m);
        let mut successive = 0.0;
        'attempts: for attempt in 0..=cfg.restarts_phase1 {
            restarts = attempt;
            let mut state = ConsensusState::random(&mut rng, n, m, p.field());
            for _ in 0..cfg.max_iter_phase1 {
                let x_prev = state.x.clone();
                state.x = x_update_feasibility(&state);
                self.update_locals(&mut state)?;
                iters1 += 1;
                tick += 1;
                let viol = p.max_violation(&state.x);
                let (consensus, succ) = residuals(&state, &x_prev);
                successive = succ;
                trace(&TraceRow {
                    iteration: tick,
                    phase: 1,
                    consensus,
                    successive,
                    objective: p.objective(&state.x),
                    max_violation: viol,
                });
                if viol <= crate::model::FEASIBILITY_TOL {
                    found = Some(state.x.clone());
                    last = state;
                    break 'attempts;
                }
            }
            last = state;
        }

        let Some(x_feas) = found else {
            let x = last.x.clone();
            return Ok(self.report(x, iters1, 0, restarts, false, &last, successive, vec![0.0; m], start));
        };
        if !p.has_objective() || cfg.max_iter_phase2 == 0 {
            return Ok(self.report(x_feas, iters1, 0, restarts, true, &last, successive, vec![0.0; m], start));
        }

        // the second phase continues from the local copies and duals of the first
        let cache = FactorCache::new(p.a0(), m, cfg.rho)?;
        let mut state = last;
        let mut best = (p.objective(&x_feas), x_feas);
        let mut mu = vec![0.0; m];
        let mut iters2 = 0;
        for _ in 0..cfg.max_iter_phase2 {
            let x_prev = state.x.clone();
            mu = self.step(&mut state, &cache)?;
            iters2 += 1;
            tick += 1;
            let (consensus, succ) = residuals(&state, &x_prev);
            successive = succ;
            let obj = p.objective(&state.x);
            let viol = p.max_violation(&state.x);
            trace(&TraceRow { iteration: tick, phase: 2, consensus, successive, objective: obj, max_violation: viol });
            if viol <= crate::model::FEASIBILITY_TOL && obj < best.0 {
                best = (obj, state.x.clone());
            }
            if successive < cfg.tol_successive && consensus <= cfg.tol_consensus {
                break;
            }
        }
        let multipliers: Vec<f64> = mu.iter().map(|v| cfg.rho * v).collect();
        if p.is_feasible(&state.x) {
            let x = state.x.clone();
            return Ok(self.report(x, iters1, iters2, restarts, true, &state, successive, multipliers, start));
        }
        // phase 2 can settle into a cycle near the boundary; pull the last
        // iterate back with the feasibility updates and keep whichever
        // feasible point is cheaper
        let mut polish = state.clone();
        for _ in 0..cfg.max_iter_phase1 {
            polish.x = x_update_feasibility(&polish);
            self.update_locals(&mut polish)?;
            if p.is_feasible(&polish.x) {
                let obj = p.objective(&polish.x);
                if obj < best.0 {
                    best = (obj, polish.x.clone());
                }
                break;
            }
        }
        let x = best.1;
        Ok(self.report(x, iters1, iters2, restarts, true, &state, successive, multipliers, start))
    }

    #[allow(clippy::too_many_arguments)]
    fn report(
        &self,
        x: CVector,
        iterations_phase1: usize,
        iterations_phase2: usize,
        restarts: usize,
        feasible: bool,
        state: &ConsensusState,
        successive_diff: f64,
        multipliers: Vec<f64>,
        start: Instant,
    ) -> SolveReport {
        let p = self.problem;
        let kkt = kkt_residual(p, &x, &multipliers).map(|k| k.stationarity).unwrap_or(f64::NAN);
        SolveReport {
            consensus_residual: state.z.iter().map(|z| (z - &state.x).norm_squared()).sum(),
            successive_diff,
            kkt_stationarity: kkt,
            max_violation: p.max_violation(&x),
            violations: p.violation_count(&x),
            objective: p.objective(&x),
            feasible,
            iterations_phase1,
            iterations_phase2,
            restarts,
            multipliers,
            mse_db: None,
            wall_time: start.elapsed().as_secs_f64(),
            x,
        }
    }
}

/// Two-phase solve of `p`.
pub fn run(p: &QcqpProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    Engine::new(p, cfg.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{normal_matrix, real};
    use crate::model::{ConstraintSense, QuadraticConstraint};

    fn rv(v: &[f64]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&x| real(x)))
    }

    fn ball(n: usize, r2: f64) -> QuadraticConstraint {
        QuadraticConstraint::new(HermitianMatrix::identity(n), CVector::zeros(n), r2, ConstraintSense::LessEqual)
            .unwrap()
    }

    #[test]
    fn feasibility_update_of_identical_sums_is_exact() {
        let v = rv(&[0.1, 0.7, -0.3]);
        let st = ConsensusState::at_point(v.clone(), 7);
        assert_eq!(x_update_feasibility(&st), v);
    }

    #[test]
    fn feasibility_update_symmetric_pair() {
        let v = rv(&[1.5, -2.0]);
        let st = ConsensusState { x: v.clone(), z: vec![v.clone(), -&v], u: vec![CVector::zeros(2); 2] };
        assert!(x_update_feasibility(&st).norm() < 1e-15);
    }

    #[test]
    fn x_update_identity_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = QcqpProblem::new(
            HermitianMatrix::identity(3),
            CVector::zeros(3),
            vec![ball(3, 1.0), ball(3, 2.0)],
            Field::Complex,
        )
        .unwrap();
        let st = ConsensusState::random(&mut rng, 3, 2, Field::Complex);
        let rho = 0.7;
        let cache = FactorCache::new(p.a0(), 2, rho).unwrap();
        let x = x_update(&p, &st, rho, &cache);
        let expect = (&st.z[0] + &st.u[0] + &st.z[1] + &st.u[1]).unscale(2.0 + 1.0 / rho);
        assert!((x - expect).norm() < 1e-14);
    }

    #[test]
    fn x_update_general_solve_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = normal_matrix(&mut rng, 5, 5, Field::Complex);
        let a0 = HermitianMatrix::new(&g * g.adjoint()).unwrap();
        let b0 = normal_vector(&mut rng, 5, Field::Complex);
        let p = QcqpProblem::new(a0.clone(), b0.clone(), vec![ball(5, 1.0); 3], Field::Complex).unwrap();
        let st = ConsensusState::random(&mut rng, 5, 3, Field::Complex);
        let cache = FactorCache::new(&a0, 3, 1.3).unwrap();
        let x = x_update(&p, &st, 1.3, &cache);
        let sum: CVector = st.z.iter().zip(&st.u).map(|(z, u)| z + u).fold(CVector::zeros(5), |a, b| a + b);
        let lhs = a0.matrix() * &x + &x * real(3.0 * 1.3);
        let rhs = &b0 + sum * real(1.3);
        assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn indefinite_objective_needs_large_rho() {
        let a0 = HermitianMatrix::identity(2).neg();
        assert!(matches!(FactorCache::new(&a0, 1, 0.5), Err(Error::Config(_))));
        assert!(FactorCache::new(&a0, 1, 2.0).is_ok());
    }

    #[test]
    fn feasible_no_op_update() {
        let proj = ConstraintProjector::new(&ball(2, 4.0)).unwrap();
        let x = rv(&[1.0, 0.5]);
        let (z, u, mu) = z_u_update(&proj, &x, &CVector::zeros(2), RootMethod::Bisection, Field::Complex).unwrap();
        assert_eq!(z, x);
        assert_eq!(u, CVector::zeros(2));
        assert_eq!(mu, 0.0);
    }

    #[test]
    fn residuals_examples() {
        let x = rv(&[1.0, 2.0]);
        let mut st = ConsensusState::at_point(x.clone(), 1);
        assert_eq!(residuals(&st, &x), (0.0, 0.0));
        st.z[0] = &x + rv(&[1.0, 0.0]);
        assert_eq!(residuals(&st, &x).0, 1.0);
    }

    #[test]
    fn projection_onto_ball_from_outside() {
        let d = rv(&[1.2, -1.6]);
        let p = QcqpProblem::new(HermitianMatrix::identity(2), d.clone(), vec![ball(2, 1.0)], Field::Real).unwrap();
        let rep = run(&p, &SolverConfig { seed: 9, ..Default::default() }).unwrap();
        // min ‖x‖² − 2Re{dᴴx} over the unit ball: x = d/‖d‖
        let expect = d.unscale(2.0);
        assert!((&rep.x - &expect).norm() < 1e-4, "{}", rep.x);
        assert!(rep.feasible);
        assert!(rep.kkt_stationarity < 1e-4);
    }

    #[test]
    fn run_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cons: Vec<QuadraticConstraint> = (0..4)
            .map(|_| {
                let a = HermitianMatrix::new(normal_matrix(&mut rng, 3, 3, Field::Complex)).unwrap();
                let xf = normal_vector(&mut rng, 3, Field::Complex);
                let c = a.quad_form(&xf) - 0.5;
                QuadraticConstraint::new(a, CVector::zeros(3), c, ConstraintSense::LessEqual).unwrap()
            })
            .collect();
        let p = QcqpProblem::new(HermitianMatrix::identity(3), CVector::zeros(3), cons, Field::Complex).unwrap();
        let cfg = SolverConfig { seed: 17, max_iter_phase2: 500, ..Default::default() };
        let mut a = run(&p, &cfg).unwrap();
        let mut b = run(&p, &cfg).unwrap();
        a.wall_time = 0.0;
        b.wall_time = 0.0;
        assert_eq!(a, b);
        let mut c = run(&p, &SolverConfig { threads: 3, ..cfg }).unwrap();
        c.wall_time = 0.0;
        assert_eq!(a, c);
    }
}
