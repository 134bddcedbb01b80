//! Consensus-ADMM for families of homogeneous rank-1 constraints
//! `|aᵢᴴx|² (sense) cᵢ` in `O(m + n)` working memory.
//!
//! For rank-1 constraints every dual satisfies `uᵢ = νᵢaᵢ` after its first
//! update, so the iteration only needs `z_s = Σzᵢ`, `u_s = Σuᵢ` and the
//! scalars `αᵢ = aᵢᴴuᵢ`:
//!
//! ```text
//! x  ← (z_s + u_s)/m                 (or the regularized solve)
//! ξ  ← A_sᴴx
//! νᵢ ← (τᵢ − |ξᵢ − αᵢ|)/‖aᵢ‖² · phase(ξᵢ − αᵢ)
//! z_s ← mx − u_s + A_sν
//! u_s ← u_s + z_s − mx
//! αᵢ ← ‖aᵢ‖²νᵢ
//! ```
//!
//! where `τᵢ` is the magnitude `|aᵢᴴzᵢ|` demanded by the constraint (equal to
//! `|ξᵢ − αᵢ|` when the projection is inactive).

use crate::admm::FactorCache;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::model::{ConstraintSense, HermitianMatrix, QuadraticConstraint, FEASIBILITY_TOL};
use crate::qcqp1::DEGENERATE_PHASE;
use crate::rootfind::{solve_cubic_mu, CubicInputs};

/// Constraint data: columns `aᵢ` of `A_s`, right-hand sides and senses.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1System {
    a_s: CMatrix,
    norms_sq: Vec<f64>,
    c: Vec<f64>,
    senses: Vec<ConstraintSense>,
}

impl Rank1System {
    pub fn new(a_s: CMatrix, c: Vec<f64>, senses: Vec<ConstraintSense>) -> Result<Self> {
        let m = a_s.ncols();
        if m == 0 || a_s.nrows() == 0 {
            return Err(Error::InvalidInput("empty measurement matrix".into()));
        }
        if c.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: c.len() });
        }
        if senses.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: senses.len() });
        }
        let norms_sq: Vec<f64> = a_s.column_iter().map(|col| col.norm_squared()).collect();
        if norms_sq.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidInput("constraint vectors must be finite and nonzero".into()));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite right-hand side".into()));
        }
        for s in &senses {
            if let ConstraintSense::Bounded(eps) = s {
                if !(*eps > 0.0) {
                    return Err(Error::InvalidInput(format!("bounded constraint needs eps > 0, got {eps}")));
                }
            }
        }
        Ok(Rank1System { a_s, norms_sq, c, senses })
    }

    /// All constraints with the same sense.
    pub fn uniform(a_s: CMatrix, c: Vec<f64>, sense: ConstraintSense) -> Result<Self> {
        let m = a_s.ncols();
        Self::new(a_s, c, vec![sense; m])
    }

    pub fn n(&self) -> usize {
        self.a_s.nrows()
    }

    pub fn m(&self) -> usize {
        self.a_s.ncols()
    }

    pub fn a_s(&self) -> &CMatrix {
        &self.a_s
    }

    pub fn column(&self, i: usize) -> CVector {
        self.a_s.column(i).into_owned()
    }

    pub fn norms_sq(&self) -> &[f64] {
        &self.norms_sq
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn senses(&self) -> &[ConstraintSense] {
        &self.senses
    }

    /// The constraints as general quadratic constraints.
    pub fn constraints(&self) -> Result<Vec<QuadraticConstraint>> {
        (0..self.m()).map(|i| QuadraticConstraint::rank1(self.column(i), self.c[i], self.senses[i])).collect()
    }

    /// `A_sᴴx`
    pub fn measure(&self, x: &CVector) -> CVector {
        self.a_s.ad_mul(x)
    }

    /// Relative violation of each constraint given `ξ = A_sᴴx`.
    pub fn violations_from<'a>(&'a self, xi: &'a CVector) -> impl Iterator<Item = f64> + 'a {
        xi.iter().zip(&self.c).zip(&self.senses).map(|((v, &c), &sense)| {
            let r = v.norm_sqr() - c;
            let raw = match sense {
                ConstraintSense::LessEqual => r.max(0.0),
                ConstraintSense::GreaterEqual => (-r).max(0.0),
                ConstraintSense::Equal => r.abs(),
                ConstraintSense::Bounded(eps) => (r.abs() - eps).max(0.0),
            };
            raw / c.abs().max(1.0)
        })
    }

    pub fn max_violation(&self, x: &CVector) -> f64 {
        self.violations_from(&self.measure(x)).fold(0.0, f64::max)
    }

    pub fn violation_count(&self, x: &CVector) -> usize {
        self.violations_from(&self.measure(x)).filter(|&v| v > FEASIBILITY_TOL).count()
    }

    /// Magnitude `|aᵢᴴzᵢ|` the projection of `v = aᵢᴴζᵢ` must reach, or `None`
    /// if `ζᵢ` already satisfies constraint `i`.
    fn target(&self, i: usize, r: f64) -> Option<f64> {
        let c = self.c[i];
        let r2 = r * r;
        match self.senses[i] {
            ConstraintSense::Equal => Some(c.max(0.0).sqrt()),
            ConstraintSense::LessEqual => (r2 > c).then(|| c.max(0.0).sqrt()),
            ConstraintSense::GreaterEqual => (r2 < c).then(|| c.sqrt()),
            ConstraintSense::Bounded(eps) => {
                if r2 > c + eps {
                    Some((c + eps).max(0.0).sqrt())
                } else if c - eps >= 0.0 && r2 < c - eps {
                    Some((c - eps).sqrt())
                } else {
                    None
                }
            }
        }
    }
}

/// Structural priors on `x`, applied right after each `x`-update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PriorSpec {
    #[default]
    None,
    RealPart,
    RealNonnegative,
    /// Keep the `k` largest magnitudes.
    HardThreshold(usize),
    /// Shrink magnitudes by `λ`, keeping phases.
    SoftThreshold(f64),
}

pub fn apply_prior(v: &CVector, prior: PriorSpec) -> CVector {
    let mut out = v.clone();
    apply_prior_mut(&mut out, prior);
    out
}

pub fn apply_prior_mut(v: &mut CVector, prior: PriorSpec) {
    match prior {
        PriorSpec::None => {}
        PriorSpec::RealPart => v.iter_mut().for_each(|c| c.im = 0.0),
        PriorSpec::RealNonnegative => v.iter_mut().for_each(|c| *c = C64::new(c.re.max(0.0), 0.0)),
        PriorSpec::HardThreshold(k) => {
            if k >= v.len() {
                return;
            }
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|&i, &j| v[j].norm().total_cmp(&v[i].norm()).then(i.cmp(&j)));
            for &i in &idx[k..] {
                v[i] = C64::new(0.0, 0.0);
            }
        }
        PriorSpec::SoftThreshold(lambda) => v.iter_mut().for_each(|c| {
            let r = c.norm();
            *c = if r <= lambda { C64::new(0.0, 0.0) } else { *c * ((r - lambda) / r) };
        }),
    }
}

/// How `x` is formed from `z_s + u_s`.
#[derive(Debug, Clone)]
pub enum XUpdate {
    /// `(z_s + u_s)/m`
    Mean,
    /// `(A₀ + mρI)⁻¹(b₀ + ρ(z_s + u_s))`
    Regularized { b0: CVector, rho: f64, cache: FactorCache },
}

impl XUpdate {
    pub fn with_objective(a0: &HermitianMatrix, b0: CVector, m: usize, rho: f64) -> Result<Self> {
        Ok(XUpdate::Regularized { cache: FactorCache::new(a0, m, rho)?, b0, rho })
    }

    /// Objective `‖x‖²`.
    pub fn min_norm(n: usize, m: usize, rho: f64) -> Result<Self> {
        Self::with_objective(&HermitianMatrix::identity(n), CVector::zeros(n), m, rho)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompressedState {
    pub x: CVector,
    pub z_s: CVector,
    pub u_s: CVector,
    pub alpha: CVector,
    /// `A_sᴴx` from the last step
    pub xi: CVector,
    pub nu: CVector,
    /// Target magnitudes from the last step
    pub tau: Vec<f64>,
    /// `|ξᵢ − αᵢ|` from the last step, before `α` was updated
    pub dist: Vec<f64>,
}

impl CompressedState {
    /// Consensus at `x0`: `zᵢ = x0`, `uᵢ = 0`.
    pub fn at_point(x0: CVector, m: usize) -> Self {
        let n = x0.len();
        CompressedState {
            z_s: x0.scale(m as f64),
            u_s: CVector::zeros(n),
            alpha: CVector::zeros(m),
            xi: CVector::zeros(m),
            nu: CVector::zeros(m),
            tau: vec![0.0; m],
            dist: vec![0.0; m],
            x: x0,
        }
    }

    /// Summarizes a full state whose duals are zero (`z_s = Σzᵢ`).
    pub fn from_sums(x: CVector, z_s: CVector, m: usize) -> Self {
        let mut st = Self::at_point(x, m);
        st.z_s = z_s;
        st
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// `‖xᵗ⁺¹ − xᵗ‖`
    pub successive: f64,
    /// Largest relative violation at the new `x`.
    pub max_violation: f64,
    /// Constraints violated beyond the feasibility tolerance at the new `x`.
    pub violations: usize,
    /// `Σᵢ‖aᵢ‖²|νᵢᵗ⁺¹ − νᵢᵗ|² = Σᵢ‖uᵢᵗ⁺¹ − uᵢᵗ‖² = Σᵢ‖zᵢ − x‖²`
    pub consensus: f64,
}

fn form_x(sys: &Rank1System, st: &mut CompressedState, update: &XUpdate, prior: PriorSpec) -> f64 {
    let total = &st.z_s + &st.u_s;
    let mut x = match update {
        XUpdate::Mean => total.unscale(sys.m() as f64),
        XUpdate::Regularized { b0, rho, cache } => cache.solve(&(b0 + total * C64::new(*rho, 0.0))),
    };
    apply_prior_mut(&mut x, prior);
    let diff = (&x - &st.x).norm();
    st.x = x;
    diff
}

fn finish(sys: &Rank1System, st: &mut CompressedState, new_nu: CVector, successive: f64) -> StepInfo {
    let m = sys.m() as f64;
    let mx = st.x.scale(m);
    let consensus =
        new_nu.iter().zip(&st.nu).zip(&sys.norms_sq).map(|((a, b), s)| (a - b).norm_sqr() * s).sum();
    st.z_s = &mx - &st.u_s + &sys.a_s * &new_nu;
    st.u_s = &st.u_s + &st.z_s - &mx;
    st.alpha = CVector::from_iterator(new_nu.len(), new_nu.iter().zip(&sys.norms_sq).map(|(v, s)| v * *s));
    st.nu = new_nu;
    let mut max_violation: f64 = 0.0;
    let mut violations = 0;
    for v in sys.violations_from(&st.xi) {
        max_violation = max_violation.max(v);
        violations += usize::from(v > FEASIBILITY_TOL);
    }
    StepInfo { successive, max_violation, violations, consensus }
}

/// One iteration for any mix of senses.
pub fn step(sys: &Rank1System, st: &mut CompressedState, update: &XUpdate, prior: PriorSpec) -> StepInfo {
    let successive = form_x(sys, st, update, prior);
    st.xi = sys.measure(&st.x);
    let mut nu = CVector::zeros(sys.m());
    for i in 0..sys.m() {
        let v = st.xi[i] - st.alpha[i];
        let r = v.norm();
        st.dist[i] = r;
        match sys.target(i, r) {
            Some(t) => {
                st.tau[i] = t;
                let phase = if r < DEGENERATE_PHASE { C64::new(1.0, 0.0) } else { v / r };
                nu[i] = phase * ((t - r) / sys.norms_sq[i]);
            }
            None => st.tau[i] = r,
        }
    }
    finish(sys, st, nu, successive)
}

/// Multipliers of the last [`step`] for the canonical constraints
/// ([`Rank1System::constraints`]), scaled by `rho`. Only meaningful for the
/// regularized update.
pub fn canonical_multipliers(sys: &Rank1System, st: &CompressedState, rho: f64) -> Vec<f64> {
    (0..sys.m())
        .map(|i| {
            let (t, r) = (st.tau[i], st.dist[i]);
            // (I + μaaᴴ)z = ζ for the uncanonicalized form |aᴴz|² − c
            let mu = if t > 0.0 { (r - t) / (sys.norms_sq[i] * t) } else { 0.0 };
            let sign = if sys.senses[i] == ConstraintSense::GreaterEqual { -1.0 } else { 1.0 };
            rho * sign * mu
        })
        .collect()
}

/// `ρ = 1.1·maxᵢ yᵢ‖aᵢ‖²`, the smallest safe penalty for the Gaussian update
/// with a margin.
pub fn gaussian_rho(sys: &Rank1System) -> f64 {
    let r = sys.c.iter().zip(&sys.norms_sq).map(|(y, s)| y * s).fold(0.0, f64::max);
    if r > 0.0 {
        1.1 * r
    } else {
        1.0
    }
}

/// One iteration of the least-squares magnitude fit
/// `min Σ ½wᵢ²  s.t. |aᵢᴴx|² = yᵢ + wᵢ`. The right-hand sides of `sys` are
/// the measurements `y`; senses are ignored. Returns the step info and the
/// multipliers (estimated noise terms).
pub fn step_gaussian(sys: &Rank1System, st: &mut CompressedState, rho: f64, prior: PriorSpec) -> Result<(StepInfo, Vec<f64>)> {
    let successive = form_x(sys, st, &XUpdate::Mean, prior);
    st.xi = sys.measure(&st.x);
    let mut nu = CVector::zeros(sys.m());
    let mut mus = Vec::with_capacity(sys.m());
    for i in 0..sys.m() {
        let v = st.xi[i] - st.alpha[i];
        let s = sys.norms_sq[i];
        st.dist[i] = v.norm();
        let mu = solve_cubic_mu(&CubicInputs { y: sys.c[i], rho, a_norm_sq: s, d: v.norm_sqr() })?.mu;
        nu[i] = v * (-mu / (rho + mu * s));
        st.tau[i] = (v * (rho / (rho + mu * s))).norm();
        mus.push(mu);
    }
    // violations here measure the misfit to the noisy y
    Ok((finish(sys, st, nu, successive), mus))
}

/// `½Σ(yᵢ − |aᵢᴴx|²)²`
pub fn ml_cost(sys: &Rank1System, x: &CVector) -> f64 {
    sys.measure(x).iter().zip(&sys.c).map(|(v, y)| 0.5 * (y - v.norm_sqr()).powi(2)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub iterations: usize,
    pub last: Option<StepInfo>,
    /// Iteration at which `x` first met all constraints.
    pub first_feasible: Option<usize>,
}

/// When to stop [`run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub max_iter: usize,
    /// Stop once `‖xᵗ⁺¹ − xᵗ‖` drops below this while the consensus
    /// residual is at most `tol_consensus`.
    pub tol_successive: f64,
    pub tol_consensus: f64,
    /// Stop as soon as `x` meets every constraint.
    pub at_feasible: bool,
}

/// Iterates [`step`] until the stop rule fires.
pub fn run(sys: &Rank1System, st: &mut CompressedState, update: &XUpdate, prior: PriorSpec, stop: StopRule) -> RunStats {
    let mut stats = RunStats { iterations: 0, last: None, first_feasible: None };
    while stats.iterations < stop.max_iter {
        let info = step(sys, st, update, prior);
        stats.iterations += 1;
        stats.last = Some(info);
        if info.violations == 0 && stats.first_feasible.is_none() {
            stats.first_feasible = Some(stats.iterations);
            if stop.at_feasible {
                break;
            }
        }
        if info.successive < stop.tol_successive && info.consensus <= stop.tol_consensus {
            break;
        }
    }
    stats
}
