//! Problem data model: Hermitian matrices, quadratic constraints, the QCQP
//! itself, constraint evaluation and the KKT-residual diagnostic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sq, CMatrix, CVector, C64};

/// Relative tolerance used to declare a constraint satisfied, measured
/// against `max(1, |c|)`.
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    #[default]
    Complex,
}

/// Dense Hermitian matrix. The constructor symmetrizes its input, so
/// `HermitianMatrix::new(A)` stores `(A + Aᴴ)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidInput(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let sym = (&m + m.adjoint()).unscale(2.0);
        Ok(HermitianMatrix(sym))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(CMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(n, n))
    }

    /// `sign · a aᴴ`
    pub fn outer(a: &CVector, sign: f64) -> Self {
        let mut m = a * a.adjoint();
        m.scale_mut(sign);
        // a aᴴ has an exactly real diagonal only up to rounding of |a_k|²
        for k in 0..m.nrows() {
            m[(k, k)].im = 0.0;
        }
        HermitianMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_inner(self) -> CMatrix {
        self.0
    }

    pub fn neg(&self) -> Self {
        HermitianMatrix(-&self.0)
    }

    /// `xᴴAx` (real for Hermitian `A`).
    pub fn quad_form(&self, x: &CVector) -> f64 {
        inner(x, &(&self.0 * x)).re
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// Returns `s` if the matrix equals `s·I` exactly.
    pub fn as_scaled_identity(&self) -> Option<f64> {
        let n = self.dim();
        let s = self.0[(0, 0)].re;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { s } else { 0.0 };
                if self.0[(i, j)] != C64::new(expect, 0.0) {
                    return None;
                }
            }
        }
        Some(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConstraintSense {
    LessEqual,
    GreaterEqual,
    Equal,
    /// `c − ε ≤ f(x) ≤ c + ε`
    Bounded(f64),
}

impl ConstraintSense {
    fn validate(self) -> Result<Self> {
        match self {
            ConstraintSense::Bounded(eps) if !(eps > 0.0 && eps.is_finite()) => Err(
                Error::InvalidInput(format!("bounded constraint needs eps > 0, got {eps}")),
            ),
            s => Ok(s),
        }
    }
}

/// `A = sign · a aᴴ`, `b = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rank1Form {
    pub a: CVector,
    pub sign: f64,
}

/// One constraint `xᴴAx − 2Re{bᴴx} (sense) c`, stored canonically: a
/// `GreaterEqual` constraint is kept as `LessEqual` with `(A, b, c)` negated.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticConstraint {
    a: HermitianMatrix,
    b: CVector,
    c: f64,
    sense: ConstraintSense,
    rank1: Option<Rank1Form>,
}

impl QuadraticConstraint {
    pub fn new(a: HermitianMatrix, b: CVector, c: f64, sense: ConstraintSense) -> Result<Self> {
        if a.dim() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.dim(), got: b.len() });
        }
        if a.dim() == 0 {
            return Err(Error::InvalidInput("empty constraint".into()));
        }
        if !c.is_finite() || !crate::linalg::all_finite(&b) {
            return Err(Error::InvalidInput("non-finite constraint data".into()));
        }
        let sense = sense.validate()?;
        Ok(match sense {
            ConstraintSense::GreaterEqual => QuadraticConstraint {
                a: a.neg(),
                b: -b,
                c: -c,
                sense: ConstraintSense::LessEqual,
                rank1: None,
            },
            s => QuadraticConstraint { a, b, c, sense: s, rank1: None },
        })
    }

    /// Homogeneous rank-1 constraint `|aᴴx|² (sense) c`.
    pub fn rank1(a: CVector, c: f64, sense: ConstraintSense) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput("empty constraint".into()));
        }
        if norm_sq(&a) == 0.0 || !crate::linalg::all_finite(&a) {
            return Err(Error::InvalidInput("rank-1 vector must be finite and nonzero".into()));
        }
        if !c.is_finite() {
            return Err(Error::InvalidInput("non-finite constraint data".into()));
        }
        let sense = sense.validate()?;
        let n = a.len();
        let (sign, c, sense) = match sense {
            ConstraintSense::GreaterEqual => (-1.0, -c, ConstraintSense::LessEqual),
            s => (1.0, c, s),
        };
        Ok(QuadraticConstraint {
            a: HermitianMatrix::outer(&a, sign),
            b: CVector::zeros(n),
            c,
            sense,
            rank1: Some(Rank1Form { a, sign }),
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &HermitianMatrix {
        &self.a
    }

    pub fn b(&self) -> &CVector {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Canonical sense: never `GreaterEqual`.
    pub fn sense(&self) -> ConstraintSense {
        self.sense
    }

    pub fn rank1_form(&self) -> Option<&Rank1Form> {
        self.rank1.as_ref()
    }

    /// For rank-1 constraints, the equivalent `|aᴴx|² (sense) c` form with
    /// the sign folded back into the sense.
    pub fn rank1_view(&self) -> Option<(&CVector, f64, ConstraintSense)> {
        let r = self.rank1.as_ref()?;
        if r.sign > 0.0 {
            return Some((&r.a, self.c, self.sense));
        }
        let sense = match self.sense {
            ConstraintSense::LessEqual => ConstraintSense::GreaterEqual,
            ConstraintSense::GreaterEqual => ConstraintSense::LessEqual,
            s => s,
        };
        Some((&r.a, -self.c, sense))
    }

    /// Left-hand side `xᴴAx − 2Re{bᴴx}`.
    pub fn lhs(&self, x: &CVector) -> f64 {
        match &self.rank1 {
            Some(r) => r.sign * inner(&r.a, x).norm_sqr(),
            None => self.a.quad_form(x) - 2.0 * inner(&self.b, x).re,
        }
    }

    /// Signed residual `xᴴAx − 2Re{bᴴx} − c`.
    pub fn eval(&self, x: &CVector) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.lhs(x) - self.c)
    }

    /// Sense-aware violation, relative to `max(1, |c|)`; zero when satisfied.
    pub fn violation(&self, x: &CVector) -> f64 {
        let r = self.lhs(x) - self.c;
        let raw = match self.sense {
            ConstraintSense::LessEqual => r.max(0.0),
            ConstraintSense::GreaterEqual => (-r).max(0.0),
            ConstraintSense::Equal => r.abs(),
            ConstraintSense::Bounded(eps) => (r.abs() - eps).max(0.0),
        };
        raw / self.c.abs().max(1.0)
    }

    /// `Ax − b`, half the gradient of the left-hand side.
    pub fn half_gradient(&self, x: &CVector) -> CVector {
        self.a.matrix() * x - &self.b
    }
}

/// Free-function form of [`QuadraticConstraint::eval`].
pub fn eval_constraint(q: &QuadraticConstraint, x: &CVector) -> Result<f64> {
    q.eval(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QcqpProblem {
    a0: HermitianMatrix,
    b0: CVector,
    constraints: Vec<QuadraticConstraint>,
    field: Field,
}

impl QcqpProblem {
    pub fn new(
        a0: HermitianMatrix,
        b0: CVector,
        constraints: Vec<QuadraticConstraint>,
        field: Field,
    ) -> Result<Self> {
        let n = a0.dim();
        if n == 0 {
            return Err(Error::InvalidInput("problem dimension must be positive".into()));
        }
        if b0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b0.len() });
        }
        if constraints.is_empty() {
            return Err(Error::InvalidInput("at least one constraint is required".into()));
        }
        for q in &constraints {
            if q.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: q.dim() });
            }
        }
        Ok(QcqpProblem { a0, b0, constraints, field })
    }

    /// Pure feasibility problem (`A₀ = 0`, `b₀ = 0`).
    pub fn feasibility(constraints: Vec<QuadraticConstraint>, field: Field) -> Result<Self> {
        let n = constraints.first().map(|q| q.dim()).unwrap_or(0);
        Self::new(HermitianMatrix::zeros(n), CVector::zeros(n), constraints, field)
    }

    pub fn n(&self) -> usize {
        self.a0.dim()
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn a0(&self) -> &HermitianMatrix {
        &self.a0
    }

    pub fn b0(&self) -> &CVector {
        &self.b0
    }

    pub fn constraints(&self) -> &[QuadraticConstraint] {
        &self.constraints
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn has_objective(&self) -> bool {
        !self.a0.is_zero() || self.b0.iter().any(|z| *z != C64::new(0.0, 0.0))
    }

    pub fn objective(&self, x: &CVector) -> f64 {
        self.a0.quad_form(x) - 2.0 * inner(&self.b0, x).re
    }

    pub fn max_violation(&self, x: &CVector) -> f64 {
        self.constraints.iter().map(|q| q.violation(x)).fold(0.0, f64::max)
    }

    pub fn violation_count(&self, x: &CVector) -> usize {
        self.constraints.iter().filter(|q| q.violation(x) > FEASIBILITY_TOL).count()
    }

    pub fn is_feasible(&self, x: &CVector) -> bool {
        self.max_violation(x) <= FEASIBILITY_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResidual {
    pub stationarity: f64,
    pub complementarity: f64,
    pub dual_feas: f64,
    pub primal_feas: f64,
}

/// Residuals of the KKT conditions of the (canonicalized) problem at
/// `(x, μ)`:
///
/// * stationarity `‖A₀x − b₀ + Σ μᵢ(Aᵢx − bᵢ)‖`
/// * complementarity `maxᵢ |μᵢ rᵢ|`, with `rᵢ` measured to the active bound
///   for two-sided constraints
/// * dual feasibility `maxᵢ max(0, −μᵢ)` over `≤` constraints
/// * primal feasibility, the largest sense-aware violation (absolute)
pub fn kkt_residual(p: &QcqpProblem, x: &CVector, mu: &[f64]) -> Result<KktResidual> {
    if mu.len() != p.m() {
        return Err(Error::DimensionMismatch { expected: p.m(), got: mu.len() });
    }
    if x.len() != p.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), got: x.len() });
    }
    let mut grad = p.a0.matrix() * x - &p.b0;
    let mut out = KktResidual::default();
    for (q, &mu_i) in p.constraints.iter().zip(mu) {
        if mu_i != 0.0 {
            grad += q.half_gradient(x) * C64::new(mu_i, 0.0);
        }
        let r = q.eval(x)?;
        let (comp, dual, primal) = match q.sense() {
            ConstraintSense::LessEqual => ((mu_i * r).abs(), (-mu_i).max(0.0), r.max(0.0)),
            ConstraintSense::GreaterEqual => ((mu_i * r).abs(), mu_i.max(0.0), (-r).max(0.0)),
            ConstraintSense::Equal => ((mu_i * r).abs(), 0.0, r.abs()),
            ConstraintSense::Bounded(eps) => {
                let active = if mu_i >= 0.0 { r - eps } else { r + eps };
                ((mu_i * active).abs(), 0.0, (r.abs() - eps).max(0.0))
            }
        };
        out.complementarity = out.complementarity.max(comp);
        out.dual_feas = out.dual_feas.max(dual);
        out.primal_feas = out.primal_feas.max(primal);
    }
    out.stationarity = grad.norm();
    Ok(out)
}

/// Outcome of a consensus-ADMM solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: CVector,
    pub iterations_phase1: usize,
    pub iterations_phase2: usize,
    /// Phase-1 re-initializations used (0 when the first attempt succeeded).
    pub restarts: usize,
    /// `false` when phase 1 exhausted its budget: the problem may be
    /// infeasible.
    pub feasible: bool,
    /// `Σᵢ‖zᵢ − x‖²` at the last iteration.
    pub consensus_residual: f64,
    /// `‖xᵗ⁺¹ − xᵗ‖` at the last iteration.
    pub successive_diff: f64,
    pub kkt_stationarity: f64,
    /// Largest relative violation of the returned `x`.
    pub max_violation: f64,
    /// Number of constraints violated beyond [`FEASIBILITY_TOL`].
    pub violations: usize,
    pub objective: f64,
    /// Recovered multipliers `ρμᵢ` (empty when not applicable).
    pub multipliers: Vec<f64>,
    /// Phase-aligned error against a known ground truth, in dB.
    pub mse_db: Option<f64>,
    /// Seconds.
    pub wall_time: f64,
}
