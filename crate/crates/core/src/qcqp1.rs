//! Exact projection onto a single quadratic constraint:
//!
//! ```text
//! minimize ‖z − ζ‖²   subject to   zᴴAz − 2Re{bᴴz} (sense) c
//! ```
//!
//! Homogeneous rank-1 constraints have a closed form. General constraints
//! are solved in the eigenbasis of `A` through the secular equation of
//! [`crate::rootfind`]. Inequalities first test whether `ζ` is already
//! feasible; otherwise the constraint is active and solved as an equality.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sq, CMatrix, CVector, C64};
use crate::model::{ConstraintSense, HermitianMatrix, QuadraticConstraint};
use crate::rootfind::{
    singular_multiplier, solve_cubic_mu, solve_phi, CubicInputs, RootMethod, SpectralConstraint,
};

/// `|aᴴζ|` below this is treated as a vanishing phase reference.
pub const DEGENERATE_PHASE: f64 = 1e-14;

/// Cached eigendecomposition `A = QΛQᴴ`, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCache {
    q: CMatrix,
    lambda: Vec<f64>,
}

impl EigenCache {
    pub fn new(a: &HermitianMatrix) -> Result<Self> {
        let n = a.dim();
        let eig = SymmetricEigen::new(a.matrix().clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let lambda: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        if lambda.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidInput("eigendecomposition failed".into()));
        }
        let q = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(EigenCache { q, lambda })
    }

    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `Qᴴv`
    pub fn rotate(&self, v: &CVector) -> CVector {
        self.q.ad_mul(v)
    }

    /// `QΛQᴴ`
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.lambda.len();
        let scaled = CMatrix::from_fn(n, n, |r, c| self.q[(r, c)] * self.lambda[c]);
        scaled * self.q.adjoint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionStatus {
    /// `ζ` was feasible; `z = ζ`, `μ = 0`.
    AtInterior,
    AtBoundary,
    /// The multiplier sits where `I + μΛ` is singular.
    PoleCase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Qcqp1Solution {
    pub z: CVector,
    /// Multiplier of `‖z − ζ‖² + μ(zᴴAz − 2Re{bᴴz} − c)`, so that
    /// `(I + μA)z = ζ + μb`.
    pub mu: f64,
    pub status: SolutionStatus,
}

impl Qcqp1Solution {
    fn interior(zeta: &CVector) -> Self {
        Qcqp1Solution { z: zeta.clone(), mu: 0.0, status: SolutionStatus::AtInterior }
    }
}

/// Projection onto `|aᴴz|² (sense) c`.
///
/// The active case moves `ζ` along `a` only, to `|aᴴz| = √c` while keeping
/// the phase of `aᴴζ`. When `aᴴζ` vanishes any phase is optimal and phase 0
/// is used: `z = ζ + (√c/‖a‖²)a`.
pub fn solve_rank1_homogeneous(
    a: &CVector,
    c: f64,
    zeta: &CVector,
    sense: ConstraintSense,
) -> Result<Qcqp1Solution> {
    if a.len() != zeta.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: zeta.len() });
    }
    let s = norm_sq(a);
    if s == 0.0 {
        return Err(Error::InvalidInput("rank-1 vector is zero".into()));
    }
    let p = inner(a, zeta);
    let r = p.norm();
    let r2 = r * r;
    let infeasible = || {
        Err(Error::InfeasibleConstraint(format!("|aᴴz|² cannot meet bound {c} under {sense:?}")))
    };
    let target_sq = match sense {
        ConstraintSense::Equal => {
            if c < 0.0 {
                return infeasible();
            }
            c
        }
        ConstraintSense::LessEqual => {
            if c < 0.0 {
                return infeasible();
            }
            if r2 <= c {
                return Ok(Qcqp1Solution::interior(zeta));
            }
            c
        }
        ConstraintSense::GreaterEqual => {
            if r2 >= c {
                return Ok(Qcqp1Solution::interior(zeta));
            }
            c
        }
        ConstraintSense::Bounded(eps) => {
            let (lo, hi) = (c - eps, c + eps);
            if hi < 0.0 {
                return infeasible();
            }
            if r2 > hi {
                hi
            } else if lo > 0.0 && r2 < lo {
                lo
            } else {
                return Ok(Qcqp1Solution::interior(zeta));
            }
        }
    };
    let t = target_sq.sqrt();
    let z = if r < DEGENERATE_PHASE {
        zeta + a * C64::new((t - r) / s, 0.0)
    } else {
        zeta + a * (p * ((t - r) / (s * r)))
    };
    // (I + μaaᴴ)z = ζ  ⇒  μ = (|aᴴζ| − √c)/(‖a‖²√c); undefined for a zero target
    let mu = if t > 0.0 { (r - t) / (s * t) } else { 0.0 };
    Ok(Qcqp1Solution { z, mu, status: SolutionStatus::AtBoundary })
}

/// Solves the equality-constrained problem in the eigenbasis, returning
/// `(z̃, μ, status)`.
fn project_to_level(sc: &SpectralConstraint, method: RootMethod) -> Result<(CVector, f64, SolutionStatus)> {
    if let Some(sing) = singular_multiplier(sc) {
        let mut zt = CVector::from_fn(sc.lambda().len(), |k, _| {
            if sing.free.contains(&k) {
                sc.zeta_t()[k]
            } else {
                (sc.zeta_t()[k] + sc.b_t()[k] * sing.mu) / (1.0 + sing.mu * sc.lambda()[k])
            }
        });
        zt[sing.free[0]] += C64::new(sing.offset_sq.max(0.0).sqrt(), 0.0);
        return Ok((zt, sing.mu, SolutionStatus::PoleCase));
    }
    let root = solve_phi(sc, method)?;
    Ok((sc.solution_at(root.mu), root.mu, SolutionStatus::AtBoundary))
}

fn solve_rotated(
    cache: &EigenCache,
    b_t: &CVector,
    c: f64,
    zeta: &CVector,
    sense: ConstraintSense,
    method: RootMethod,
) -> Result<Qcqp1Solution> {
    let zeta_t = cache.rotate(zeta);
    let sc = SpectralConstraint::new(cache.lambda.clone(), zeta_t, b_t.clone(), c)?;
    let phi0 = sc.phi_raw(0.0);
    let (zt, mu, status) = match sense {
        ConstraintSense::LessEqual => {
            if phi0 <= 0.0 {
                return Ok(Qcqp1Solution::interior(zeta));
            }
            let (zt, mu, status) = project_to_level(&sc, method)?;
            if mu <= 0.0 {
                // μᵢ ← max{0, μᵢ}
                return Ok(Qcqp1Solution::interior(zeta));
            }
            (zt, mu, status)
        }
        ConstraintSense::Equal => {
            if phi0 == 0.0 {
                return Ok(Qcqp1Solution::interior(zeta));
            }
            project_to_level(&sc, method)?
        }
        ConstraintSense::Bounded(eps) => {
            if phi0.abs() <= eps {
                return Ok(Qcqp1Solution::interior(zeta));
            }
            // round to the nearer bound: φ(μ) = sign(φ(0))·ε
            let level = sc.with_rhs(c + eps.copysign(phi0));
            project_to_level(&level, method)?
        }
        ConstraintSense::GreaterEqual => {
            return Err(Error::InvalidInput(
                "GreaterEqual constraints must be canonicalized before projection".into(),
            ))
        }
    };
    Ok(Qcqp1Solution { z: &cache.q * zt, mu, status })
}

/// Projection onto a general constraint with cached eigendecomposition.
/// `sense` must be canonical (`LessEqual`, `Equal` or `Bounded`).
pub fn solve_general(
    cache: &EigenCache,
    b: &CVector,
    c: f64,
    zeta: &CVector,
    sense: ConstraintSense,
    method: RootMethod,
) -> Result<Qcqp1Solution> {
    let n = cache.lambda.len();
    if b.len() != n || zeta.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len().min(zeta.len()) });
    }
    solve_rotated(cache, &cache.rotate(b), c, zeta, sense, method)
}

/// Projection onto `c − ε ≤ zᴴAz − 2Re{bᴴz} ≤ c + ε`: `ζ` itself when it is
/// inside the band, otherwise the projection onto the nearer bound.
pub fn solve_bounded(
    cache: &EigenCache,
    b: &CVector,
    c: f64,
    eps: f64,
    zeta: &CVector,
    method: RootMethod,
) -> Result<Qcqp1Solution> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("bounded constraint needs eps > 0, got {eps}")));
    }
    solve_general(cache, b, c, zeta, ConstraintSense::Bounded(eps), method)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianUpdate {
    pub z: CVector,
    /// Estimated noise term; equals the multiplier.
    pub w: f64,
    pub mu: f64,
}

/// Solves `min ½w² + ρ‖z − ζ‖²  s.t.  |aᴴz|² = y + w`.
///
/// The multiplier is the real root of `ρ²|aᴴζ|²/(ρ + ‖a‖²μ)² = y + μ`, and
/// `z = ζ − μ(aᴴζ)/(ρ + μ‖a‖²)·a`, `w = μ`.
pub fn solve_gaussian_magnitude(a: &CVector, y: f64, rho: f64, zeta: &CVector) -> Result<GaussianUpdate> {
    if a.len() != zeta.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: zeta.len() });
    }
    let s = norm_sq(a);
    let p = inner(a, zeta);
    let root = solve_cubic_mu(&CubicInputs { y, rho, a_norm_sq: s, d: p.norm_sqr() })?;
    let mu = root.mu;
    let z = zeta - a * (p * (mu / (rho + mu * s)));
    Ok(GaussianUpdate { z, w: mu, mu })
}

/// Per-constraint projector with everything that does not depend on `ζ`
/// precomputed: the eigendecomposition and `b̃ = Qᴴb` for general
/// constraints, or the rank-1 vector.
#[derive(Debug, Clone)]
pub enum ConstraintProjector {
    Rank1 {
        a: CVector,
        c: f64,
        sense: ConstraintSense,
        /// `A = sign·aaᴴ` of the canonical constraint
        sign: f64,
    },
    Spectral {
        cache: EigenCache,
        b_t: CVector,
        c: f64,
        sense: ConstraintSense,
    },
}

impl ConstraintProjector {
    pub fn new(q: &QuadraticConstraint) -> Result<Self> {
        if let Some((a, c, sense)) = q.rank1_view() {
            return Ok(ConstraintProjector::Rank1 {
                a: a.clone(),
                c,
                sense,
                sign: q.rank1_form().map(|r| r.sign).unwrap_or(1.0),
            });
        }
        let cache = EigenCache::new(q.a())?;
        let b_t = cache.rotate(q.b());
        Ok(ConstraintProjector::Spectral { cache, b_t, c: q.c(), sense: q.sense() })
    }

    /// Projects `ζ`; the multiplier refers to the canonical constraint.
    pub fn project(&self, zeta: &CVector, method: RootMethod) -> Result<Qcqp1Solution> {
        match self {
            ConstraintProjector::Rank1 { a, c, sense, sign } => {
                let mut sol = solve_rank1_homogeneous(a, *c, zeta, *sense)?;
                sol.mu *= sign;
                Ok(sol)
            }
            ConstraintProjector::Spectral { cache, b_t, c, sense } => {
                solve_rotated(cache, b_t, *c, zeta, *sense, method)
            }
        }
    }
}
