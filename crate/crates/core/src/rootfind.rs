//! Scalar machinery for the single-constraint subproblem.
//!
//! In the eigenbasis of `A = QΛQᴴ` the projection of `ζ` onto
//! `zᴴAz − 2Re{bᴴz} = c` is `z̃ = (I + μΛ)⁻¹(ζ̃ + μb̃)`, where the multiplier
//! `μ` is the root of the secular function
//!
//! ```text
//! φ(μ) = Σₖ λₖ |(ζ̃ₖ + μb̃ₖ)/(1 + μλₖ)|² − 2Re Σₖ b̃ₖ*(ζ̃ₖ + μb̃ₖ)/(1 + μλₖ) − c
//! ```
//!
//! on the interval where `I + μΛ ⪰ 0`. There `φ` is strictly decreasing, so
//! the root is unique.

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

/// Smallest admissible `|1 + μλₖ|` for a direct evaluation of `φ`.
pub const POLE_TOL: f64 = 1e-14;

pub const DEFAULT_BISECTION_TOL: f64 = 1e-12;
pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;
pub const NEWTON_MAX_ITER: usize = 100;
/// Doublings tried when one side of the multiplier interval is unbounded.
pub const MAX_EXPANSIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootMethod {
    #[default]
    Bisection,
    Newton,
}

impl std::str::FromStr for RootMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bisection" => Ok(RootMethod::Bisection),
            "newton" => Ok(RootMethod::Newton),
            other => Err(Error::InvalidInput(format!("unknown root method '{other}'"))),
        }
    }
}

/// One constraint expressed in the eigenbasis of its matrix, together with
/// the rotated point `ζ̃ = Qᴴζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConstraint {
    lambda: Vec<f64>,
    zeta_t: CVector,
    b_t: CVector,
    c: f64,
}

impl SpectralConstraint {
    pub fn new(lambda: Vec<f64>, zeta_t: CVector, b_t: CVector, c: f64) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidInput("empty spectrum".into()));
        }
        if zeta_t.len() != lambda.len() {
            return Err(Error::DimensionMismatch { expected: lambda.len(), got: zeta_t.len() });
        }
        if b_t.len() != lambda.len() {
            return Err(Error::DimensionMismatch { expected: lambda.len(), got: b_t.len() });
        }
        if lambda.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidInput("eigenvalues must be sorted ascending".into()));
        }
        Ok(SpectralConstraint { lambda, zeta_t, b_t, c })
    }

    /// Homogeneous case `b = 0`.
    pub fn homogeneous(lambda: Vec<f64>, zeta_t: CVector, c: f64) -> Result<Self> {
        let n = zeta_t.len();
        Self::new(lambda, zeta_t, CVector::zeros(n), c)
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn zeta_t(&self) -> &CVector {
        &self.zeta_t
    }

    pub fn b_t(&self) -> &CVector {
        &self.b_t
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Same data with a different right-hand side.
    pub fn with_rhs(&self, c: f64) -> Self {
        SpectralConstraint { c, ..self.clone() }
    }

    pub fn interval(&self) -> (f64, f64) {
        feasible_interval(&self.lambda)
    }

    fn check_poles(&self, mu: f64) -> Result<()> {
        if self.lambda.iter().any(|&l| (1.0 + mu * l).abs() < POLE_TOL) {
            return Err(Error::Pole { mu });
        }
        Ok(())
    }

    /// `φ(μ)` without the pole check.
    pub(crate) fn phi_raw(&self, mu: f64) -> f64 {
        let mut quad = 0.0;
        let mut lin = 0.0;
        for k in 0..self.lambda.len() {
            let l = self.lambda[k];
            let b = self.b_t[k];
            let w = (self.zeta_t[k] + b * mu) / (1.0 + mu * l);
            quad += l * w.norm_sqr();
            lin += (b.conj() * w).re;
        }
        quad - 2.0 * lin - self.c
    }

    pub(crate) fn phi_prime_raw(&self, mu: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.lambda.len() {
            let l = self.lambda[k];
            let num = (self.b_t[k] - self.zeta_t[k] * l).norm_sqr();
            if num != 0.0 {
                acc += num / (1.0 + mu * l).powi(3);
            }
        }
        -2.0 * acc
    }

    /// `z̃ = (I + μΛ)⁻¹(ζ̃ + μb̃)`.
    pub fn solution_at(&self, mu: f64) -> CVector {
        CVector::from_fn(self.lambda.len(), |k, _| {
            (self.zeta_t[k] + self.b_t[k] * mu) / (1.0 + mu * self.lambda[k])
        })
    }
}

pub fn phi(sc: &SpectralConstraint, mu: f64) -> Result<f64> {
    sc.check_poles(mu)?;
    Ok(sc.phi_raw(mu))
}

/// `φ′(μ) = −2 Σₖ |b̃ₖ − λₖζ̃ₖ|² / (1 + μλₖ)³`
pub fn phi_prime(sc: &SpectralConstraint, mu: f64) -> Result<f64> {
    sc.check_poles(mu)?;
    Ok(sc.phi_prime_raw(mu))
}

/// Multipliers with `I + μΛ ⪰ 0`: `(−1/λ_max, −1/λ_min)`, with an infinite
/// end when `λ_max ≤ 0` or `λ_min ≥ 0`. Expects ascending `lambda`.
pub fn feasible_interval(lambda: &[f64]) -> (f64, f64) {
    let lmin = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let lmax = lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = if lmax > 0.0 { -1.0 / lmax } else { f64::NEG_INFINITY };
    let hi = if lmin < 0.0 { -1.0 / lmin } else { f64::INFINITY };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOutcome {
    pub mu: f64,
    pub iterations: usize,
    /// Newton did not meet its criterion and the bisection result was used.
    pub fell_back: bool,
}

/// Brackets the root of `φ`, replacing an unbounded side of the interval by
/// doubling outward from ±1 until `φ` changes sign.
fn bracket(sc: &SpectralConstraint) -> Result<(f64, f64)> {
    let (lo, hi) = sc.interval();
    let lower = if lo.is_finite() {
        lo
    } else {
        let mut t = -1.0;
        let mut k = 0;
        while sc.phi_raw(t) < 0.0 {
            k += 1;
            if k > MAX_EXPANSIONS {
                return Err(Error::InfeasibleConstraint(
                    "secular function stays negative on the whole multiplier interval".into(),
                ));
            }
            t *= 2.0;
        }
        t
    };
    let upper = if hi.is_finite() {
        hi
    } else {
        let mut t = 1.0;
        let mut k = 0;
        while sc.phi_raw(t) > 0.0 {
            k += 1;
            if k > MAX_EXPANSIONS {
                return Err(Error::InfeasibleConstraint(
                    "secular function stays positive on the whole multiplier interval".into(),
                ));
            }
            t *= 2.0;
        }
        t
    };
    Ok((lower, upper))
}

/// Sign of `φ` at an interior point; a non-finite value (a midpoint that
/// rounded onto a pole) is resolved by which end it sits at.
fn phi_sign_value(sc: &SpectralConstraint, mu: f64, lower: f64, upper: f64) -> f64 {
    let v = sc.phi_raw(mu);
    if v.is_nan() {
        if (mu - lower).abs() < (upper - mu).abs() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    } else {
        v
    }
}

/// Bisection on the multiplier interval until the bracket is narrower than
/// `eps` (or stops shrinking in floating point).
pub fn solve_phi_bisection(sc: &SpectralConstraint, eps: f64) -> Result<RootOutcome> {
    let (mut lower, mut upper) = bracket(sc)?;
    let mut it = 0;
    while upper - lower >= eps && it < BISECTION_MAX_ITER {
        let mid = 0.5 * (lower + upper);
        if mid <= lower || mid >= upper {
            break;
        }
        it += 1;
        let v = phi_sign_value(sc, mid, lower, upper);
        if v == 0.0 {
            return Ok(RootOutcome { mu: mid, iterations: it, fell_back: false });
        }
        if v > 0.0 {
            lower = mid;
        } else {
            upper = mid;
        }
    }
    Ok(RootOutcome { mu: 0.5 * (lower + upper), iterations: it, fell_back: false })
}

fn newton_start(lo: f64, hi: f64, lambda: &[f64]) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let lmin = lambda[0];
            let lmax = lambda[lambda.len() - 1];
            -(lmin + lmax) / (2.0 * lmin * lmax)
        }
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

/// Safeguarded Newton iteration. Steps leaving the multiplier interval are
/// replaced by the midpoint toward the violated end; if the merit
/// `φ(μ)²/|φ′(μ)|` does not drop below `eps` within [`NEWTON_MAX_ITER`]
/// steps the bisection result is returned with `fell_back` set.
pub fn solve_phi_newton(sc: &SpectralConstraint, eps: f64) -> Result<RootOutcome> {
    let (lo, hi) = sc.interval();
    let mut mu = newton_start(lo, hi, &sc.lambda);
    let clamp = |mu: f64, next: f64| -> f64 {
        if !next.is_finite() {
            return f64::NAN;
        }
        if next >= hi {
            0.5 * (mu + hi)
        } else if next <= lo {
            0.5 * (mu + lo)
        } else {
            next
        }
    };
    for it in 0..NEWTON_MAX_ITER {
        let f = sc.phi_raw(mu);
        let fp = sc.phi_prime_raw(mu);
        if f == 0.0 {
            return Ok(RootOutcome { mu, iterations: it, fell_back: false });
        }
        if !f.is_finite() || !fp.is_finite() || fp >= 0.0 {
            break;
        }
        if f * f / fp.abs() < eps {
            // The merit is quadratic in the error; one more step brings the
            // multiplier itself to full precision.
            let polished = clamp(mu, mu - f / fp);
            if polished.is_finite() && sc.phi_raw(polished).abs() <= f.abs() {
                mu = polished;
            }
            return Ok(RootOutcome { mu, iterations: it + 1, fell_back: false });
        }
        let next = clamp(mu, mu - f / fp);
        if !next.is_finite() {
            break;
        }
        mu = next;
    }
    let mut out = solve_phi_bisection(sc, DEFAULT_BISECTION_TOL)?;
    out.fell_back = true;
    Ok(out)
}

pub fn solve_phi(sc: &SpectralConstraint, method: RootMethod) -> Result<RootOutcome> {
    match method {
        RootMethod::Bisection => solve_phi_bisection(sc, DEFAULT_BISECTION_TOL),
        RootMethod::Newton => solve_phi_newton(sc, DEFAULT_NEWTON_TOL),
    }
}

/// A multiplier sitting on a singular point of `I + μΛ` where the
/// secular function stays finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularMultiplier {
    pub mu: f64,
    /// Indices `k` with `1 + μλₖ = 0`.
    pub free: Vec<usize>,
    /// Required `Σ_{k∈free} |z̃ₖ − ζ̃ₖ|²` to meet the constraint.
    pub offset_sq: f64,
}

/// Checks the (at most two) singular multipliers `−1/λ_max`, `−1/λ_min`.
///
/// At such a `μ` the secular function is finite only when `b̃ₖ = λₖζ̃ₖ` on
/// the whole null space of `I + μΛ`; the components there are then free and
/// the constraint is met by moving them a fixed distance. Returns the
/// candidate when that distance is real, i.e. when no root exists strictly
/// inside the interval.
pub fn singular_multiplier(sc: &SpectralConstraint) -> Option<SingularMultiplier> {
    let (lo, hi) = sc.interval();
    let scale = sc
        .lambda
        .iter()
        .zip(sc.zeta_t.iter().zip(sc.b_t.iter()))
        .map(|(l, (z, b))| l.abs() * z.norm() + b.norm())
        .fold(1.0, f64::max);
    let candidates = [(lo, 1.0), (hi, -1.0)];
    for (mu, orient) in candidates {
        if !mu.is_finite() {
            continue;
        }
        let lam_pole = -1.0 / mu;
        let free: Vec<usize> = (0..sc.lambda.len())
            .filter(|&k| (1.0 + mu * sc.lambda[k]).abs() <= 1e-12)
            .collect();
        let consistent = free
            .iter()
            .all(|&k| (sc.b_t[k] - sc.zeta_t[k] * sc.lambda[k]).norm() <= 1e-13 * scale);
        if free.is_empty() || !consistent {
            continue;
        }
        // φ at the pole with the free components held at ζ̃ₖ
        let mut quad = 0.0;
        let mut lin = 0.0;
        for k in 0..sc.lambda.len() {
            let w: C64 = if free.contains(&k) {
                sc.zeta_t[k]
            } else {
                (sc.zeta_t[k] + sc.b_t[k] * mu) / (1.0 + mu * sc.lambda[k])
            };
            quad += sc.lambda[k] * w.norm_sqr();
            lin += (sc.b_t[k].conj() * w).re;
        }
        let limit = quad - 2.0 * lin - sc.c;
        // lower end needs φ ≤ 0 there, upper end φ ≥ 0
        if orient * limit <= 0.0 {
            return Some(SingularMultiplier { mu, free, offset_sq: -limit / lam_pole });
        }
    }
    None
}

/// Inputs of the Gaussian-noise multiplier equation
/// `ρ²d / (ρ + ‖a‖²μ)² = y + μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicInputs {
    pub y: f64,
    pub rho: f64,
    /// `‖a‖²`
    pub a_norm_sq: f64,
    /// `|aᴴ(x − u)|²`
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoot {
    pub mu: f64,
    pub delta0: f64,
    pub delta1: f64,
    /// `Δ₁² − 4Δ₀³`; positive means one real and two complex roots.
    pub discriminant: f64,
}

/// Coefficients `(γ₃, γ₂, γ₁, γ₀)` of the cleared cubic.
pub fn cubic_coefficients(inp: &CubicInputs) -> [f64; 4] {
    let s = inp.a_norm_sq;
    let (y, rho, d) = (inp.y, inp.rho, inp.d);
    [s * s, 2.0 * rho * s + y * s * s, 2.0 * y * rho * s + rho * rho, rho * rho * (y - d)]
}

/// Unique real root of the multiplier cubic via the closed-form (Cardano)
/// expression, followed by Newton polishing on the cubic.
pub fn solve_cubic_mu(inp: &CubicInputs) -> Result<CubicRoot> {
    let CubicInputs { y, rho, a_norm_sq: s, d } = *inp;
    if !(rho > 0.0 && s > 0.0 && d >= 0.0 && y.is_finite() && d.is_finite()) {
        return Err(Error::Config(format!("invalid cubic inputs {inp:?}")));
    }
    if !(rho > y * s) {
        return Err(Error::Config(format!(
            "rho = {rho} must exceed y·‖a‖² = {} for a unique real multiplier",
            y * s
        )));
    }
    let [g3, g2, g1, g0] = cubic_coefficients(inp);
    // Δ₀ = (ρ‖a‖² − y‖a‖⁴)², Δ₁ = −2(ρ‖a‖² − y‖a‖⁴)³ − 27ρ²‖a‖⁸d, written to
    // avoid cancellation.
    let p = rho * s - y * s * s;
    let x = 27.0 * rho * rho * s.powi(4) * d;
    let delta0 = p * p;
    let delta1 = -2.0 * p.powi(3) - x;
    let discriminant = x * (x + 4.0 * p.powi(3));

    let mut mu = if d == 0.0 {
        -y
    } else {
        // both signs of the square root give a valid C; match Δ₁'s sign
        let c3 = 0.5 * (delta1 - discriminant.sqrt());
        let c = c3.cbrt();
        -(g2 + c + delta0 / c) / (3.0 * g3)
    };
    for _ in 0..3 {
        let f = ((g3 * mu + g2) * mu + g1) * mu + g0;
        let fp = (3.0 * g3 * mu + 2.0 * g2) * mu + g1;
        if fp == 0.0 || f == 0.0 {
            break;
        }
        let next = mu - f / fp;
        if !next.is_finite() {
            break;
        }
        mu = next;
    }
    // the cubic's coefficients mix scales badly when d is tiny or huge;
    // finish on the rational form, which is monotone for μ > −ρ/‖a‖²
    let g = |mu: f64| rho * rho * d / (rho + s * mu).powi(2) - y - mu;
    let mut gm = g(mu);
    for _ in 0..4 {
        let w = rho + s * mu;
        let gp = -2.0 * s * rho * rho * d / w.powi(3) - 1.0;
        let next = mu - gm / gp;
        let gn = g(next);
        if !(next.is_finite() && gn.abs() < gm.abs()) {
            break;
        }
        mu = next;
        gm = gn;
    }
    Ok(CubicRoot { mu, delta0, delta1, discriminant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;

    fn rv(v: &[f64]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&x| real(x)))
    }

    #[test]
    fn phi_at_origin_is_norm_minus_c() {
        let sc = SpectralConstraint::homogeneous(vec![1.0, 1.0], rv(&[1.0, 1.0]), 1.0).unwrap();
        assert_eq!(phi(&sc, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn phi_spherical_root() {
        let sc = SpectralConstraint::homogeneous(vec![1.0, 1.0], rv(&[2.0, 0.0]), 1.0).unwrap();
        assert_eq!(phi(&sc, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn phi_pole_is_reported() {
        let sc = SpectralConstraint::homogeneous(vec![-1.0, 2.0], rv(&[1.0, 1.0]), 1.0).unwrap();
        assert!(matches!(phi(&sc, 1.0), Err(Error::Pole { .. })));
        assert!(matches!(phi_prime(&sc, -0.5), Err(Error::Pole { .. })));
    }

    #[test]
    fn phi_prime_examples() {
        let sc = SpectralConstraint::homogeneous(vec![1.0, 1.0], rv(&[1.0, 1.0]), 1.0).unwrap();
        assert_eq!(phi_prime(&sc, 0.0).unwrap(), -4.0);
        // b̃ₖ = λₖζ̃ₖ makes every numerator vanish
        let lam = vec![-1.0, 3.0];
        let z = rv(&[0.5, -2.0]);
        let b = CVector::from_fn(2, |k, _| z[k] * lam[k]);
        let sc = SpectralConstraint::new(lam, z, b, 0.2).unwrap();
        assert_eq!(phi_prime(&sc, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn interval_examples() {
        let (lo, hi) = feasible_interval(&[-2.0, 3.0]);
        assert_eq!((lo, hi), (-1.0 / 3.0, 0.5));
        assert_eq!(feasible_interval(&[1.0, 2.0]), (-0.5, f64::INFINITY));
        assert_eq!(feasible_interval(&[-3.0, -1.0]), (f64::NEG_INFINITY, 1.0 / 3.0));
    }

    #[test]
    fn unsorted_spectrum_rejected() {
        assert!(SpectralConstraint::homogeneous(vec![2.0, 1.0], rv(&[1.0, 1.0]), 1.0).is_err());
    }

    #[test]
    fn bisection_spherical_closed_form() {
        let sc = SpectralConstraint::homogeneous(vec![1.0, 1.0], rv(&[2.0, 0.0]), 1.0).unwrap();
        let r = solve_phi_bisection(&sc, 1e-12).unwrap();
        assert!((r.mu - 1.0).abs() <= 1e-12, "{}", r.mu);
    }

    #[test]
    fn bisection_root_at_origin() {
        let sc = SpectralConstraint::homogeneous(vec![1.0, 1.0], rv(&[1.0, 0.0]), 1.0).unwrap();
        let r = solve_phi_bisection(&sc, 1e-12).unwrap();
        assert!(r.mu.abs() <= 1e-12);
    }

    #[test]
    fn bisection_reports_empty_constraint() {
        // Λ ⪰ 0 with c < 0: zᴴΛz = c has no solution
        let sc = SpectralConstraint::homogeneous(vec![1.0, 2.0], rv(&[1.0, 1.0]), -1.0).unwrap();
        assert!(matches!(solve_phi_bisection(&sc, 1e-12), Err(Error::InfeasibleConstraint(_))));
    }

    #[test]
    fn newton_spherical_closed_form() {
        let sc = SpectralConstraint::homogeneous(vec![1.0, 1.0], rv(&[2.0, 0.0]), 1.0).unwrap();
        let r = solve_phi_newton(&sc, 1e-12).unwrap();
        assert!((r.mu - 1.0).abs() <= 1e-12);
        assert!(r.iterations <= 8, "{}", r.iterations);
        assert!(!r.fell_back);
    }

    #[test]
    fn newton_starting_at_root_returns_immediately() {
        // λ = (−1, 1): the start −(λmin+λmax)/(2λminλmax) is 0 and φ(0) = 0
        let sc = SpectralConstraint::homogeneous(vec![-1.0, 1.0], rv(&[1.0, 2.0]), 3.0).unwrap();
        assert_eq!(phi(&sc, 0.0).unwrap(), 0.0);
        let r = solve_phi_newton(&sc, 1e-12).unwrap();
        assert_eq!(r.mu, 0.0);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn singular_multiplier_detected() {
        // λ = (1, 2), ζ̃ = (1, 0), b = 0: the λ=2 component is zero, so μ = −1/2 is
        // singular-but-finite; c large enough puts the solution there.
        let sc = SpectralConstraint::homogeneous(vec![1.0, 2.0], rv(&[1.0, 0.0]), 10.0).unwrap();
        let s = singular_multiplier(&sc);
        // φ(−1/2) = 1/(1/2)² − 10 = −6 ≤ 0 at the lower end → pole case
        let s = s.expect("pole case");
        assert_eq!(s.mu, -0.5);
        assert_eq!(s.free, vec![1]);
        assert!((s.offset_sq - 3.0).abs() < 1e-12);
        // generic data never triggers it
        let sc = SpectralConstraint::homogeneous(vec![1.0, 2.0], rv(&[1.0, 0.3]), 10.0).unwrap();
        assert!(singular_multiplier(&sc).is_none());
    }

    #[test]
    fn cubic_consistent_measurement_gives_zero() {
        let r = solve_cubic_mu(&CubicInputs { y: 2.0, rho: 5.0, a_norm_sq: 1.5, d: 2.0 }).unwrap();
        assert!(r.mu.abs() < 1e-14, "{}", r.mu);
    }

    #[test]
    fn cubic_y_zero_back_substitution() {
        let r = solve_cubic_mu(&CubicInputs { y: 0.0, rho: 1.0, a_norm_sq: 1.0, d: 1.0 }).unwrap();
        // μ(1 + μ)² = 1
        assert!((r.mu * (1.0 + r.mu).powi(2) - 1.0).abs() < 1e-14);
        let lhs = 1.0 / (1.0 + r.mu).powi(2);
        assert!((lhs - r.mu).abs() < 1e-14);
        assert!(r.discriminant > 0.0);
    }

    #[test]
    fn cubic_rejects_small_rho() {
        let e = solve_cubic_mu(&CubicInputs { y: 1.0, rho: 1.0, a_norm_sq: 1.0, d: 1.0 });
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn cubic_closed_forms_match_generic_definitions() {
        let inp = CubicInputs { y: 0.7, rho: 3.1, a_norm_sq: 1.9, d: 2.3 };
        let r = solve_cubic_mu(&inp).unwrap();
        let [g3, g2, g1, g0] = cubic_coefficients(&inp);
        let d0 = g2 * g2 - 3.0 * g3 * g1;
        let d1 = 2.0 * g2.powi(3) - 9.0 * g3 * g2 * g1 + 27.0 * g3 * g3 * g0;
        assert!((d0 - r.delta0).abs() <= 1e-10 * d0.abs());
        assert!((d1 - r.delta1).abs() <= 1e-10 * d1.abs());
    }
}
