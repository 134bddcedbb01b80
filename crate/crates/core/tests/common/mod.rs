//! Reference implementations used as test oracles. Nothing here calls into
//! the solver internals it is checking.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qcqp_admm::linalg::{CMatrix, CVector, C64};
use qcqp_admm::model::ConstraintSense;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn cn_vec<R: Rng>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| cn(rng))
}

pub fn cn_mat<R: Rng>(rng: &mut R, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| cn(rng))
}

pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    cn_mat(rng, n, n).qr().q()
}

/// `Q diag(λ) Qᴴ` with a random unitary `Q`.
pub fn hermitian_with_spectrum<R: Rng>(rng: &mut R, lambda: &[f64]) -> CMatrix {
    let n = lambda.len();
    let q = random_unitary(rng, n);
    let d = CMatrix::from_diagonal(&CVector::from_iterator(n, lambda.iter().map(|&l| C64::new(l, 0.0))));
    let m = &q * d * q.adjoint();
    (&m + m.adjoint()).unscale(2.0)
}

pub fn quad(a: &CMatrix, b: &CVector, z: &CVector) -> f64 {
    z.dotc(&(a * z)).re - 2.0 * b.dotc(z).re
}

// ---------------------------------------------------------------- polynomials
// Coefficients are stored lowest degree first.

pub fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

pub fn poly_add(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len().max(q.len())];
    for (i, a) in p.iter().enumerate() {
        out[i] += a;
    }
    for (i, b) in q.iter().enumerate() {
        out[i] += b;
    }
    out
}

pub fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_deriv(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

/// Secular equation cleared of denominators. With the spectrum grouped into
/// `p` distinct eigenvalues, `φ(μ)·Π_g(1 + μλ_g)² = 0` is a polynomial of
/// degree at most `2p`:
///
/// `Σ_g Σ_{k∈g} [λ_g|ζ̃ₖ + μb̃ₖ|² − 2Re{b̃ₖ*(ζ̃ₖ + μb̃ₖ)}(1 + μλ_g)] Π_{h≠g}(1 + μλ_h)²
///   − c Π_g(1 + μλ_g)²`
pub fn secular_polynomial(lambda: &[f64], zeta_t: &CVector, b_t: &CVector, c: f64) -> Vec<f64> {
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (k, &l) in lambda.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| *g == l) {
            Some((_, idx)) => idx.push(k),
            None => groups.push((l, vec![k])),
        }
    }
    let den = |l: f64| poly_mul(&[1.0, l], &[1.0, l]);
    let mut total = vec![0.0];
    for (gi, (l, idx)) in groups.iter().enumerate() {
        let mut num = vec![0.0];
        for &k in idx {
            let (z, b) = (zeta_t[k], b_t[k]);
            // |ζ + μb|² = |ζ|² + 2μRe{ζ*b} + μ²|b|²
            let sq = [z.norm_sqr(), 2.0 * (z.conj() * b).re, b.norm_sqr()];
            // Re{b*(ζ + μb)} = Re{b*ζ} + μ|b|²
            let lin = [(b.conj() * z).re, b.norm_sqr()];
            let term = poly_add(&sq.map(|v| l * v), &poly_mul(&lin.map(|v| -2.0 * v), &[1.0, *l]));
            num = poly_add(&num, &term);
        }
        for (hi, (h, _)) in groups.iter().enumerate() {
            if hi != gi {
                num = poly_mul(&num, &den(*h));
            }
        }
        total = poly_add(&total, &num);
    }
    let all = groups.iter().fold(vec![1.0], |acc, (l, _)| poly_mul(&acc, &den(*l)));
    poly_add(&total, &all.iter().map(|v| -c * v).collect::<Vec<_>>())
}

/// Real roots from the eigenvalues of the companion matrix, each polished
/// by a few Newton steps on the polynomial itself.
pub fn real_roots(p: &[f64]) -> Vec<f64> {
    let mut p = p.to_vec();
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    while p.len() > 1 && p.last().unwrap().abs() <= 1e-14 * scale {
        p.pop();
    }
    let deg = p.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -p[i] / lead;
    }
    let eig = comp.complex_eigenvalues();
    let dp = poly_deriv(&p);
    eig.iter()
        .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
        .map(|z| {
            let mut x = z.re;
            for _ in 0..5 {
                let d = poly_eval(&dp, x);
                if d == 0.0 {
                    break;
                }
                let next = x - poly_eval(&p, x) / d;
                if !next.is_finite() {
                    break;
                }
                x = next;
            }
            x
        })
        .collect()
}

// ------------------------------------------------------------- QCQP-1 oracle

/// Smallest `‖z − ζ‖²` over points of `{zᴴAz − 2Re{bᴴz} = c}` found on
/// `samples` random lines through `ζ`. Each line meets the quadric in at
/// most two points, found from a scalar quadratic.
pub fn sampled_best_distance<R: Rng>(
    a: &CMatrix,
    b: &CVector,
    c: f64,
    zeta: &CVector,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let n = zeta.len();
    let g = a * zeta - b;
    let f0 = quad(a, b, zeta) - c;
    let mut best = f64::INFINITY;
    let mut d = CVector::zeros(n);
    for _ in 0..samples {
        for k in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            d[k] = C64::new(re, im);
        }
        let dn = d.norm_squared();
        // f(ζ + td) − c = qa t² + 2 qb t + f0
        let qa = d.dotc(&(a * &d)).re;
        let qb = d.dotc(&g).re;
        let disc = qb * qb - qa * f0;
        if disc < 0.0 {
            continue;
        }
        let t = if qa == 0.0 {
            if qb == 0.0 {
                continue;
            }
            (-f0 / (2.0 * qb)).abs()
        } else {
            // smaller-magnitude root, written to avoid cancellation
            let q = -(qb + qb.signum() * disc.sqrt());
            let (t1, t2) = (q / qa, if q != 0.0 { f0 / q } else { f64::INFINITY });
            t1.abs().min(t2.abs())
        };
        best = best.min(t * t * dn);
    }
    best
}

// ---------------------------------------------------- full-state rank-1 ADMM

/// How the mirror engine forms `x`.
#[derive(Debug, Clone)]
pub enum MirrorX {
    Mean,
    /// `(A₀ + mρI)x = b₀ + ρΣ(zᵢ + uᵢ)`
    Objective { a0: CMatrix, b0: CVector, rho: f64 },
    /// Least-squares magnitude fit with penalty `ρ`.
    Gaussian { rho: f64 },
}

/// Consensus ADMM over rank-1 constraints with one explicit `zᵢ` and `uᵢ`
/// per constraint.
pub struct MirrorEngine {
    pub a: Vec<CVector>,
    pub c: Vec<f64>,
    pub senses: Vec<ConstraintSense>,
    pub x: CVector,
    pub z: Vec<CVector>,
    pub u: Vec<CVector>,
}

/// Projection onto `{z : |aᴴz|² (sense) c}` by moving along `a`.
pub fn rank1_projection(a: &CVector, c: f64, sense: ConstraintSense, zeta: &CVector) -> CVector {
    let p = a.dotc(zeta);
    let r = p.norm();
    let r2 = r * r;
    let target = match sense {
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
    };
    match target {
        None => zeta.clone(),
        Some(t) => {
            let phase = if r < 1e-14 { C64::new(1.0, 0.0) } else { p / r };
            zeta + a * (phase * ((t - r) / a.norm_squared()))
        }
    }
}

/// Multiplier of the Gaussian-noise update by bisection on
/// `g(μ) = ρ²d/(ρ + sμ)² − y − μ`, decreasing on `μ ≥ −y` when `ρ > ys`.
pub fn gaussian_multiplier(y: f64, rho: f64, s: f64, d: f64) -> f64 {
    let g = |mu: f64| rho * rho * d / (rho + s * mu).powi(2) - y - mu;
    let mut lo = -y;
    let mut hi = -y + rho * rho * d / (rho - s * y).powi(2) + 1e-300;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl MirrorEngine {
    pub fn new(a_s: &CMatrix, c: Vec<f64>, senses: Vec<ConstraintSense>, x0: CVector) -> Self {
        let m = a_s.ncols();
        let n = a_s.nrows();
        MirrorEngine {
            a: (0..m).map(|i| a_s.column(i).into_owned()).collect(),
            c,
            senses,
            z: vec![x0.clone(); m],
            u: vec![CVector::zeros(n); m],
            x: x0,
        }
    }

    pub fn step(&mut self, mode: &MirrorX) {
        let m = self.a.len();
        let total = self.z.iter().zip(&self.u).fold(CVector::zeros(self.x.len()), |acc, (z, u)| acc + z + u);
        self.x = match mode {
            MirrorX::Mean | MirrorX::Gaussian { .. } => total.unscale(m as f64),
            MirrorX::Objective { a0, b0, rho } => {
                let n = self.x.len();
                let lhs = a0 + CMatrix::identity(n, n) * C64::new(m as f64 * rho, 0.0);
                lhs.lu().solve(&(b0 + total * C64::new(*rho, 0.0))).expect("nonsingular")
            }
        };
        for i in 0..m {
            let zeta = &self.x - &self.u[i];
            let z = match mode {
                MirrorX::Gaussian { rho } => {
                    let a = &self.a[i];
                    let p = a.dotc(&zeta);
                    let s = a.norm_squared();
                    let mu = gaussian_multiplier(self.c[i], *rho, s, p.norm_sqr());
                    &zeta - a * (p * (mu / (rho + mu * s)))
                }
                _ => rank1_projection(&self.a[i], self.c[i], self.senses[i], &zeta),
            };
            self.u[i] = &self.u[i] + &z - &self.x;
            self.z[i] = z;
        }
    }
}

pub fn max_abs_diff(a: &CVector, b: &CVector) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn real_vec(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
