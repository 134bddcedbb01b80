//! Dense complex linear-algebra aliases and small helpers shared by the
//! solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::model::Field;

pub type C64 = Complex<f64>;
pub type CVector = DVector<C64>;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Draws one sample of CN(0, 1) (unit total variance), or N(0, 1) on the
/// real field.
pub fn normal_scalar<R: Rng + ?Sized>(rng: &mut R, field: Field) -> C64 {
    match field {
        Field::Real => real(rng.sample(StandardNormal)),
        Field::Complex => {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        }
    }
}

pub fn normal_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, field: Field) -> CVector {
    CVector::from_fn(n, |_, _| normal_scalar(rng, field))
}

pub fn normal_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    field: Field,
) -> CMatrix {
    // column-major fill so a matrix and its columns drawn one by one agree
    CMatrix::from_fn(rows, cols, |_, _| normal_scalar(rng, field))
}

#[inline]
pub fn norm_sq(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `aᴴb`
#[inline]
pub fn inner(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// Sum of equally sized vectors over a fixed-shape binary tree. The result is
/// a function of the input order only, not of how the leaves were computed.
pub fn pairwise_sum(vs: &[CVector], n: usize) -> CVector {
    match vs.len() {
        0 => CVector::zeros(n),
        1 => vs[0].clone(),
        len => {
            let mid = len / 2;
            pairwise_sum(&vs[..mid], n) + pairwise_sum(&vs[mid..], n)
        }
    }
}

pub fn all_finite(v: &CVector) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Flattens to `[re, im]` pairs.
pub fn to_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn from_pairs(p: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(p.len(), p.iter().map(|&[re, im]| C64::new(re, im)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pairwise_sum_matches_sequential_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vs: Vec<CVector> = (0..7).map(|_| normal_vector(&mut rng, 3, Field::Complex)).collect();
        let seq = vs.iter().fold(CVector::zeros(3), |acc, v| acc + v);
        assert!((pairwise_sum(&vs, 3) - seq).norm() < 1e-14);
        assert_eq!(pairwise_sum(&[], 2), CVector::zeros(2));
    }

    #[test]
    fn real_field_draws_have_no_imaginary_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = normal_vector(&mut rng, 16, Field::Real);
        assert!(v.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn complex_normal_has_unit_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = normal_vector(&mut rng, 20000, Field::Complex);
        let var = norm_sq(&v) / 20000.0;
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }
}
