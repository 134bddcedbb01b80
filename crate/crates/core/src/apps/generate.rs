//! Random test instances.
//!
//! * Feasible point pursuit: `Aᵢ = (G + Gᴴ)/2` with `G` i.i.d. `CN(0, 1)`,
//!   `cᵢ = x_feasᴴAᵢx_feas + |vᵢ|`, `vᵢ ~ N(0, 1)`, so `x_feas` is strictly
//!   feasible.
//! * Beamforming: channels i.i.d. `CN(0, I)`.
//! * Phase retrieval: `s`, `aᵢ` i.i.d. `CN(0, I)`, `yᵢ = |aᵢᴴs|²`, then
//!   rounded to integers (quantized) or perturbed by white Gaussian noise at
//!   a given SNR `10·log₁₀(‖y‖²/‖w‖²)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::apps::beamforming::BeamformingInstance;
use crate::apps::fpp::FppInstance;
use crate::apps::phase_retrieval::{NoiseModel, PhaseRetrievalInstance};
use crate::error::{Error, Result};
use crate::linalg::{normal_matrix, normal_vector};
use crate::model::{ConstraintSense, Field, HermitianMatrix, QcqpProblem, QuadraticConstraint};

/// Half-width of the band around a rounded measurement.
pub const QUANTIZATION_EPS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrNoise {
    Noiseless,
    /// Nearest-integer rounding.
    Quantized,
    Gaussian { snr_db: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenSpec {
    Fpp { n: usize, m: usize, field: Field },
    Beamforming { n: usize, m: usize, l: usize, tau: f64, eta: f64 },
    PhaseRetrieval { n: usize, m: usize, noise: PrNoise },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Generic(QcqpProblem),
    Fpp(FppInstance),
    Beamforming(BeamformingInstance),
    PhaseRetrieval(PhaseRetrievalInstance),
}

impl Instance {
    pub fn n(&self) -> usize {
        match self {
            Instance::Generic(p) => p.n(),
            Instance::Fpp(f) => f.n(),
            Instance::Beamforming(b) => b.n(),
            Instance::PhaseRetrieval(p) => p.n(),
        }
    }

    /// Number of constraints.
    pub fn m(&self) -> usize {
        match self {
            Instance::Generic(p) => p.m(),
            Instance::Fpp(f) => f.constraints.len(),
            Instance::Beamforming(b) => b.h_s.ncols() + b.l(),
            Instance::PhaseRetrieval(p) => p.m(),
        }
    }
}

pub fn gen_fpp(n: usize, m: usize, field: Field, seed: u64) -> Result<FppInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_feas = normal_vector(&mut rng, n, field);
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let a = HermitianMatrix::new(normal_matrix(&mut rng, n, n, field))?;
        let v: f64 = StandardNormal.sample(&mut rng);
        let c = a.quad_form(&x_feas) + v.abs();
        constraints.push(QuadraticConstraint::new(a, crate::linalg::CVector::zeros(n), c, ConstraintSense::LessEqual)?);
    }
    Ok(FppInstance { constraints, x_feas: Some(x_feas), field })
}

pub fn gen_beamforming(n: usize, m: usize, l: usize, tau: f64, eta: f64, seed: u64) -> BeamformingInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h_s = normal_matrix(&mut rng, n, m, Field::Complex);
    let g_s = (l > 0).then(|| normal_matrix(&mut rng, n, l, Field::Complex));
    BeamformingInstance { h_s, g_s, tau, eta }
}

pub fn gen_phase_retrieval(n: usize, m: usize, noise: PrNoise, seed: u64) -> PhaseRetrievalInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = normal_vector(&mut rng, n, Field::Complex);
    let a_s = normal_matrix(&mut rng, n, m, Field::Complex);
    let clean: Vec<f64> = a_s.ad_mul(&s).iter().map(|v| v.norm_sqr()).collect();
    let (y, model) = match noise {
        PrNoise::Noiseless => (clean, NoiseModel::Noiseless),
        PrNoise::Quantized => (clean.iter().map(|v| v.round()).collect(), NoiseModel::Bounded(QUANTIZATION_EPS)),
        PrNoise::Gaussian { snr_db } => {
            let energy: f64 = clean.iter().map(|v| v * v).sum();
            let sigma = (energy / (m as f64 * 10f64.powf(snr_db / 10.0))).sqrt();
            let y = clean
                .iter()
                .map(|v| {
                    let w: f64 = StandardNormal.sample(&mut rng);
                    v + sigma * w
                })
                .collect();
            (y, NoiseModel::Gaussian(sigma))
        }
    };
    PhaseRetrievalInstance { a_s, y, noise: model, truth: Some(s) }
}

/// Deterministic in `seed`.
pub fn gen_instance(spec: &GenSpec, seed: u64) -> Result<Instance> {
    match *spec {
        GenSpec::Fpp { n, m, field } => {
            check_sizes(n, m)?;
            Ok(Instance::Fpp(gen_fpp(n, m, field, seed)?))
        }
        GenSpec::Beamforming { n, m, l, tau, eta } => {
            check_sizes(n, m)?;
            if !(tau > 0.0) || !(eta >= 0.0) {
                return Err(Error::InvalidInput(format!("need tau > 0 and eta >= 0, got {tau}, {eta}")));
            }
            Ok(Instance::Beamforming(gen_beamforming(n, m, l, tau, eta, seed)))
        }
        GenSpec::PhaseRetrieval { n, m, noise } => {
            check_sizes(n, m)?;
            Ok(Instance::PhaseRetrieval(gen_phase_retrieval(n, m, noise, seed)))
        }
    }
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput(format!("sizes must be positive, got n={n}, m={m}")));
    }
    Ok(())
}
