//! Application drivers: feasible point pursuit, multicast beamforming and
//! phase retrieval, with the random instance generators used to test them.

pub mod beamforming;
pub mod fpp;
pub mod generate;
pub mod metrics;
pub mod phase_retrieval;

pub use beamforming::{mb_secondary, mb_single_group, BeamformingInstance};
pub use fpp::{fpp_solve, FppInstance};
pub use generate::{gen_instance, GenSpec, Instance};
pub use metrics::{metric_mse, TrialRecord};
pub use phase_retrieval::{pr_solve, spectral_init, NoiseModel, PhaseRetrievalInstance, PrInit};
