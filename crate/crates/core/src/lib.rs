//! Consensus-ADMM for general non-convex quadratically constrained quadratic
//! programs (QCQPs).
//!
//! A QCQP
//!
//! ```text
//! minimize    xᴴA₀x − 2Re{b₀ᴴx}
//! subject to  xᴴAᵢx − 2Re{bᵢᴴx} ≤ cᵢ   (or =, ≥, two-sided),  i = 1..m
//! ```
//!
//! is rewritten in consensus form with one local copy `zᵢ` of `x` per
//! constraint. Every ADMM `zᵢ`-update is then a single-constraint QCQP
//! (a projection onto one quadric), which is solved exactly:
//!
//! * [`rootfind`] holds the secular equation `φ(μ) = 0` for the multiplier,
//!   bisection/Newton solvers and the closed-form cubic used by the
//!   Gaussian-noise phase-retrieval update.
//! * [`qcqp1`] solves the single-constraint projection for rank-1 and general
//!   constraints, including two-sided bounds.
//! * [`admm`] is the full-state engine with the two-phase
//!   (feasibility, then optimization) driver.
//! * [`rank1`] is the `O(m + n)` memory engine for families of rank-1
//!   constraints `|aᵢᴴx|² {≤,=,≥} cᵢ`.
//! * [`apps`] contains feasible point pursuit, multicast beamforming and
//!   phase retrieval drivers plus instance generators.

pub mod admm;
pub mod apps;
pub mod error;
pub mod instance;
pub mod linalg;
pub mod model;
pub mod qcqp1;
pub mod rank1;
pub mod rootfind;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use model::{
    ConstraintSense, Field, HermitianMatrix, QcqpProblem, QuadraticConstraint, SolveReport,
};
