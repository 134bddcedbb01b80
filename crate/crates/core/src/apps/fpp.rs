//! Feasible point pursuit: the smallest-norm point satisfying a set of
//! (generally indefinite) quadratic inequalities,
//!
//! ```text
//! minimize ‖x‖²   subject to   xᴴAᵢx ≤ cᵢ
//! ```

use crate::admm::{run, SolverConfig};
use crate::error::Result;
use crate::linalg::CVector;
use crate::model::{Field, HermitianMatrix, QcqpProblem, QuadraticConstraint, SolveReport};

#[derive(Debug, Clone, PartialEq)]
pub struct FppInstance {
    pub constraints: Vec<QuadraticConstraint>,
    /// Known feasible point, when the generator embedded one.
    pub x_feas: Option<CVector>,
    pub field: Field,
}

impl FppInstance {
    pub fn n(&self) -> usize {
        self.constraints.first().map_or(0, |q| q.dim())
    }

    /// The problem with objective `‖x‖²`.
    pub fn problem(&self) -> Result<QcqpProblem> {
        let n = self.n();
        QcqpProblem::new(HermitianMatrix::identity(n), CVector::zeros(n), self.constraints.clone(), self.field)
    }
}

/// Two-phase consensus-ADMM: a `ρ`-free search for a feasible point, then
/// norm minimization from it with `cfg.rho`.
pub fn fpp_solve(inst: &FppInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    run(&inst.problem()?, cfg)
}
