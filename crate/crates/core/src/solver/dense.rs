use super::{finish, singular, Factored, Method, SolveResult, SolverError};
use crate::assembly::AssembledSystem;
use crate::linalg::DenseLu;
use crate::sparse::SparseMatrix;

/// Pivots below this fraction of the largest entry mark a singular matrix.
const PIVOT_TOLERANCE: f64 = 1e-14;

pub(super) struct DenseFactor {
    lu: DenseLu,
}

impl DenseFactor {
    pub(super) fn new(sys: &AssembledSystem, m: &SparseMatrix) -> Result<Self, SolverError> {
        let lu = DenseLu::new(&m.to_dense());
        if !(lu.pivot_ratio >= PIVOT_TOLERANCE) {
            return Err(singular(sys, format!("pivot ratio {:e}", lu.pivot_ratio)));
        }
        Ok(DenseFactor { lu })
    }

    pub(super) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.lu.solve(rhs)
    }

    pub(super) fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        self.lu.solve_transpose(rhs)
    }
}

/// LU with partial pivoting on the dense system.
pub fn solve_dense(sys: &AssembledSystem) -> Result<SolveResult, SolverError> {
    let f = Factored::new(sys, Method::Dense)?;
    finish(sys, sys.rhs(), f.solve_vec(sys.rhs()), f.condition_estimate())
}
