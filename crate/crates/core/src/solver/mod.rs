//! Solving assembled tau systems.
//!
//! Small systems are factored densely. Larger ones go through block
//! elimination: tau columns with a single nonzero are peeled off and
//! recovered afterwards, the principal interior block is factored sparsely
//! and the remaining coupling is handled by a dense Schur complement.

mod block;
mod dense;
mod eig;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::assembly::{AssembledSystem, AssemblyError, ColKind};
use crate::tensor::CoeffTensor;

pub use block::{solve_block, solve_schur_2d, SchurReport};
pub use dense::solve_dense;
pub use eig::{solve_eig, Spectrum, INFINITE_CUTOFF};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("singular system ({}): {reason}", if *.structural { "structural" } else { "numerical" })]
    Singular { structural: bool, reason: String },
    #[error("residual {residual:e} exceeds the acceptance bound {bound:e}")]
    Residual { residual: f64, bound: f64 },
    #[error("{0}")]
    Precondition(String),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

/// Solution coefficients, tau values and diagnostics of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub u: CoeffTensor,
    pub taus: BTreeMap<ColKind, f64>,
    /// `‖M x - r‖_∞`, recomputed from the assembled matrix.
    pub residual_norm: f64,
    /// One-norm condition estimate of the full system.
    pub condition_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Dense up to [`DENSE_LIMIT`] unknowns (or whenever block elimination
    /// does not apply), block elimination above.
    #[default]
    Auto,
    Dense,
    Block,
}

/// Largest system the automatic choice factors densely.
pub const DENSE_LIMIT: usize = 2500;

/// Estimated condition numbers at or above this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e15;

/// A factored system, reusable across right-hand sides.
///
/// Rows and columns are equilibrated first (boundary and interface rows
/// carry high derivatives and dwarf the tau entries); the factorization,
/// pivot checks and condition estimate all refer to the equilibrated
/// matrix `R M C`.
pub struct Factored {
    inner: Inner,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    norm_one: f64,
    condition_estimate: f64,
}

enum Inner {
    Dense(dense::DenseFactor),
    Block(Box<block::BlockFactor>),
}

impl Factored {
    pub fn new(sys: &AssembledSystem, method: Method) -> Result<Self, SolverError> {
        let (row_scale, col_scale) = sys.matrix().equilibration();
        let m = sys.matrix().scaled(&row_scale, &col_scale);
        let inner = match method {
            Method::Dense => Inner::Dense(dense::DenseFactor::new(sys, &m)?),
            Method::Block => Inner::Block(Box::new(block::BlockFactor::new(sys, &m)?)),
            Method::Auto => {
                if sys.size() <= DENSE_LIMIT {
                    Inner::Dense(dense::DenseFactor::new(sys, &m)?)
                } else {
                    match block::BlockFactor::new(sys, &m) {
                        Ok(f) => Inner::Block(Box::new(f)),
                        Err(SolverError::Precondition(_)) => Inner::Dense(dense::DenseFactor::new(sys, &m)?),
                        Err(e) => return Err(e),
                    }
                }
            }
        };
        let norm_one = m.norm_one();
        let mut f = Factored { inner, row_scale, col_scale, norm_one, condition_estimate: f64::NAN };
        f.condition_estimate = f.estimate_condition(sys.size());
        if !(f.condition_estimate < SINGULAR_CONDITION) {
            return Err(singular(sys, format!("condition estimate {:e}", f.condition_estimate)));
        }
        Ok(f)
    }

    pub fn method(&self) -> Method {
        match self.inner {
            Inner::Dense(_) => Method::Dense,
            Inner::Block(_) => Method::Block,
        }
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// Equilibrated matrix solve.
    fn solve_scaled(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.inner {
            Inner::Dense(f) => f.solve(rhs),
            Inner::Block(f) => f.solve(rhs),
        }
    }

    fn solve_scaled_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.inner {
            Inner::Dense(f) => f.solve_transpose(rhs),
            Inner::Block(f) => f.solve_transpose(rhs),
        }
    }

    /// Raw solution vector of `M x = rhs`.
    pub fn solve_vec(&self, rhs: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = rhs.iter().zip(&self.row_scale).map(|(b, r)| b * r).collect();
        self.solve_scaled(&scaled).into_iter().zip(&self.col_scale).map(|(y, c)| y * c).collect()
    }

    /// Raw solution vector of `Mᵀ y = rhs`.
    pub fn solve_transpose_vec(&self, rhs: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = rhs.iter().zip(&self.col_scale).map(|(b, c)| b * c).collect();
        self.solve_scaled_transpose(&scaled).into_iter().zip(&self.row_scale).map(|(y, r)| y * r).collect()
    }

    /// Solve with `rhs` and certify the residual against the original matrix.
    pub fn solve(&self, sys: &AssembledSystem, rhs: &[f64]) -> Result<SolveResult, SolverError> {
        let x = self.solve_vec(rhs);
        finish(sys, rhs, x, self.condition_estimate)
    }

    /// Hager's one-norm estimate of `‖A‖₁ ‖A⁻¹‖₁` for the equilibrated `A`.
    fn estimate_condition(&self, n: usize) -> f64 {
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        for _ in 0..5 {
            let y = self.solve_scaled(&x);
            if y.iter().any(|v| !v.is_finite()) {
                return f64::INFINITY;
            }
            estimate = y.iter().map(|v| v.abs()).sum::<f64>();
            let signs: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_scaled_transpose(&signs);
            let (jmax, zmax) = z.iter().enumerate().fold((0, 0.0f64), |acc, (j, v)| if v.abs() > acc.1 { (j, v.abs()) } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![0.0; n];
            x[jmax] = 1.0;
        }
        estimate * self.norm_one
    }
}

/// Reasons a problem is singular by construction, if any.
pub fn structural_defect(sys: &AssembledSystem) -> Option<String> {
    let spec = sys.spec();
    if spec.tau.naive {
        return Some("one tau per edge leaves a corner-continuous tau combination unconstrained".into());
    }
    if spec.equation == crate::assembly::Equation::Poisson && spec.is_pure_neumann() && !spec.gauge {
        return Some("pure-Neumann Poisson problem without a gauge condition".into());
    }
    None
}

fn singular(sys: &AssembledSystem, detail: String) -> SolverError {
    match structural_defect(sys) {
        Some(reason) => SolverError::Singular { structural: true, reason: format!("{reason} ({detail})") },
        None => SolverError::Singular { structural: false, reason: detail },
    }
}

fn finish(sys: &AssembledSystem, rhs: &[f64], x: Vec<f64>, condition_estimate: f64) -> Result<SolveResult, SolverError> {
    let m = sys.matrix();
    let residual_norm = m.mul_vec(&x).iter().zip(rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let x_norm = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let bound = 1e-9 * m.norm_inf() * x_norm + 1e-14 * rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(residual_norm <= bound) {
        return Err(SolverError::Residual { residual: residual_norm, bound });
    }
    let n_sol = sys.solution_len();
    let u = CoeffTensor::from_values((0..sys.spec().dim()).collect(), sys.spec().extents.clone(), x[..n_sol].to_vec())
        .expect("solution block matches the extents");
    let taus = sys.cols()[n_sol..].iter().cloned().zip(x[n_sol..].iter().copied()).collect();
    Ok(SolveResult { u, taus, residual_norm, condition_estimate })
}

/// Factor with `method` and solve the system's own right-hand side.
pub fn solve_with(sys: &AssembledSystem, method: Method) -> Result<SolveResult, SolverError> {
    Factored::new(sys, method)?.solve(sys, sys.rhs())
}

/// Automatic method choice.
pub fn solve(sys: &AssembledSystem) -> Result<SolveResult, SolverError> {
    solve_with(sys, Method::Auto)
}
