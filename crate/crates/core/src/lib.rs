//! Generalized tau discretizations of Poisson and biharmonic problems on
//! intervals, rectangles and boxes.
//!
//! The solution is expanded in Chebyshev polynomials, the interior residual
//! is tested in an ultraspherical basis (or by collocation), and the system
//! is closed by tau terms in the interior, on each face and along every
//! face intersection, with interface conditions that keep boundary data
//! consistent at edges and corners.

pub mod assembly;
pub mod basis;
pub mod field;
pub mod operators;
pub mod solver;
pub mod sparse;
pub mod tau;
pub mod tensor;

mod linalg;

pub use assembly::{assemble, assemble_rhs, AssembledSystem, ColKind, Equation, InteriorTest, ProblemSpec, RowKind};
pub use basis::{BasisId, Side};
pub use operators::{BoundaryOperator, FaceData};
pub use solver::{solve, solve_dense, solve_eig, solve_schur_2d, SolveResult, SolverError, Spectrum};
pub use tau::{CornerScheme, TauFamily, TauSpec};
pub use tensor::CoeffTensor;
