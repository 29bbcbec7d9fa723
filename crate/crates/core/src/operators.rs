//! Boundary operators `β = I_side ∘ p(∂_n)` and their cross-application.
//!
//! Normal derivatives are outward: `∂_n = -∂_x` on the low face of an axis
//! and `+∂_x` on the high face.

use std::fmt;

use thiserror::Error;

use crate::basis::{affine_scale, endpoint_functional, BasisError, BasisId, Side};
use crate::tensor::{CoeffTensor, TensorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("boundary operator `{0}` has an all-zero normal polynomial")]
    ZeroPolynomial(String),
    #[error("operators `{0}` and `{1}` act on the same axis and are not adjacent")]
    NotAdjacent(String, String),
    #[error("axis {0} appears more than once in a cross-application")]
    DuplicateAxis(usize),
    #[error("no domain interval given for axis {0}")]
    MissingDomain(usize),
    #[error("face data for `{label}` must span axes {expected:?} with extents {extents:?}")]
    FaceShape { label: String, expected: Vec<usize>, extents: Vec<usize> },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// `β u = (Σ_k c_k ∂_n^k u)` restricted to one face.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryOperator {
    axis: usize,
    side: Side,
    normal_poly: Vec<f64>,
    label: String,
}

impl BoundaryOperator {
    pub fn new(axis: usize, side: Side, normal_poly: Vec<f64>, label: impl Into<String>) -> Result<Self, OperatorError> {
        let label = label.into();
        let mut normal_poly = normal_poly;
        while normal_poly.last() == Some(&0.0) {
            normal_poly.pop();
        }
        if normal_poly.is_empty() {
            return Err(OperatorError::ZeroPolynomial(label));
        }
        Ok(BoundaryOperator { axis, side, normal_poly, label })
    }

    pub fn dirichlet(axis: usize, side: Side) -> Self {
        Self::new(axis, side, vec![1.0], format!("dirichlet[{}]", face_name(axis, side))).unwrap()
    }

    pub fn neumann(axis: usize, side: Side) -> Self {
        Self::new(axis, side, vec![0.0, 1.0], format!("neumann[{}]", face_name(axis, side))).unwrap()
    }

    /// `a + b ∂_n`.
    pub fn robin(axis: usize, side: Side, a: f64, b: f64) -> Result<Self, OperatorError> {
        Self::new(axis, side, vec![a, b], format!("robin({a},{b})[{}]", face_name(axis, side)))
    }

    /// `∂_axis^order` (fixed coordinate direction, not outward) on a face.
    pub fn axis_derivative(axis: usize, side: Side, order: usize) -> Self {
        let mut poly = vec![0.0; order + 1];
        poly[order] = side.outward_sign().powi(order as i32);
        Self::new(axis, side, poly, format!("d{order}[{}]", face_name(axis, side))).unwrap()
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn normal_poly(&self) -> &[f64] {
        &self.normal_poly
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Highest normal-derivative order present.
    pub fn order(&self) -> usize {
        self.normal_poly.len() - 1
    }

    /// Row `r` with `r · c = (p(∂_n) u)(face)` for 1D Chebyshev coefficients
    /// `c` along this operator's axis on the physical interval `domain`.
    pub fn functional_row(&self, n: usize, domain: (f64, f64)) -> Result<Vec<f64>, OperatorError> {
        let mut row = vec![0.0; n];
        for (k, &c) in self.normal_poly.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let factor = c * (self.side.outward_sign() * affine_scale(domain.0, domain.1, 1)?).powi(k as i32);
            for (r, e) in row.iter_mut().zip(endpoint_functional(BasisId::Chebyshev, k, self.side, n)) {
                *r += factor * e;
            }
        }
        Ok(row)
    }
}

impl fmt::Display for BoundaryOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Compass-style face name for small dimensions, `axis{j}-{low|high}` otherwise.
pub fn face_name(axis: usize, side: Side) -> String {
    match (axis, side) {
        (0, Side::Low) => "W".into(),
        (0, Side::High) => "E".into(),
        (1, Side::Low) => "S".into(),
        (1, Side::High) => "N".into(),
        (2, Side::Low) => "B".into(),
        (2, Side::High) => "T".into(),
        (j, Side::Low) => format!("axis{j}-low"),
        (j, Side::High) => format!("axis{j}-high"),
    }
}

/// Whether two supported operators commute on intersecting faces.
///
/// Constant-coefficient normal-derivative polynomials on distinct axes always
/// commute, and an operator commutes with itself. Distinct operators on the
/// same axis never share a face intersection, so they are reported as not
/// commuting; use [`require_adjacent`] where an adjacent pair is needed.
pub fn commutes(b1: &BoundaryOperator, b2: &BoundaryOperator) -> bool {
    b1.axis != b2.axis || b1 == b2
}

/// Interface conditions only pair operators on distinct axes.
pub fn require_adjacent(b1: &BoundaryOperator, b2: &BoundaryOperator) -> Result<(), OperatorError> {
    if b1.axis == b2.axis {
        return Err(OperatorError::NotAdjacent(b1.label.clone(), b2.label.clone()));
    }
    Ok(())
}

/// Contract `data` with each operator's functional row along its axis.
///
/// `domain[j]` is the physical interval of axis `j`. The result spans the
/// remaining axes; contraction order does not matter.
pub fn cross_apply(ops: &[&BoundaryOperator], data: &CoeffTensor, domain: &[(f64, f64)]) -> Result<CoeffTensor, OperatorError> {
    for (i, a) in ops.iter().enumerate() {
        if ops[..i].iter().any(|b| b.axis == a.axis) {
            return Err(OperatorError::DuplicateAxis(a.axis));
        }
    }
    let mut out = data.clone();
    for op in ops {
        let p = out.position(op.axis)?;
        let interval = *domain.get(op.axis).ok_or(OperatorError::MissingDomain(op.axis))?;
        let row = op.functional_row(out.extents()[p], interval)?;
        out = out.contract(op.axis, &row)?;
    }
    Ok(out)
}

/// One boundary condition `β u = g` with its face data in Chebyshev
/// coefficients over the tangential axes.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceData {
    pub operator: BoundaryOperator,
    pub rhs: CoeffTensor,
}

impl FaceData {
    /// Validates that `rhs` spans every axis of `extents` except the normal one.
    pub fn new(operator: BoundaryOperator, rhs: CoeffTensor, extents: &[usize]) -> Result<Self, OperatorError> {
        let expected: Vec<usize> = (0..extents.len()).filter(|&j| j != operator.axis).collect();
        let tangential: Vec<usize> = expected.iter().map(|&j| extents[j]).collect();
        if rhs.axes() != expected.as_slice() || rhs.extents() != tangential.as_slice() {
            return Err(OperatorError::FaceShape { label: operator.label.clone(), expected, extents: tangential });
        }
        Ok(FaceData { operator, rhs })
    }

    /// Homogeneous data (`g = 0`).
    pub fn homogeneous(operator: BoundaryOperator, extents: &[usize]) -> Self {
        let axes: Vec<usize> = (0..extents.len()).filter(|&j| j != operator.axis).collect();
        let ext = axes.iter().map(|&j| extents[j]).collect();
        FaceData { operator, rhs: CoeffTensor::zeros(axes, ext) }
    }
}
