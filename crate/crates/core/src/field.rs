//! Moving between functions on a box and Chebyshev coefficient tensors.
//!
//! Functions are sampled on the type-II (extrema) grid of each axis and
//! transformed, so the projection interpolates at those nodes; anything
//! above the truncation aliases back, as with any pseudo-spectral forcing.

use crate::basis::{chebyshev_integrals, evaluation_matrix, to_physical, BasisError, BasisId, ChebyshevTransform, Side};
use crate::tensor::{CoeffTensor, MultiIndex, TensorError};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("{got} domain intervals for {expected} axes")]
    DomainMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

fn check_domain(axes: &[usize], domain: &[(f64, f64)]) -> Result<(), FieldError> {
    let needed = axes.iter().map(|&a| a + 1).max().unwrap_or(0);
    if domain.len() < needed {
        return Err(FieldError::DomainMismatch { expected: needed, got: domain.len() });
    }
    Ok(())
}

/// Chebyshev coefficients of `f` over the listed physical axes.
///
/// `fixed` supplies coordinates for axes that are not part of the tensor
/// (for face data); its entries for tensor axes are ignored.
pub fn project_on(
    axes: Vec<usize>,
    extents: Vec<usize>,
    domain: &[(f64, f64)],
    fixed: &[f64],
    f: impl Fn(&[f64]) -> f64,
) -> Result<CoeffTensor, FieldError> {
    check_domain(&axes, domain)?;
    let transforms: Vec<ChebyshevTransform> = extents.iter().map(|&n| ChebyshevTransform::new(n)).collect::<Result<_, _>>()?;
    let nodes: Vec<Vec<f64>> = axes
        .iter()
        .zip(&transforms)
        .map(|(&a, t)| t.grid().nodes().iter().map(|&xi| to_physical(xi, domain[a].0, domain[a].1)).collect())
        .collect();
    let mut point = fixed.to_vec();
    point.resize(domain.len().max(fixed.len()), 0.0);
    let mut samples = CoeffTensor::from_fn(axes.clone(), extents.clone(), |idx| {
        for (p, &a) in axes.iter().enumerate() {
            point[a] = nodes[p][idx[p]];
        }
        f(&point)
    });
    for (&a, t) in axes.iter().zip(&transforms) {
        samples = samples.apply_along(a, t.forward_matrix(), t.size())?;
    }
    Ok(samples)
}

/// Coefficients of `f` over the full box `extents` (axes `0..d`).
pub fn project(extents: &[usize], domain: &[(f64, f64)], f: impl Fn(&[f64]) -> f64) -> Result<CoeffTensor, FieldError> {
    project_on((0..extents.len()).collect(), extents.to_vec(), domain, &[], f)
}

/// Coefficients of face data `g` on the face `axis = side`; `g` receives the
/// full physical point with the normal coordinate pinned to the face.
pub fn project_face(
    extents: &[usize],
    domain: &[(f64, f64)],
    axis: usize,
    side: Side,
    g: impl Fn(&[f64]) -> f64,
) -> Result<CoeffTensor, FieldError> {
    check_domain(&[axis], domain)?;
    let axes: Vec<usize> = (0..extents.len()).filter(|&j| j != axis).collect();
    let ext = axes.iter().map(|&j| extents[j]).collect();
    let mut fixed = vec![0.0; extents.len()];
    fixed[axis] = match side {
        Side::Low => domain[axis].0,
        Side::High => domain[axis].1,
    };
    project_on(axes, ext, domain, &fixed, g)
}

/// Values of `u` on the tensor grid of physical `points[p]` along each of
/// its axes (in the tensor's axis order).
pub fn evaluate_grid(u: &CoeffTensor, domain: &[(f64, f64)], points: &[Vec<f64>]) -> Result<CoeffTensor, FieldError> {
    check_domain(u.axes(), domain)?;
    let mut out = u.clone();
    for (p, &a) in u.axes().iter().enumerate() {
        let (lo, hi) = domain[a];
        let reference: Vec<f64> = points[p].iter().map(|&x| (2.0 * x - lo - hi) / (hi - lo)).collect();
        let m = evaluation_matrix(BasisId::Chebyshev, u.extents()[p], &reference);
        out = out.apply_along(a, &m, reference.len())?;
    }
    Ok(out)
}

/// `u` at one physical point (coordinates for the tensor's axes).
pub fn evaluate_at(u: &CoeffTensor, domain: &[(f64, f64)], point: &[f64]) -> Result<f64, FieldError> {
    let points: Vec<Vec<f64>> = point.iter().map(|&x| vec![x]).collect();
    Ok(evaluate_grid(u, domain, &points)?.values()[0])
}

/// `n` uniformly spaced physical points covering `[a, b]`.
pub fn uniform_points(interval: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (interval.0 + interval.1)];
    }
    (0..n).map(|i| interval.0 + (interval.1 - interval.0) * i as f64 / (n - 1) as f64).collect()
}

/// Row weights `w` with `w · u = ∫ u` over the box.
pub fn integral_weights(extents: &[usize], domain: &[(f64, f64)]) -> Vec<f64> {
    let per_axis: Vec<Vec<f64>> = extents.iter().map(|&n| chebyshev_integrals(n)).collect();
    let jacobian: f64 = domain.iter().map(|(a, b)| 0.5 * (b - a)).product();
    MultiIndex::new(extents)
        .map(|idx| jacobian * idx.iter().enumerate().map(|(j, &n)| per_axis[j][n]).product::<f64>())
        .collect()
}

/// `∫ u` over the box.
pub fn integrate(u: &CoeffTensor, domain: &[(f64, f64)]) -> f64 {
    integral_weights(u.extents(), domain).iter().zip(u.values()).map(|(w, c)| w * c).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn project_and_evaluate_polynomial() {
        let domain = [(0.0, 1.0), (-1.0, 2.0)];
        let f = |p: &[f64]| p[0] * p[0] * p[1] - 3.0 * p[1] + 0.5;
        let u = project(&[5, 4], &domain, f).unwrap();
        for &(x, y) in &[(0.3, -0.7), (1.0, 2.0), (0.0, 0.1)] {
            assert_abs_diff_eq!(evaluate_at(&u, &domain, &[x, y]).unwrap(), f(&[x, y]), epsilon = 1e-13);
        }
    }

    #[test]
    fn face_projection_pins_normal() {
        let domain = [(-1.0, 1.0), (-1.0, 1.0), (0.0, 2.0)];
        let g = project_face(&[4, 4, 4], &domain, 2, Side::High, |p| p[0] + p[2]).unwrap();
        assert_eq!(g.axes(), &[0, 1]);
        assert_abs_diff_eq!(evaluate_at(&g, &domain, &[0.5, 0.0]).unwrap(), 2.5, epsilon = 1e-13);
    }

    #[test]
    fn integral_of_constant_is_volume() {
        let mut one = CoeffTensor::full(vec![6, 6]);
        one.set(&[0, 0], 1.0);
        assert_abs_diff_eq!(integrate(&one, &[(-1.0, 1.0), (-1.0, 1.0)]), 4.0, epsilon = 1e-15);
        let x2 = project(&[6], &[(0.0, 3.0)], |p| p[0] * p[0]).unwrap();
        assert_abs_diff_eq!(integrate(&x2, &[(0.0, 3.0)]), 9.0, epsilon = 1e-13);
    }
}
