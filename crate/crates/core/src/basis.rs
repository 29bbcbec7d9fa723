//! One-dimensional Chebyshev and ultraspherical polynomial machinery.
//!
//! Coefficient-space operators follow the ultraspherical-method conventions:
//!
//! ```text
//! d/dx T_n        = n C^(1)_{n-1}
//! d/dx C^(l)_n    = 2l C^(l+1)_{n-1}                      (l >= 1)
//! T_0 = C^(1)_0,  T_1 = C^(1)_1 / 2,  T_n = (C^(1)_n - C^(1)_{n-2}) / 2
//! C^(l)_n = l/(n+l) (C^(l+1)_n - C^(l+1)_{n-2})
//! ```
//!
//! so differentiation is a single superdiagonal and conversion has offsets
//! {0, 2}. Ultraspherical polynomials are the standard Gegenbauer family,
//! `C^(l)_0 = 1`, `C^(l)_1 = 2 l x`,
//! `(n+1) C^(l)_{n+1} = 2 (n+l) x C^(l)_n - (n + 2l - 1) C^(l)_{n-1}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("ultraspherical index must be at least 1, got {0}")]
    InvalidIndex(u32),
    #[error("size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("degenerate domain [{0}, {1}]")]
    DegenerateDomain(f64, f64),
    #[error("grid of kind {kind:?} needs at least {min} nodes, got {got}")]
    GridTooSmall { kind: GridKind, min: usize, got: usize },
    #[error("cannot compose operators: {0:?} output does not feed {1:?} input")]
    Incompatible(BasisId, BasisId),
}

/// Polynomial family used for trial, test or tau expansions.
///
/// Chebyshev is stored as its own family; `index()` reports 0 for it so that
/// `T_n` can be labelled as `C^(0)_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisId {
    Chebyshev,
    Ultraspherical(u32),
}

impl BasisId {
    pub fn ultraspherical(alpha: u32) -> Result<Self, BasisError> {
        if alpha == 0 {
            return Err(BasisError::InvalidIndex(alpha));
        }
        Ok(BasisId::Ultraspherical(alpha))
    }

    /// `0` maps to Chebyshev, anything else to the ultraspherical family.
    pub fn from_index(alpha: u32) -> Self {
        if alpha == 0 {
            BasisId::Chebyshev
        } else {
            BasisId::Ultraspherical(alpha)
        }
    }

    pub fn index(self) -> u32 {
        match self {
            BasisId::Chebyshev => 0,
            BasisId::Ultraspherical(a) => a,
        }
    }

    /// The family that derivatives and conversions of `self` land in.
    pub fn raised(self) -> Self {
        BasisId::Ultraspherical(self.index() + 1)
    }
}

/// Value of the `n`-th basis polynomial at `x`.
pub fn eval_basis(basis: BasisId, n: usize, x: f64) -> f64 {
    let vals = eval_all(basis, n + 1, x);
    vals[n]
}

/// Values of the first `count` basis polynomials at `x`.
pub fn eval_all(basis: BasisId, count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(1.0);
    if count == 1 {
        return out;
    }
    match basis {
        BasisId::Chebyshev => {
            out.push(x);
            for n in 1..count - 1 {
                let next = 2.0 * x * out[n] - out[n - 1];
                out.push(next);
            }
        }
        BasisId::Ultraspherical(l) => {
            let l = l as f64;
            out.push(2.0 * l * x);
            for n in 1..count - 1 {
                let nf = n as f64;
                let next = (2.0 * (nf + l) * x * out[n] - (nf + 2.0 * l - 1.0) * out[n - 1]) / (nf + 1.0);
                out.push(next);
            }
        }
    }
    out
}

/// Endpoint values `phi_n(+1)` (or `phi_n(-1)`) for `n < count`.
pub fn endpoint_values(basis: BasisId, count: usize, side: Side) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut at_one = 1.0;
    for n in 0..count {
        if n > 0 {
            if let BasisId::Ultraspherical(l) = basis {
                // C^(l)_n(1) = binom(n + 2l - 1, n)
                let nf = n as f64;
                at_one *= (nf + 2.0 * l as f64 - 1.0) / nf;
            }
        }
        let sign = match side {
            Side::High => 1.0,
            Side::Low if n % 2 == 0 => 1.0,
            Side::Low => -1.0,
        };
        out.push(sign * at_one);
    }
    out
}

/// Which end of an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Low,
    High,
}

impl Side {
    /// Outward normal direction along the axis.
    pub fn outward_sign(self) -> f64 {
        match self {
            Side::Low => -1.0,
            Side::High => 1.0,
        }
    }
}

/// A banded coefficient-space operator stored by diagonal offset.
///
/// `bands[k][i]` holds entry `(i, i + k)`; entries outside the declared
/// bands are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedOperator {
    rows: usize,
    cols: usize,
    bands: BTreeMap<isize, Vec<f64>>,
    source: BasisId,
    target: BasisId,
}

impl BandedOperator {
    pub fn zeros(rows: usize, cols: usize, source: BasisId, target: BasisId) -> Self {
        BandedOperator { rows, cols, bands: BTreeMap::new(), source, target }
    }

    pub fn identity(n: usize, basis: BasisId) -> Self {
        let mut op = Self::zeros(n, n, basis, basis);
        for i in 0..n {
            op.set(i, i, 1.0);
        }
        op
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn source(&self) -> BasisId {
        self.source
    }

    pub fn target(&self) -> BasisId {
        self.target
    }

    pub fn offsets(&self) -> impl Iterator<Item = isize> + '_ {
        self.bands.keys().copied()
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.rows && j < self.cols, "entry ({i}, {j}) out of range");
        let offset = j as isize - i as isize;
        let rows = self.rows;
        self.bands.entry(offset).or_insert_with(|| vec![0.0; rows])[i] = value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= self.rows || j >= self.cols {
            return 0.0;
        }
        let offset = j as isize - i as isize;
        self.bands.get(&offset).map_or(0.0, |band| band[i])
    }

    /// Nonzero entries as `(row, col, value)`, row-major within each band.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.bands.iter().flat_map(move |(&offset, band)| {
            band.iter().enumerate().filter_map(move |(i, &v)| {
                let j = i as isize + offset;
                (v != 0.0 && j >= 0 && (j as usize) < self.cols).then_some((i, j as usize, v))
            })
        })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "operand length must equal operator columns");
        let mut y = vec![0.0; self.rows];
        for (i, j, v) in self.entries() {
            y[i] += v * x[j];
        }
        y
    }

    /// Row vector times operator: `r^T A`.
    pub fn left_apply(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.rows, "row vector length must equal operator rows");
        let mut y = vec![0.0; self.cols];
        for (i, j, v) in self.entries() {
            y[j] += r[i] * v;
        }
        y
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &BandedOperator) -> Result<BandedOperator, BasisError> {
        if inner.target != self.source || inner.rows != self.cols {
            return Err(BasisError::Incompatible(inner.target, self.source));
        }
        let mut out = BandedOperator::zeros(self.rows, inner.cols, inner.source, self.target);
        for (&oa, band_a) in &self.bands {
            for (&ob, band_b) in &inner.bands {
                let offset = oa + ob;
                for (i, &a) in band_a.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let k = i as isize + oa;
                    if k < 0 || k as usize >= inner.rows {
                        continue;
                    }
                    let b = band_b[k as usize];
                    let j = k + ob;
                    if b == 0.0 || j < 0 || j as usize >= inner.cols {
                        continue;
                    }
                    let rows = out.rows;
                    out.bands.entry(offset).or_insert_with(|| vec![0.0; rows])[i] += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> BandedOperator {
        let mut out = self.clone();
        for band in out.bands.values_mut() {
            band.iter_mut().for_each(|v| *v *= factor);
        }
        out
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for (i, j, v) in self.entries() {
            out[i * self.cols + j] = v;
        }
        out
    }
}

/// Differentiation `source -> source.raised()` on the first `n` coefficients.
pub fn diff_operator(source: BasisId, n: usize) -> BandedOperator {
    let mut op = BandedOperator::zeros(n, n, source, source.raised());
    for k in 1..n {
        let v = match source {
            BasisId::Chebyshev => k as f64,
            BasisId::Ultraspherical(l) => 2.0 * l as f64,
        };
        op.set(k - 1, k, v);
    }
    op
}

/// Conversion `source -> source.raised()` on the first `n` coefficients.
pub fn conversion_operator(source: BasisId, n: usize) -> BandedOperator {
    let mut op = BandedOperator::zeros(n, n, source, source.raised());
    match source {
        BasisId::Chebyshev => {
            for k in 0..n {
                op.set(k, k, if k == 0 { 1.0 } else { 0.5 });
                if k >= 2 {
                    op.set(k - 2, k, -0.5);
                }
            }
        }
        BasisId::Ultraspherical(l) => {
            let l = l as f64;
            for k in 0..n {
                let c = l / (k as f64 + l);
                op.set(k, k, c);
                if k >= 2 {
                    op.set(k - 2, k, -c);
                }
            }
        }
    }
    op
}

/// Conversion chain from `from` up to `to` (identity when equal).
///
/// Panics if `to` has a lower index than `from`; downward conversion is not
/// banded.
pub fn conversion_chain(from: BasisId, to: BasisId, n: usize) -> BandedOperator {
    assert!(from.index() <= to.index(), "conversion only raises the basis index");
    let mut op = BandedOperator::identity(n, from);
    let mut current = from;
    while current != to {
        let step = conversion_operator(current, n);
        op = step.compose(&op).expect("conversion chain is consistent");
        current = current.raised();
    }
    op
}

/// Order-`order` derivative from `source` into `source` raised `order` times.
pub fn derivative_chain(source: BasisId, order: usize, n: usize) -> BandedOperator {
    let mut op = BandedOperator::identity(n, source);
    let mut current = source;
    for _ in 0..order {
        let step = diff_operator(current, n);
        op = step.compose(&op).expect("derivative chain is consistent");
        current = current.raised();
    }
    op
}

/// Derivative of order `order` expressed in the `target` basis.
pub fn derivative_into(source: BasisId, order: usize, target: BasisId, n: usize) -> BandedOperator {
    let d = derivative_chain(source, order, n);
    let s = conversion_chain(d.target(), target, n);
    s.compose(&d).expect("conversion follows derivative")
}

/// Row `r` with `r · c = (d^k/dx^k p)(±1)` for `p = Σ c_n phi_n`.
pub fn endpoint_functional(basis: BasisId, derivative_order: usize, side: Side, n: usize) -> Vec<f64> {
    let d = derivative_chain(basis, derivative_order, n);
    let ends = endpoint_values(d.target(), n, side);
    d.left_apply(&ends)
}

/// Chain-rule factor `(2/(b-a))^k` for mapping `[a, b]` onto `[-1, 1]`.
pub fn affine_scale(a: f64, b: f64, derivative_order: usize) -> Result<f64, BasisError> {
    if !(b > a) {
        return Err(BasisError::DegenerateDomain(a, b));
    }
    Ok((2.0 / (b - a)).powi(derivative_order as i32))
}

/// Map a reference coordinate in `[-1, 1]` to `[a, b]`.
pub fn to_physical(xi: f64, a: f64, b: f64) -> f64 {
    a + 0.5 * (b - a) * (xi + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Chebyshev roots; excludes the endpoints.
    TypeI,
    /// Chebyshev extrema; includes the endpoints.
    TypeII,
}

/// Chebyshev grid on `[-1, 1]` with strictly increasing nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    kind: GridKind,
    nodes: Vec<f64>,
}

impl Grid1D {
    pub fn new(kind: GridKind, size: usize) -> Result<Self, BasisError> {
        let min = match kind {
            GridKind::TypeI => 1,
            GridKind::TypeII => 2,
        };
        if size < min {
            return Err(BasisError::GridTooSmall { kind, min, got: size });
        }
        let nodes = match kind {
            GridKind::TypeI => (0..size)
                .map(|j| -((j as f64 + 0.5) * PI / size as f64).cos())
                .collect(),
            GridKind::TypeII => {
                let m = (size - 1) as f64;
                let mut nodes: Vec<f64> = (0..size).map(|j| -(j as f64 * PI / m).cos()).collect();
                nodes[0] = -1.0;
                nodes[size - 1] = 1.0;
                if size % 2 == 1 {
                    nodes[size / 2] = 0.0;
                }
                nodes
            }
        };
        Ok(Grid1D { kind, nodes })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// Values on the type-II grid <-> Chebyshev coefficients (DCT-I, O(N²)).
#[derive(Debug, Clone)]
pub struct ChebyshevTransform {
    n: usize,
    grid: Grid1D,
    forward: Vec<f64>,
    inverse: Vec<f64>,
}

impl ChebyshevTransform {
    pub fn new(n: usize) -> Result<Self, BasisError> {
        let grid = Grid1D::new(GridKind::TypeII, n)?;
        let m = n - 1;
        // T_k(x_j) = (-1)^k cos(pi k j / m) for x_j = -cos(pi j / m).
        let cheb = |k: usize, j: usize| {
            let r = (k * j) % (2 * m);
            let c = (PI * r as f64 / m as f64).cos();
            if k % 2 == 0 {
                c
            } else {
                -c
            }
        };
        let mut forward = vec![0.0; n * n];
        let mut inverse = vec![0.0; n * n];
        for k in 0..n {
            let ck = if k == 0 || k == m { 0.5 } else { 1.0 };
            for j in 0..n {
                let wj = if j == 0 || j == m { 0.5 } else { 1.0 };
                let t = cheb(k, j);
                forward[k * n + j] = 2.0 / m as f64 * ck * wj * t;
                inverse[j * n + k] = t;
            }
        }
        Ok(ChebyshevTransform { n, grid, forward, inverse })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Row-major `N x N` matrix mapping grid values to coefficients.
    pub fn forward_matrix(&self) -> &[f64] {
        &self.forward
    }

    /// Row-major `N x N` matrix mapping coefficients to grid values.
    pub fn inverse_matrix(&self) -> &[f64] {
        &self.inverse
    }

    pub fn forward(&self, values: &[f64]) -> Result<Vec<f64>, BasisError> {
        self.check(values.len())?;
        Ok(matvec(&self.forward, self.n, values))
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Result<Vec<f64>, BasisError> {
        self.check(coeffs.len())?;
        Ok(matvec(&self.inverse, self.n, coeffs))
    }

    fn check(&self, got: usize) -> Result<(), BasisError> {
        if got != self.n {
            return Err(BasisError::SizeMismatch { expected: self.n, got });
        }
        Ok(())
    }
}

fn matvec(m: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    m.chunks_exact(n)
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Row-major `points.len() x n` matrix of basis values.
pub fn evaluation_matrix(basis: BasisId, n: usize, points: &[f64]) -> Vec<f64> {
    points.iter().flat_map(|&x| eval_all(basis, n, x)).collect()
}

/// `∫_{-1}^{1} T_n dx` for `n < count`.
pub fn chebyshev_integrals(count: usize) -> Vec<f64> {
    (0..count)
        .map(|n| {
            if n % 2 == 1 {
                0.0
            } else {
                let nf = n as f64;
                2.0 / (1.0 - nf * nf)
            }
        })
        .collect()
}

/// Re-express coefficients given in `from` in the Chebyshev basis by
/// back-substitution through the (upper triangular) conversion chain.
pub fn to_chebyshev(from: BasisId, coeffs: &[f64]) -> Vec<f64> {
    if from == BasisId::Chebyshev {
        return coeffs.to_vec();
    }
    let n = coeffs.len();
    let s = conversion_chain(BasisId::Chebyshev, from, n);
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = coeffs[i];
        for j in i + 1..n {
            acc -= s.get(i, j) * x[j];
        }
        x[i] = acc / s.get(i, i);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fd_derivative(basis: BasisId, n: usize, x: f64) -> f64 {
        let h = 1e-5;
        (eval_basis(basis, n, x + h) - eval_basis(basis, n, x - h)) / (2.0 * h)
    }

    fn eval_series(basis: BasisId, c: &[f64], x: f64) -> f64 {
        eval_all(basis, c.len(), x).iter().zip(c).map(|(p, c)| p * c).sum()
    }

    #[test]
    fn chebyshev_values() {
        assert_eq!(eval_basis(BasisId::Chebyshev, 0, 0.37), 1.0);
        let x: f64 = 0.5;
        assert_abs_diff_eq!(eval_basis(BasisId::Chebyshev, 3, x), 4.0 * x.powi(3) - 3.0 * x, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_basis(BasisId::Chebyshev, 3, x), -1.0, epsilon = 1e-15);
        for n in 0..40 {
            assert_abs_diff_eq!(eval_basis(BasisId::Chebyshev, n, 1.0), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ultraspherical_index_validated() {
        assert!(BasisId::ultraspherical(0).is_err());
        assert_eq!(BasisId::ultraspherical(2).unwrap().index(), 2);
        assert_eq!(BasisId::from_index(0), BasisId::Chebyshev);
    }

    #[test]
    fn diff_examples() {
        let d = diff_operator(BasisId::Chebyshev, 6);
        let mut t1 = vec![0.0; 6];
        t1[1] = 1.0;
        let out = d.apply(&t1);
        assert_eq!(out[0], 1.0);
        assert!(out[1..].iter().all(|&v| v == 0.0));
        let mut t0 = vec![0.0; 6];
        t0[0] = 1.0;
        assert!(d.apply(&t0).iter().all(|&v| v == 0.0));

        // C^(1)_2 -> 2 * 2 C^(2)_1... check against finite differences of the series
        let d1 = diff_operator(BasisId::Ultraspherical(1), 6);
        let mut c2 = vec![0.0; 6];
        c2[2] = 1.0;
        let out = d1.apply(&c2);
        assert_eq!(out[1], 2.0);
        for &x in &[-0.7, 0.1, 0.55] {
            let fd = fd_derivative(BasisId::Ultraspherical(1), 2, x);
            assert_abs_diff_eq!(eval_series(BasisId::Ultraspherical(2), &out, x), fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn conversion_examples() {
        let s = conversion_operator(BasisId::Chebyshev, 5);
        let mut t0 = vec![0.0; 5];
        t0[0] = 1.0;
        assert_eq!(s.apply(&t0), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let mut t2 = vec![0.0; 5];
        t2[2] = 1.0;
        let c = s.apply(&t2);
        for &x in &[-1.0, -0.3, 0.0, 0.4, 0.9] {
            assert_abs_diff_eq!(
                eval_series(BasisId::Ultraspherical(1), &c, x),
                eval_basis(BasisId::Chebyshev, 2, x),
                epsilon = 1e-14
            );
        }
        for (i, j, _) in s.entries() {
            assert!(j >= i && j - i <= 2, "conversion must be upper banded");
        }
    }

    #[test]
    fn composed_conversion_matches_pointwise() {
        let n = 7;
        let c: Vec<f64> = (0..n).map(|k| 1.0 / (k as f64 + 1.0) - 0.3).collect();
        let s = conversion_chain(BasisId::Chebyshev, BasisId::Ultraspherical(2), n);
        let c2 = s.apply(&c);
        for &x in &[-0.95, -0.5, 0.0, 0.3, 0.8] {
            assert_abs_diff_eq!(
                eval_series(BasisId::Ultraspherical(2), &c2, x),
                eval_series(BasisId::Chebyshev, &c, x),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn endpoint_examples() {
        assert_eq!(endpoint_functional(BasisId::Chebyshev, 0, Side::High, 6), vec![1.0; 6]);
        let left = endpoint_functional(BasisId::Chebyshev, 0, Side::Low, 6);
        for (n, v) in left.iter().enumerate() {
            assert_eq!(*v, if n % 2 == 0 { 1.0 } else { -1.0 });
        }
        let d1 = endpoint_functional(BasisId::Chebyshev, 1, Side::High, 8);
        for (n, v) in d1.iter().enumerate() {
            assert_abs_diff_eq!(*v, (n * n) as f64, epsilon = 1e-12);
            let h = 1e-6;
            let fd = (eval_basis(BasisId::Chebyshev, n, 1.0) - eval_basis(BasisId::Chebyshev, n, 1.0 - h)) / h;
            assert!((v - fd).abs() < 1e-3 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn endpoint_higher_derivatives_match_closed_form() {
        // T_n^{(k)}(1) = prod_{m<k} (n² - m²) / (2m + 1)
        let n = 12;
        for k in 0..4 {
            let row = endpoint_functional(BasisId::Chebyshev, k, Side::High, n);
            for (deg, v) in row.iter().enumerate() {
                let exact: f64 = (0..k)
                    .map(|m| ((deg * deg) as f64 - (m * m) as f64) / (2 * m + 1) as f64)
                    .product();
                assert_abs_diff_eq!(*v, exact, epsilon = 1e-9 * exact.abs().max(1.0));
            }
        }
    }

    #[test]
    fn affine_examples() {
        assert_eq!(affine_scale(-1.0, 1.0, 2).unwrap(), 1.0);
        assert_eq!(affine_scale(0.0, 1.0, 1).unwrap(), 2.0);
        assert_eq!(affine_scale(0.0, 1.0, 4).unwrap(), 16.0);
        assert_eq!(affine_scale(1.0, 1.0, 1), Err(BasisError::DegenerateDomain(1.0, 1.0)));
    }

    #[test]
    fn grids() {
        let g1 = Grid1D::new(GridKind::TypeI, 7).unwrap();
        let g2 = Grid1D::new(GridKind::TypeII, 7).unwrap();
        assert!(g1.nodes().iter().all(|&x| x.abs() < 1.0));
        assert_eq!(g2.nodes()[0], -1.0);
        assert_eq!(g2.nodes()[6], 1.0);
        for g in [&g1, &g2] {
            assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        }
        assert!(Grid1D::new(GridKind::TypeII, 1).is_err());
    }

    #[test]
    fn transform_examples() {
        let tr = ChebyshevTransform::new(8).unwrap();
        let c = tr.forward(&[3.0; 8]).unwrap();
        assert_abs_diff_eq!(c[0], 3.0, epsilon = 1e-14);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-14));

        let t2: Vec<f64> = tr.grid().nodes().iter().map(|&x| 2.0 * x * x - 1.0).collect();
        let c = tr.forward(&t2).unwrap();
        for (k, v) in c.iter().enumerate() {
            if k == 2 {
                assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-14);
            } else {
                assert!(v.abs() < 1e-14, "coefficient {k} = {v}");
            }
        }
        assert_eq!(tr.forward(&[1.0; 3]), Err(BasisError::SizeMismatch { expected: 8, got: 3 }));

        let tr = ChebyshevTransform::new(32).unwrap();
        let vals: Vec<f64> = tr.grid().nodes().iter().map(|&x| (2.0 * PI * x).sin()).collect();
        let c = tr.forward(&vals).unwrap();
        for i in 0..50 {
            let x = -1.0 + 2.0 * i as f64 / 49.0;
            assert!((eval_series(BasisId::Chebyshev, &c, x) - (2.0 * PI * x).sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn to_chebyshev_inverts_conversion() {
        let c: Vec<f64> = (0..9).map(|k| (k as f64).sin()).collect();
        let s = conversion_chain(BasisId::Chebyshev, BasisId::Ultraspherical(3), 9);
        let back = to_chebyshev(BasisId::Ultraspherical(3), &s.apply(&c));
        for (a, b) in back.iter().zip(&c) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn integrals() {
        let w = chebyshev_integrals(5);
        assert_eq!(w[0], 2.0);
        assert_eq!(w[1], 0.0);
        assert_abs_diff_eq!(w[2], -2.0 / 3.0, epsilon = 1e-15);
    }

    fn family() -> impl Strategy<Value = BasisId> {
        (0u32..4).prop_map(BasisId::from_index)
    }

    proptest! {
        #[test]
        fn differentiation_exact(basis in family(), n in 4usize..24, deg_seed in 0usize..1000, xs in prop::collection::vec(-1.0f64..1.0, 10)) {
            let deg = deg_seed % (n - 1);
            let d = diff_operator(basis, n);
            let mut e = vec![0.0; n];
            e[deg] = 1.0;
            let out = d.apply(&e);
            for x in xs {
                // analytic derivative from the three-term recurrence, differentiated
                let exact = analytic_derivative(basis, deg, x);
                let got = eval_series(basis.raised(), &out, x);
                prop_assert!((got - exact).abs() < 1e-12 * (1.0 + exact.abs()) * (deg as f64 + 1.0).powi(2));
            }
        }

        #[test]
        fn conversion_exact(basis in family(), n in 4usize..30, seed in prop::collection::vec(-1.0f64..1.0, 30), xs in prop::collection::vec(-1.0f64..1.0, 10)) {
            let mut c: Vec<f64> = seed[..n].to_vec();
            c[n - 1] = 0.0;
            c[n - 2] = 0.0;
            let s = conversion_operator(basis, n);
            let out = s.apply(&c);
            // |φ_k(x)| peaks at x = 1 for every family here
            let scale: f64 = eval_all(basis, n, 1.0).iter().zip(&c).map(|(p, v)| (p * v).abs()).sum();
            for x in xs {
                let a = eval_series(basis, &c, x);
                let b = eval_series(basis.raised(), &out, x);
                prop_assert!((a - b).abs() < 1e-13 * (1.0 + n as f64) * (1.0 + scale));
            }
        }

        #[test]
        fn endpoint_consistency(k in 0usize..4, n in 5usize..20, high in any::<bool>()) {
            let side = if high { Side::High } else { Side::Low };
            let row = endpoint_functional(BasisId::Chebyshev, k, side, n);
            let x = if high { 1.0 } else { -1.0 };
            for deg in 0..n {
                // derivative of T_deg evaluated through k operator applications
                let mut e = vec![0.0; n];
                e[deg] = 1.0;
                let d = derivative_chain(BasisId::Chebyshev, k, n).apply(&e);
                let via_eval = eval_series(BasisId::from_index(k as u32), &d, x);
                prop_assert!((row[deg] - via_eval).abs() < 1e-11 * (1.0 + via_eval.abs()));
            }
        }

        #[test]
        fn transform_round_trip(n in 2usize..257, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let tr = ChebyshevTransform::new(n).unwrap();
            let back = tr.inverse(&tr.forward(&v).unwrap()).unwrap();
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (a, b) in back.iter().zip(&v) {
                prop_assert!((a - b).abs() < 1e-12 * scale);
            }
        }
    }

    /// d/dx of the degree-`n` basis polynomial via the derivative of the
    /// three-term recurrence (independent of the banded operators).
    fn analytic_derivative(basis: BasisId, n: usize, x: f64) -> f64 {
        let p = eval_all(basis, n + 1, x);
        let mut dp = vec![0.0; n + 1];
        if n >= 1 {
            dp[1] = match basis {
                BasisId::Chebyshev => 1.0,
                BasisId::Ultraspherical(l) => 2.0 * l as f64,
            };
        }
        for k in 1..n {
            let kf = k as f64;
            dp[k + 1] = match basis {
                BasisId::Chebyshev => 2.0 * p[k] + 2.0 * x * dp[k] - dp[k - 1],
                BasisId::Ultraspherical(l) => {
                    let l = l as f64;
                    (2.0 * (kf + l) * (p[k] + x * dp[k]) - (kf + 2.0 * l - 1.0) * dp[k - 1]) / (kf + 1.0)
                }
            };
        }
        dp[n]
    }
}
