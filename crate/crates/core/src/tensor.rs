//! Dense coefficient tensors labelled by the physical axes they span.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("tensor has no axis {0}")]
    MissingAxis(usize),
    #[error("axis {0} listed twice")]
    DuplicateAxis(usize),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("matrix has {got} columns but axis {axis} has extent {extent}")]
    MatrixMismatch { axis: usize, extent: usize, got: usize },
}

/// A real tensor of polynomial coefficients (or samples).
///
/// `axes` names the physical dimension of each tensor index, in strictly
/// increasing order; values are row-major with the last listed axis fastest.
/// A face restriction of a `d`-tensor keeps the labels of the surviving axes.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor {
    axes: Vec<usize>,
    extents: Vec<usize>,
    values: Vec<f64>,
}

impl CoeffTensor {
    pub fn zeros(axes: Vec<usize>, extents: Vec<usize>) -> Self {
        assert_eq!(axes.len(), extents.len());
        assert!(axes.windows(2).all(|w| w[0] < w[1]), "axes must be strictly increasing");
        let len = extents.iter().product();
        CoeffTensor { axes, extents, values: vec![0.0; len] }
    }

    pub fn from_values(axes: Vec<usize>, extents: Vec<usize>, values: Vec<f64>) -> Result<Self, TensorError> {
        let mut t = Self::zeros(axes, extents);
        if values.len() != t.values.len() {
            return Err(TensorError::ShapeMismatch { expected: t.values.len(), got: values.len() });
        }
        t.values = values;
        Ok(t)
    }

    /// Full `d`-dimensional tensor over axes `0..d`.
    pub fn full(extents: Vec<usize>) -> Self {
        let axes = (0..extents.len()).collect();
        Self::zeros(axes, extents)
    }

    pub fn scalar(value: f64) -> Self {
        CoeffTensor { axes: vec![], extents: vec![], values: vec![value] }
    }

    pub fn from_fn(axes: Vec<usize>, extents: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(axes, extents);
        for (flat, idx) in MultiIndex::new(&t.extents).enumerate() {
            t.values[flat] = f(&idx);
        }
        t
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        flat_index(&self.extents, idx)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let i = self.flat_index(idx);
        self.values[i] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn position(&self, axis: usize) -> Result<usize, TensorError> {
        self.axes.iter().position(|&a| a == axis).ok_or(TensorError::MissingAxis(axis))
    }

    /// Multiply along `axis` by a row-major `rows x extent` matrix.
    pub fn apply_along(&self, axis: usize, matrix: &[f64], rows: usize) -> Result<CoeffTensor, TensorError> {
        let p = self.position(axis)?;
        let extent = self.extents[p];
        if rows == 0 || matrix.len() != rows * extent {
            return Err(TensorError::MatrixMismatch { axis, extent, got: matrix.len() / rows.max(1) });
        }
        let outer: usize = self.extents[..p].iter().product();
        let inner: usize = self.extents[p + 1..].iter().product();
        let mut extents = self.extents.clone();
        extents[p] = rows;
        let mut out = vec![0.0; outer * rows * inner];
        for o in 0..outer {
            let src = &self.values[o * extent * inner..(o + 1) * extent * inner];
            let dst = &mut out[o * rows * inner..(o + 1) * rows * inner];
            for r in 0..rows {
                let mrow = &matrix[r * extent..(r + 1) * extent];
                let drow = &mut dst[r * inner..(r + 1) * inner];
                for (k, &m) in mrow.iter().enumerate() {
                    if m == 0.0 {
                        continue;
                    }
                    let srow = &src[k * inner..(k + 1) * inner];
                    for (d, s) in drow.iter_mut().zip(srow) {
                        *d += m * s;
                    }
                }
            }
        }
        Ok(CoeffTensor { axes: self.axes.clone(), extents, values: out })
    }

    /// Contract `axis` against a row vector, removing that axis.
    pub fn contract(&self, axis: usize, row: &[f64]) -> Result<CoeffTensor, TensorError> {
        let p = self.position(axis)?;
        let reduced = self.apply_along(axis, row, 1)?;
        let mut axes = reduced.axes;
        let mut extents = reduced.extents;
        axes.remove(p);
        extents.remove(p);
        Ok(CoeffTensor { axes, extents, values: reduced.values })
    }
}

pub(crate) fn flat_index(extents: &[usize], idx: &[usize]) -> usize {
    debug_assert_eq!(extents.len(), idx.len());
    idx.iter().zip(extents).fold(0, |acc, (&i, &e)| {
        debug_assert!(i < e);
        acc * e + i
    })
}

/// Row-major iterator over all multi-indices of a box.
#[derive(Debug, Clone)]
pub struct MultiIndex {
    extents: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl MultiIndex {
    pub fn new(extents: &[usize]) -> Self {
        let current = if extents.iter().any(|&e| e == 0) { None } else { Some(vec![0; extents.len()]) };
        MultiIndex { extents: extents.to_vec(), current }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        let mut axis = next.len();
        loop {
            if axis == 0 {
                self.current = None;
                break;
            }
            axis -= 1;
            next[axis] += 1;
            if next[axis] < self.extents[axis] {
                self.current = Some(next);
                break;
            }
            next[axis] = 0;
        }
        Some(out)
    }
}
