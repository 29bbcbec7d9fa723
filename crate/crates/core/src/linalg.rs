//! Thin dense helpers over faer.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Col, Mat};

pub(crate) fn mat_from_row_major(rows: usize, cols: usize, data: &[f64]) -> Mat<f64> {
    Mat::from_fn(rows, cols, |i, j| data[i * cols + j])
}

/// Singular values in decreasing order.
pub(crate) fn singular_values(a: &Mat<f64>) -> Vec<f64> {
    let mut s = a.singular_values().expect("svd converges");
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub(crate) struct DenseLu {
    lu: PartialPivLu<f64>,
    /// min |U_ii| / max |A_ij|
    pub(crate) pivot_ratio: f64,
}

impl DenseLu {
    pub(crate) fn new(a: &Mat<f64>) -> Self {
        let lu = a.partial_piv_lu();
        let scale = max_abs(a);
        let u = lu.U();
        let min_pivot = (0..u.nrows().min(u.ncols())).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        let pivot_ratio = if scale > 0.0 { min_pivot / scale } else { 0.0 };
        DenseLu { lu, pivot_ratio }
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Col::from_fn(b.len(), |i| b[i]);
        let x = self.lu.solve(&rhs);
        (0..x.nrows()).map(|i| x[i]).collect()
    }

    pub(crate) fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Col::from_fn(b.len(), |i| b[i]);
        let x = self.lu.solve_transpose(&rhs);
        (0..x.nrows()).map(|i| x[i]).collect()
    }
}

pub(crate) fn max_abs(a: &Mat<f64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}
