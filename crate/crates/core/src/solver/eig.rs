use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef};

use super::SolverError;
use crate::assembly::AssembledSystem;

/// Generalized eigenvalues with `|σ|` above this are constraint-row
/// (infinite) eigenvalues.
pub const INFINITE_CUTOFF: f64 = 1e12;

/// Relative threshold for rank decisions during deflation.
const RANK_TOL: f64 = 1e-10;

/// Finite generalized eigenvalues, sorted by magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<c64>,
    pub finite_count: usize,
    /// Eigenvalues discarded as infinite.
    pub infinite_count: usize,
}

impl Spectrum {
    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }
}

fn select(m: MatRef<'_, f64>, rows: &[usize], cols: &[usize]) -> Mat<f64> {
    Mat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Orthonormal basis of the complement of `range(a)`, checking that `a`
/// has full column rank.
fn range_complement(a: MatRef<'_, f64>, what: &str) -> Result<Mat<f64>, SolverError> {
    let (n, k) = (a.nrows(), a.ncols());
    if k == 0 {
        return Ok(Mat::identity(n, n));
    }
    let qr = a.qr();
    let r = qr.R();
    let diag: Vec<f64> = (0..k.min(n)).map(|i| r[(i, i)].abs()).collect();
    let top = diag.iter().fold(0.0, |m: f64, v| m.max(*v));
    if k > n || diag.iter().any(|&v| v <= RANK_TOL * top) {
        return Err(SolverError::Eigen(format!("{what} are linearly dependent")));
    }
    let q = qr.compute_Q();
    Ok(q.subcols(k, n - k).to_owned())
}

/// Solve `M x = σ B x` where `B` is the interior mass operator of the
/// system (zero on boundary, interface and tau rows and columns).
///
/// The infinite eigenvalues are deflated exactly before any iteration:
/// tau columns are annihilated from the left, the constraint rows are
/// imposed through a null-space basis, and the remaining pencil has a
/// nonsingular mass block, so a standard eigensolve of its reduction
/// yields the finite spectrum.
pub fn solve_eig(sys: &AssembledSystem) -> Result<Spectrum, SolverError> {
    let n = sys.size();
    let mass = sys.mass_matrix();
    let a = sys.matrix().to_dense();
    let b = mass.to_dense();

    let mut row_has = vec![false; n];
    let mut col_has = vec![false; n];
    for (i, j, _) in mass.entries() {
        row_has[i] = true;
        col_has[j] = true;
    }
    let all: Vec<usize> = (0..n).collect();
    let mass_cols: Vec<usize> = all.iter().copied().filter(|&j| col_has[j]).collect();
    let free_cols: Vec<usize> = all.iter().copied().filter(|&j| !col_has[j]).collect();
    let mass_rows: Vec<usize> = all.iter().copied().filter(|&i| row_has[i]).collect();

    // Left annihilator of the massless columns: W (m x n), W A[:, free] = 0.
    let w = range_complement(select(a.as_ref(), &all, &free_cols).as_ref(), "massless columns")?.transpose().to_owned();
    let a1 = &w * select(a.as_ref(), &all, &mass_cols);
    let b1 = &w * select(b.as_ref(), &all, &mass_cols);
    let m = a1.nrows();

    // Combinations of the reduced rows that carry no mass are constraints.
    let wr = select(w.as_ref(), &(0..m).collect::<Vec<_>>(), &mass_rows);
    let svd = wr.svd().map_err(|e| SolverError::Eigen(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let rank = (0..s.nrows()).filter(|&i| s[i] > RANK_TOL).count();
    let u = svd.U();
    let (v1, v0) = (u.subcols(0, rank), u.subcols(rank, m - rank));

    let mut constraints = v0.transpose() * &a1;
    for i in 0..constraints.nrows() {
        let norm = constraints.row(i).norm_l2();
        if norm > 0.0 {
            constraints.row_mut(i).iter_mut().for_each(|v| *v /= norm);
        }
    }
    let z = range_complement(constraints.transpose(), "constraint rows")?;
    let ar = v1.transpose() * &a1 * &z;
    let br = v1.transpose() * &b1 * &z;
    let lu = br.partial_piv_lu();
    let reduced = lu.solve(&ar);
    if !reduced.as_ref().col_iter().all(|c| c.iter().all(|v| v.is_finite())) {
        return Err(SolverError::Eigen("reduced mass block is singular".into()));
    }
    let values = reduced.eigenvalues().map_err(|e| SolverError::Eigen(format!("{e:?}")))?;

    let mut infinite_count = n - values.len();
    let mut finite = Vec::with_capacity(values.len());
    for sigma in values {
        if !sigma.re.is_finite() || !sigma.im.is_finite() || sigma.norm() > INFINITE_CUTOFF {
            infinite_count += 1;
        } else {
            finite.push(sigma);
        }
    }
    finite.sort_by(|x, y| x.norm().total_cmp(&y.norm()).then(x.re.total_cmp(&y.re)).then(x.im.total_cmp(&y.im)));
    Ok(Spectrum { finite_count: finite.len(), eigenvalues: finite, infinite_count })
}
