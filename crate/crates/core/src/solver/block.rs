use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Mat};

use super::{finish, singular, Factored, Method, SolveResult, SolverError};
use crate::assembly::{AssembledSystem, BlockPartition};
use crate::linalg::DenseLu;
use crate::sparse::SparseMatrix;

const PIVOT_TOLERANCE: f64 = 1e-14;

/// Rows of a sub-block as `(local row, local col, value)` lists.
struct Block {
    entries: Vec<(usize, usize, f64)>,
}

impl Block {
    /// `out[row] += Σ a · x[col]`
    fn mul_add(&self, x: &[f64], out: &mut [f64], sign: f64) {
        for &(i, k, a) in &self.entries {
            out[i] += sign * a * x[k];
        }
    }

    /// `out[col] += Σ a · y[row]`
    fn tmul_add(&self, y: &[f64], out: &mut [f64], sign: f64) {
        for &(i, k, a) in &self.entries {
            out[k] += sign * a * y[i];
        }
    }
}

struct TauRow {
    col: usize,
    row: usize,
    pivot: f64,
    others: Vec<(usize, f64)>,
}

pub(super) struct BlockFactor {
    n: usize,
    part: BlockPartition,
    a11: Lu<usize, f64>,
    a21: Block,
    /// `A11⁻¹ A12`, principal × rest.
    x: Mat<f64>,
    schur: DenseLu,
    taus: Vec<TauRow>,
}

#[derive(Clone, Copy)]
enum Slot {
    Principal(usize),
    Rest(usize),
    Tau,
}

impl BlockFactor {
    pub(super) fn new(sys: &AssembledSystem, m: &SparseMatrix) -> Result<Self, SolverError> {
        let part = sys.block_partition().map_err(SolverError::Precondition)?;
        let n = sys.size();
        let mut row_slot = vec![Slot::Tau; n];
        let mut col_slot = vec![Slot::Tau; n];
        for (k, &i) in part.principal_rows.iter().enumerate() {
            row_slot[i] = Slot::Principal(k);
        }
        for (k, &i) in part.rest_rows.iter().enumerate() {
            row_slot[i] = Slot::Rest(k);
        }
        for (k, &j) in part.principal_cols.iter().enumerate() {
            col_slot[j] = Slot::Principal(k);
        }
        for (k, &j) in part.rest_cols.iter().enumerate() {
            col_slot[j] = Slot::Rest(k);
        }
        let p = part.principal_rows.len();
        let r = part.rest_rows.len();

        let mut a11 = Vec::new();
        let mut a12 = Mat::<f64>::zeros(p, r);
        let mut a21 = Vec::new();
        let mut a22 = Mat::<f64>::zeros(r, r);
        for (i, j, v) in m.entries() {
            match (row_slot[i], col_slot[j]) {
                (Slot::Principal(a), Slot::Principal(b)) => a11.push(Triplet::new(a, b, v)),
                (Slot::Principal(a), Slot::Rest(b)) => a12[(a, b)] = v,
                (Slot::Rest(a), Slot::Principal(b)) => a21.push((a, b, v)),
                (Slot::Rest(a), Slot::Rest(b)) => a22[(a, b)] = v,
                _ => {}
            }
        }
        let taus = part
            .tau_pairs
            .iter()
            .map(|&(col, row)| {
                let (cols, vals) = m.row(row);
                let pivot = m.get(row, col);
                let others = cols.iter().zip(vals).filter(|(&c, _)| c != col).map(|(&c, &v)| (c, v)).collect();
                TauRow { col, row, pivot, others }
            })
            .collect();

        let a11 = SparseColMat::<usize, f64>::try_new_from_triplets(p, p, &a11)
            .map_err(|e| SolverError::Precondition(format!("principal block: {e:?}")))?;
        let a11 = a11.sp_lu().map_err(|e| singular(sys, format!("principal block factorization: {e:?}")))?;
        let mut x = a12;
        a11.solve_in_place(x.as_mut());
        if (0..r).any(|c| (0..p).any(|k| !x[(k, c)].is_finite())) {
            return Err(singular(sys, "principal block is singular".into()));
        }
        let mut s = a22;
        for c in 0..r {
            for &(i, k, a) in &a21 {
                s[(i, c)] -= a * x[(k, c)];
            }
        }
        let schur = DenseLu::new(&s);
        drop(s);
        if !(schur.pivot_ratio >= PIVOT_TOLERANCE) {
            return Err(singular(sys, format!("Schur complement pivot ratio {:e}", schur.pivot_ratio)));
        }
        Ok(BlockFactor { n, part, a11, a21: Block { entries: a21 }, x, schur, taus })
    }

    pub(super) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let part = &self.part;
        let mut y = Mat::<f64>::from_fn(part.principal_rows.len(), 1, |k, _| rhs[part.principal_rows[k]]);
        self.a11.solve_in_place(y.as_mut());
        let y: Vec<f64> = (0..y.nrows()).map(|k| y[(k, 0)]).collect();
        let mut r2: Vec<f64> = part.rest_rows.iter().map(|&i| rhs[i]).collect();
        self.a21.mul_add(&y, &mut r2, -1.0);
        let x2 = self.schur.solve(&r2);
        let correction = &self.x * Col::from_fn(x2.len(), |c| x2[c]);
        let mut out = vec![0.0; self.n];
        for (k, &j) in part.principal_cols.iter().enumerate() {
            out[j] = y[k] - correction[k];
        }
        for (k, &j) in part.rest_cols.iter().enumerate() {
            out[j] = x2[k];
        }
        for t in &self.taus {
            let known: f64 = t.others.iter().map(|&(c, v)| v * out[c]).sum();
            out[t.col] = (rhs[t.row] - known) / t.pivot;
        }
        out
    }

    pub(super) fn solve_transpose(&self, rhs: &[f64]) -> Vec<f64> {
        let part = &self.part;
        let mut out = vec![0.0; self.n];
        let mut c = rhs.to_vec();
        for t in &self.taus {
            let y = rhs[t.col] / t.pivot;
            out[t.row] = y;
            for &(col, v) in &t.others {
                c[col] -= v * y;
            }
        }
        let c1: Vec<f64> = part.principal_cols.iter().map(|&j| c[j]).collect();
        let mut c2: Vec<f64> = part.rest_cols.iter().map(|&j| c[j]).collect();
        let xt = self.x.transpose() * Col::from_fn(c1.len(), |k| c1[k]);
        for (col, v) in c2.iter_mut().enumerate() {
            *v -= xt[col];
        }
        let y2 = self.schur.solve_transpose(&c2);
        let mut rhs1 = c1;
        self.a21.tmul_add(&y2, &mut rhs1, -1.0);
        let mut y1 = Mat::<f64>::from_fn(rhs1.len(), 1, |k, _| rhs1[k]);
        self.a11.solve_transpose_in_place(y1.as_mut());
        for (k, &i) in part.principal_rows.iter().enumerate() {
            out[i] = y1[(k, 0)];
        }
        for (k, &i) in part.rest_rows.iter().enumerate() {
            out[i] = y2[k];
        }
        out
    }
}

/// Block elimination for any dimension (ultraspherical interior test).
pub fn solve_block(sys: &AssembledSystem) -> Result<SolveResult, SolverError> {
    let f = Factored::new(sys, Method::Block)?;
    finish(sys, sys.rhs(), f.solve_vec(sys.rhs()), f.condition_estimate())
}

/// Block sizes of the Schur path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchurReport {
    /// Principal interior block, `(N-2)²` for the square.
    pub schur_block: usize,
    /// Solution modes coupled through the Schur complement, `4N - 4`.
    pub low_block: usize,
    /// Tau unknowns recovered after the solve, `4N + 4`.
    pub tau_block: usize,
}

/// Schur-complement solve of a 2D problem whose tau columns all eliminate
/// exactly (the standard tau choice).
pub fn solve_schur_2d(sys: &AssembledSystem) -> Result<(SolveResult, SchurReport), SolverError> {
    if sys.spec().dim() != 2 {
        return Err(SolverError::Precondition(format!("the Schur path is for squares, got dimension {}", sys.spec().dim())));
    }
    let part = sys.block_partition().map_err(SolverError::Precondition)?;
    if !part.all_taus_eliminated(sys) || part.forbidden_max(sys.matrix()) != 0.0 {
        return Err(SolverError::Precondition("tau columns do not block-triangularize the system".into()));
    }
    let report = SchurReport {
        schur_block: part.principal_rows.len(),
        low_block: part.rest_rows.len(),
        tau_block: part.tau_pairs.len(),
    };
    Ok((solve_block(sys)?, report))
}
