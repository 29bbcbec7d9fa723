//! Second-order finite differences for 2D Dirichlet Poisson problems, as an
//! independent low-order cross-check of spectral solutions.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use gentau::{Equation, Side};
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::expr::{EvalError, Sampler};

#[derive(Debug, Error)]
pub enum FdError {
    #[error("finite-difference oracle handles 2D Dirichlet Poisson problems only: {0}")]
    Scope(String),
    #[error("grid size must be odd and at least 51, got {0}")]
    GridSize(usize),
    #[error(transparent)]
    Expression(#[from] EvalError),
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
}

/// Nodal values on an `m × m` uniform grid including the boundary;
/// `values[i * m + j] = u(x[i], y[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
}

impl FdSolution {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.y.len() + j]
    }
}

/// Five-point solve of `Δu = f`, `u = g` on the boundary of `domain`.
pub fn fd_poisson_2d(
    f: impl Fn(f64, f64) -> f64,
    g: impl Fn(f64, f64) -> f64,
    domain: [(f64, f64); 2],
    m: usize,
) -> Result<FdSolution, FdError> {
    if m < 51 || m % 2 == 0 {
        return Err(FdError::GridSize(m));
    }
    let line = |(a, b): (f64, f64)| -> Vec<f64> { (0..m).map(|i| if i == m - 1 { b } else { a + (b - a) * i as f64 / (m - 1) as f64 }).collect() };
    let (x, y) = (line(domain[0]), line(domain[1]));
    let hx2 = ((domain[0].1 - domain[0].0) / (m - 1) as f64).powi(2);
    let hy2 = ((domain[1].1 - domain[1].0) / (m - 1) as f64).powi(2);

    let mut values = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i == 0 || j == 0 || i == m - 1 || j == m - 1 {
                values[i * m + j] = g(x[i], y[j]);
            }
        }
    }
    let k = m - 2;
    let id = |i: usize, j: usize| (i - 1) * k + (j - 1);
    let mut triplets = Vec::with_capacity(5 * k * k);
    let mut rhs = Mat::<f64>::zeros(k * k, 1);
    for i in 1..m - 1 {
        for j in 1..m - 1 {
            let row = id(i, j);
            triplets.push(Triplet::new(row, row, -2.0 / hx2 - 2.0 / hy2));
            let mut r = f(x[i], y[j]);
            for (ni, nj, h2) in [(i - 1, j, hx2), (i + 1, j, hx2), (i, j - 1, hy2), (i, j + 1, hy2)] {
                if ni == 0 || nj == 0 || ni == m - 1 || nj == m - 1 {
                    r -= values[ni * m + nj] / h2;
                } else {
                    triplets.push(Triplet::new(row, id(ni, nj), 1.0 / h2));
                }
            }
            rhs[(row, 0)] = r;
        }
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(k * k, k * k, &triplets).map_err(|e| FdError::Factorization(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| FdError::Factorization(format!("{e:?}")))?;
    lu.solve_in_place(rhs.as_mut());
    for i in 1..m - 1 {
        for j in 1..m - 1 {
            values[i * m + j] = rhs[(id(i, j), 0)];
        }
    }
    Ok(FdSolution { x, y, values })
}

/// The configured problem on an `m × m` grid.
pub fn fd_oracle(cfg: &ExperimentConfig, m: usize) -> Result<FdSolution, FdError> {
    if cfg.equation != Equation::Poisson || cfg.dim() != 2 {
        return Err(FdError::Scope(format!("`{}` is not a 2D Poisson problem", cfg.name)));
    }
    if let Some(e) = cfg.bcs.iter().flatten().find(|e| e.operator.normal_poly() != [1.0]) {
        return Err(FdError::Scope(format!("`{}` is not a Dirichlet condition", e.operator.label())));
    }
    let g_for = |axis: usize, side: Side| cfg.bcs[axis].iter().find(|e| e.operator.side() == side).map(|e| Sampler::new(&e.g)).unwrap();
    let faces = [g_for(0, Side::Low), g_for(0, Side::High), g_for(1, Side::Low), g_for(1, Side::High)];
    let forcing = Sampler::new(&cfg.forcing);
    let [(x0, x1), (y0, _)] = [cfg.domain[0], cfg.domain[1]];
    let sol = fd_poisson_2d(
        |x, y| forcing.sample(&[x, y]),
        |x, y| {
            let face = if x == x0 {
                &faces[0]
            } else if x == x1 {
                &faces[1]
            } else if y == y0 {
                &faces[2]
            } else {
                &faces[3]
            };
            face.sample(&[x, y])
        },
        [cfg.domain[0], cfg.domain[1]],
        m,
    )?;
    forcing.finish()?;
    for face in faces {
        face.finish()?;
    }
    Ok(sol)
}
