//! Running configured experiments: assemble and solve for every N, then
//! compare against the configured reference on a uniform plot grid.

use std::time::Instant;

use gentau::assembly::AssemblyError;
use gentau::field::{evaluate_grid, project, project_face, uniform_points, FieldError};
use gentau::tensor::MultiIndex;
use gentau::{assemble, solve, solve_eig, AssembledSystem, CoeffTensor, ProblemSpec, SolveResult, SolverError, Spectrum};
use thiserror::Error;

use crate::config::{ExperimentConfig, Reference};
use crate::expr::{EvalError, Expr, Sampler};

/// Points per axis of the evaluation grid.
pub const PLOT_POINTS: usize = 101;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Expression(#[from] EvalError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("N = {n}: {source}")]
    Assembly { n: usize, source: AssemblyError },
    #[error("N = {n}: {source}")]
    Solver { n: usize, source: SolverError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error_inf: f64,
    pub error_2: f64,
    pub solve_seconds: f64,
    pub condition_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub name: String,
    pub rows: Vec<ConvergenceRow>,
}

/// Solution values on the tensor grid `points` (row-major, last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ConvergenceReport,
    pub snapshots: Vec<Snapshot>,
    pub spectra: Vec<(usize, Spectrum)>,
}

fn sample_project(extents: &[usize], domain: &[(f64, f64)], e: &Expr) -> Result<CoeffTensor, ExperimentError> {
    let s = Sampler::new(e);
    let t = project(extents, domain, |p| s.sample(p))?;
    s.finish()?;
    Ok(t)
}

/// Problem specification and forcing coefficients at truncation `n`.
pub fn build_problem(cfg: &ExperimentConfig, n: usize) -> Result<(ProblemSpec, CoeffTensor), ExperimentError> {
    let d = cfg.dim();
    let extents = vec![n; d];
    let operators = cfg.bcs.iter().map(|list| list.iter().map(|e| e.operator.clone()).collect()).collect();
    let mut spec = ProblemSpec::new(cfg.equation, extents.clone(), cfg.domain.clone(), operators)
        .with_tau(cfg.tau_spec())
        .with_gauge(cfg.gauge)
        .with_test(cfg.test);
    for (axis, list) in cfg.bcs.iter().enumerate() {
        for (k, entry) in list.iter().enumerate() {
            if entry.g.is_zero() {
                continue;
            }
            let s = Sampler::new(&entry.g);
            let data = if d == 1 {
                let face = match entry.operator.side() {
                    gentau::Side::Low => cfg.domain[0].0,
                    gentau::Side::High => cfg.domain[0].1,
                };
                CoeffTensor::scalar(s.sample(&[face]))
            } else {
                project_face(&extents, &cfg.domain, axis, entry.operator.side(), |p| s.sample(p))?
            };
            s.finish()?;
            spec.set_data(axis, k, data).map_err(|source| ExperimentError::Assembly { n, source })?;
        }
    }
    let f = if cfg.forcing.is_zero() { CoeffTensor::full(extents.clone()) } else { sample_project(&extents, &cfg.domain, &cfg.forcing)? };
    Ok((spec, f))
}

pub fn assemble_at(cfg: &ExperimentConfig, n: usize) -> Result<AssembledSystem, ExperimentError> {
    let (spec, f) = build_problem(cfg, n)?;
    assemble(&spec, &f).map_err(|source| ExperimentError::Assembly { n, source })
}

/// Assemble and solve; returns the result and the wall time of both steps.
pub fn solve_at(cfg: &ExperimentConfig, n: usize) -> Result<(AssembledSystem, SolveResult, f64), ExperimentError> {
    let start = Instant::now();
    let sys = assemble_at(cfg, n)?;
    let result = solve(&sys).map_err(|source| ExperimentError::Solver { n, source })?;
    Ok((sys, result, start.elapsed().as_secs_f64()))
}

pub fn plot_grid(cfg: &ExperimentConfig) -> Vec<Vec<f64>> {
    cfg.domain.iter().map(|&iv| uniform_points(iv, PLOT_POINTS)).collect()
}

pub fn snapshot(cfg: &ExperimentConfig, n: usize, u: &CoeffTensor) -> Result<Snapshot, ExperimentError> {
    let points = plot_grid(cfg);
    let values = evaluate_grid(u, &cfg.domain, &points)?.into_values();
    Ok(Snapshot { n, points, values })
}

/// `e` sampled on the tensor grid, in snapshot order.
pub fn sample_grid(e: &Expr, points: &[Vec<f64>]) -> Result<Vec<f64>, EvalError> {
    let extents: Vec<usize> = points.iter().map(Vec::len).collect();
    let mut p = vec![0.0; points.len()];
    MultiIndex::new(&extents)
        .map(|idx| {
            for (j, &i) in idx.iter().enumerate() {
                p[j] = points[j][i];
            }
            e.eval(&p)
        })
        .collect()
}

/// `(max |a - b|, rms(a - b))`.
pub fn error_norms(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut inf = 0.0f64;
    let mut sq = 0.0;
    for (x, y) in a.iter().zip(b) {
        let e = (x - y).abs();
        inf = inf.max(e);
        sq += e * e;
    }
    (inf, (sq / a.len().max(1) as f64).sqrt())
}

/// Relative errors of the lowest computed eigenvalues against `exact`.
pub fn eigen_errors(spectrum: &Spectrum, exact: &[f64]) -> Vec<f64> {
    exact
        .iter()
        .enumerate()
        .map(|(k, &e)| match spectrum.eigenvalues.get(k) {
            Some(z) => ((z.re - e).powi(2) + z.im.powi(2)).sqrt() / e.abs(),
            None => f64::INFINITY,
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    let mut rows = Vec::new();
    let mut snapshots = Vec::new();
    let mut spectra = Vec::new();
    match &cfg.reference {
        Reference::EigenExact { formula, modes } => {
            let exact = formula.lowest(&cfg.domain, *modes);
            for &n in &cfg.n {
                let start = Instant::now();
                let sys = assemble_at(cfg, n)?;
                let spectrum = solve_eig(&sys).map_err(|source| ExperimentError::Solver { n, source })?;
                let rel = eigen_errors(&spectrum, &exact);
                let zeros = vec![0.0; rel.len()];
                let (error_inf, error_2) = error_norms(&rel, &zeros);
                rows.push(ConvergenceRow { n, error_inf, error_2, solve_seconds: start.elapsed().as_secs_f64(), condition_estimate: f64::NAN });
                spectra.push((n, spectrum));
            }
        }
        reference => {
            let points = plot_grid(cfg);
            let truth = match reference {
                Reference::SelfConverge { n_ref } => {
                    let (_, r, _) = solve_at(cfg, *n_ref)?;
                    snapshot(cfg, *n_ref, &r.u)?.values
                }
                Reference::Manufactured(u) => sample_grid(u, &points)?,
                Reference::EigenExact { .. } => unreachable!(),
            };
            for &n in &cfg.n {
                let (_, result, seconds) = solve_at(cfg, n)?;
                let snap = snapshot(cfg, n, &result.u)?;
                let (error_inf, error_2) = error_norms(&snap.values, &truth);
                rows.push(ConvergenceRow { n, error_inf, error_2, solve_seconds: seconds, condition_estimate: result.condition_estimate });
                snapshots.push(snap);
            }
        }
    }
    Ok(ExperimentOutput { report: ConvergenceReport { name: cfg.name.clone(), rows }, snapshots, spectra })
}
