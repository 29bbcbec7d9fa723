//! End-to-end acceptance suite. Each test prints one PASS/FAIL line.

use std::f64::consts::PI;
use std::time::Instant;

use gentau::assembly::{InteriorTest, RowKind};
use gentau::field::{evaluate_at, evaluate_grid, integrate, project_face, uniform_points};
use gentau::solver::{solve_dense, solve_schur_2d};
use gentau::tau::{counting_identity, QuotientIndexSet};
use faer::c64;
use gentau::*;
use gentau_harness::checks::check_counting;
use gentau_harness::config::{bundled, ExperimentConfig};
use gentau_harness::experiment::{assemble_at, error_norms, run_experiment, solve_at};
use gentau_harness::fd::fd_oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(name: &str, passed: bool, detail: String) {
    println!("{} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "{name}: {detail}");
}

fn with_n(name: &str, n: Vec<usize>) -> ExperimentConfig {
    let mut cfg = bundled(name).unwrap();
    cfg.n = n;
    cfg
}

fn dirichlet2d() -> Vec<Vec<BoundaryOperator>> {
    (0..2).map(|j| vec![BoundaryOperator::dirichlet(j, Side::Low), BoundaryOperator::dirichlet(j, Side::High)]).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[test]
fn counting_identities() {
    let start = Instant::now();
    let suite = check_counting();
    let mut mismatches = Vec::new();
    for d in 1..=3u32 {
        for b in [2usize, 4] {
            for n in 8..=32usize {
                let choose = |k: u32| (0..k).fold(1u128, |acc, i| acc * (d - i) as u128 / (i + 1) as u128);
                let levels: Vec<u128> = (0..=d).map(|k| choose(k) * (b as u128).pow(k) * ((n - b) as u128).pow(d - k)).collect();
                let table = counting_identity(d as usize, n, b).unwrap();
                let quotient = QuotientIndexSet::isotropic(d as usize, n, b).unwrap().level_counts();
                let lib_levels: Vec<u128> = table.levels.iter().map(|l| l.2).collect();
                let sum_ok = levels.iter().sum::<u128>() == (n as u128).pow(d);
                let quotient_ok = (1..=d as usize).all(|k| quotient[k] as u128 == levels[k]);
                if !(sum_ok && lib_levels == levels && quotient_ok) {
                    mismatches.push((d, b, n));
                }
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    let passed = suite.is_ok() && mismatches.is_empty() && seconds < 1.0;
    verdict("counting identities", passed, format!("suite {suite:?}, {} mismatches, {seconds:.3} s", mismatches.len()));
}

#[test]
fn poisson_dirichlet_self_convergence() {
    let cfg = with_n("poisson2d-dirichlet", vec![64, 128]);
    let out = run_experiment(&cfg).unwrap();
    let (e64, e128) = (out.report.rows[0].error_inf, out.report.rows[1].error_inf);
    let slowest = out.report.rows.iter().map(|r| r.solve_seconds).fold(0.0, f64::max);
    let passed = e128 < 1e-8 && e64 / e128 >= 1e4 && slowest < 60.0;
    verdict("2D Poisson Dirichlet", passed, format!("error_inf N=64 {e64:.3e}, N=128 {e128:.3e}, slowest solve {slowest:.2} s"));
}

#[test]
fn poisson_neumann_and_robin() {
    let strip = |rows: &[RowKind], cols: &[ColKind]| -> (Vec<RowKind>, Vec<ColKind>) {
        (
            rows.iter().filter(|r| **r != RowKind::Gauge).cloned().collect(),
            cols.iter().filter(|c| **c != ColKind::Gauge).cloned().collect(),
        )
    };
    let maps: Vec<_> = ["poisson2d-dirichlet", "poisson2d-neumann", "poisson2d-robin"]
        .iter()
        .map(|name| {
            let sys = assemble_at(&bundled(name).unwrap(), 128).unwrap();
            strip(sys.rows(), sys.cols())
        })
        .collect();
    let same_structure = maps[1] == maps[0] && maps[2] == maps[0];

    let mut errors = Vec::new();
    for name in ["poisson2d-neumann", "poisson2d-robin"] {
        let out = run_experiment(&with_n(name, vec![128])).unwrap();
        errors.push(out.report.rows[0].error_inf);
    }
    let neumann = bundled("poisson2d-neumann").unwrap();
    let (_, result, _) = solve_at(&neumann, 128).unwrap();
    let mean = integrate(&result.u, &neumann.domain) / 4.0;

    let passed = same_structure && errors.iter().all(|&e| e < 1e-7) && mean.abs() < 1e-10;
    verdict(
        "2D Poisson Neumann/Robin",
        passed,
        format!("same row/column maps {same_structure}, error_inf Neumann {:.3e}, Robin {:.3e}, Neumann mean {mean:.3e}", errors[0], errors[1]),
    );
}

#[test]
fn biharmonic_3d_manufactured() {
    let cfg = with_n("biharmonic3d", vec![24]);
    let start = Instant::now();
    let (_, result, _) = solve_at(&cfg, 24).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    let tp = 2.0 * PI;
    let exact = |p: &[f64]| (tp * p[0]).sin() * (tp * p[1]).cos() * (1.0 - (tp * p[2]).cos());
    let points: Vec<Vec<f64>> = (0..3).map(|_| uniform_points((0.0, 1.0), 61)).collect();
    let values = evaluate_grid(&result.u, &cfg.domain, &points).unwrap();
    let mut err = 0.0f64;
    for (flat, idx) in gentau::tensor::MultiIndex::new(values.extents()).enumerate() {
        let p = [points[0][idx[0]], points[1][idx[1]], points[2][idx[2]]];
        err = err.max((values.values()[flat] - exact(&p)).abs());
    }
    verdict("3D biharmonic manufactured", err < 1e-8 && seconds < 600.0, format!("max error {err:.3e} at N = 24, {seconds:.1} s"));
}

#[test]
fn plate_spectrum_alpha_dependence() {
    let mut exact: Vec<f64> = (1..=40).flat_map(|m| (1..=40).map(move |n| PI.powi(4) * ((m * m + n * n) as f64).powi(2))).collect();
    exact.sort_by(f64::total_cmp);
    let deviations = |alpha: u32, count: usize| -> Vec<f64> {
        let mut cfg = bundled("biharmonic2d-eig").unwrap();
        cfg.tau.alpha = Some(alpha);
        let spectrum = solve_eig(&assemble_at(&cfg, 32).unwrap()).unwrap();
        (0..count).map(|k| (spectrum.eigenvalues[k] - c64::new(exact[k], 0.0)).norm() / exact[k]).collect()
    };
    let high = deviations(4, 10);
    let low = deviations(0, 40);
    let worst_high = high.iter().fold(0.0f64, |a, &b| a.max(b));
    let worst_low = low.iter().fold(0.0f64, |a, &b| a.max(b));
    let degenerate = high[1] < 1e-6 && high[2] < 1e-6;
    let passed = worst_high < 1e-6 && degenerate && worst_low > 0.1;
    verdict(
        "plate spectrum",
        passed,
        format!("alpha=4 lowest 10 worst rel. error {worst_high:.3e}; alpha=0 lowest 40 worst deviation {worst_low:.3e} (needs > 1e-1)"),
    );
}

#[test]
fn naive_scheme_singularity() {
    let ratio = |tau: TauSpec| {
        let spec = ProblemSpec::isotropic(Equation::Poisson, 12, (-1.0, 1.0), dirichlet2d()).with_tau(tau);
        let sv = assemble(&spec, &CoeffTensor::full(vec![12, 12])).unwrap().singular_values();
        sv[sv.len() - 1] / sv[0]
    };
    let (naive, dihedral) = (ratio(TauSpec::standard(2).naive()), ratio(TauSpec::standard(2)));
    verdict("naive-scheme singularity", naive < 1e-10 && dihedral > 1e-6, format!("σ_min/σ_max naive {naive:.3e}, dihedral {dihedral:.3e}"));
}

#[test]
fn tau_equivalence_of_test_spaces() {
    let n = 16;
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut us = Vec::new();
        for test in [InteriorTest::Ultraspherical, InteriorTest::Collocation] {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let mut spec = ProblemSpec::isotropic(Equation::Poisson, n, (-1.0, 1.0), dirichlet2d()).with_test(test);
            let f = CoeffTensor::from_fn(vec![0, 1], vec![n, n], |_| rng.gen_range(-1.0..1.0));
            for axis in 0..2 {
                for k in 0..2 {
                    spec.set_data(axis, k, CoeffTensor::from_fn(vec![1 - axis], vec![n], |_| rng.gen_range(-1.0..1.0))).unwrap();
                }
            }
            us.push(solve(&assemble(&spec, &f).unwrap()).unwrap().u.into_values());
        }
        worst = worst.max(max_diff(&us[0], &us[1]) / max_abs(&us[0]));
    }
    verdict("tau equivalence", worst < 1e-8, format!("max relative difference {worst:.3e} over 20 random problems at N = 16"));
}

fn corner_problem(scheme: CornerScheme, g: impl Fn(usize, Side, &[f64]) -> f64) -> CoeffTensor {
    let n = 20;
    let domain = [(-1.0, 1.0), (-1.0, 1.0)];
    let mut spec = ProblemSpec::isotropic(Equation::Poisson, n, (-1.0, 1.0), dirichlet2d()).with_tau(TauSpec::standard(2).with_scheme(scheme));
    for axis in 0..2 {
        for (k, side) in [Side::Low, Side::High].into_iter().enumerate() {
            spec.set_data(axis, k, project_face(&[n, n], &domain, axis, side, |p| g(axis, side, p)).unwrap()).unwrap();
        }
    }
    solve(&assemble(&spec, &CoeffTensor::full(vec![n, n])).unwrap()).unwrap().u
}

#[test]
fn corner_scheme_consistency() {
    // Corner-continuous data from a harmonic polynomial.
    let smooth = |_: usize, _: Side, p: &[f64]| p[0] * p[0] - p[1] * p[1] + 3.0 * p[0] * p[1] + p[1];
    let dihedral = corner_problem(CornerScheme::Dihedral, smooth);
    let spread = [CornerScheme::Clockwise, CornerScheme::EastWest]
        .into_iter()
        .map(|s| max_diff(dihedral.values(), corner_problem(s, smooth).values()))
        .fold(0.0, f64::max);
    let step = corner_problem(CornerScheme::Dihedral, |axis, side, _| if axis == 1 && side == Side::High { 1.0 } else { 0.0 });
    let nw = evaluate_at(&step, &[(-1.0, 1.0), (-1.0, 1.0)], &[-1.0, 1.0]).unwrap();
    let passed = spread < 1e-10 && (nw - 0.5).abs() < 1e-10;
    verdict("corner schemes", passed, format!("scheme spread {spread:.3e}, dihedral u(NW) - 0.5 = {:.3e}", nw - 0.5));
}

#[test]
fn finite_difference_cross_check() {
    let cfg = bundled("poisson2d-dirichlet").unwrap();
    let fd = fd_oracle(&cfg, 201).unwrap();
    let (_, result, _) = solve_at(&cfg, 64).unwrap();
    let spectral = evaluate_grid(&result.u, &cfg.domain, &[fd.x.clone(), fd.y.clone()]).unwrap();
    let (diff, _) = error_norms(spectral.values(), &fd.values);
    verdict("finite-difference oracle", diff < 5e-3, format!("max |spectral N=64 - FD M=201| = {diff:.3e}"));
}

#[test]
fn schur_path_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut sizes_ok = true;
    for n in [8, 16, 32] {
        let mut sys = assemble(&ProblemSpec::isotropic(Equation::Poisson, n, (-1.0, 1.0), dirichlet2d()), &CoeffTensor::full(vec![n, n])).unwrap();
        for _ in 0..20 {
            sys.set_rhs((0..sys.size()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let dense = solve_dense(&sys).unwrap();
            let (schur, report) = solve_schur_2d(&sys).unwrap();
            sizes_ok &= report.schur_block == (n - 2) * (n - 2);
            worst = worst.max(max_diff(dense.u.values(), schur.u.values()) / max_abs(dense.u.values()));
        }
    }
    verdict("Schur path", worst < 1e-10 && sizes_ok, format!("max relative difference {worst:.3e}, Schur block (N-2)^2 {sizes_ok}"));
}
