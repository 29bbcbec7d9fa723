//! The invariant suite behind `gentau check`.

use gentau::assembly::InteriorTest;
use gentau::field::{evaluate_at, project_face};
use gentau::solver::{solve_dense, solve_schur_2d};
use gentau::tau::{boundary_tau_columns, counting_identity, interface_blocks, QuotientIndexSet};
use gentau::{assemble, BoundaryOperator, CoeffTensor, CornerScheme, Equation, ProblemSpec, Side, TauSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, result: Result<String, String>) -> CheckOutcome {
    match result {
        Ok(detail) => CheckOutcome { name, passed: true, detail },
        Err(detail) => CheckOutcome { name, passed: false, detail },
    }
}

fn dirichlet(d: usize) -> Vec<Vec<BoundaryOperator>> {
    (0..d).map(|j| vec![BoundaryOperator::dirichlet(j, Side::Low), BoundaryOperator::dirichlet(j, Side::High)]).collect()
}

fn sides(b: usize) -> Vec<Side> {
    (0..b).map(|k| if k % 2 == 0 { Side::Low } else { Side::High }).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `N^d = Σ C(d,k) b^k (N-b)^{d-k}` and the per-level sizes produced by the
/// tau and interface constructions, for `d ≤ 3`, `b ∈ {2, 4}`, `8 ≤ N ≤ 32`.
pub fn check_counting() -> Result<String, String> {
    let mut cases = 0;
    for d in 1..=3 {
        for b in [2, 4] {
            let spec = TauSpec::standard(b);
            for n in 8..=32 {
                let table = counting_identity(d, n, b).map_err(|e| e.to_string())?;
                if !table.holds {
                    return Err(format!("identity fails for d={d} b={b} N={n}: {} vs {}", table.total, n.pow(d as u32)));
                }
                let quotient = QuotientIndexSet::isotropic(d, n, b).map_err(|e| e.to_string())?.level_counts();
                let face_taus = boundary_tau_columns(&vec![n; d - 1], b, &spec).map_err(|e| e.to_string())?.len();
                let mut built = vec![0u128; d + 1];
                built[0] = ((n - b) as u128).pow(d as u32);
                built[1] = (d * b * (n.pow(d as u32 - 1) - face_taus)) as u128;
                let blocks = interface_blocks(&vec![n; d], b, &vec![sides(b); d], &spec).map_err(|e| e.to_string())?;
                for block in &blocks {
                    built[block.axes.len()] += block.constraining_rows() as u128;
                }
                for k in 0..=d {
                    let want = table.levels[k].2;
                    if built[k] != want || (k > 0 && quotient[k] as u128 != want) {
                        return Err(format!(
                            "level {k} for d={d} b={b} N={n}: formula {want}, constraints {}, quotient {}",
                            built[k], quotient[k]
                        ));
                    }
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (d, b, N) cases"))
}

/// `(naive ratio, dihedral ratio)` of smallest to largest singular value for
/// 2D Dirichlet Poisson at `n`.
pub fn naive_ratios(n: usize) -> Result<(f64, f64), String> {
    let ratio = |tau: TauSpec| -> Result<f64, String> {
        let spec = ProblemSpec::isotropic(Equation::Poisson, n, (-1.0, 1.0), dirichlet(2)).with_tau(tau);
        let sys = assemble(&spec, &CoeffTensor::full(vec![n, n])).map_err(|e| e.to_string())?;
        let sv = sys.singular_values();
        Ok(sv[sv.len() - 1] / sv[0])
    };
    Ok((ratio(TauSpec::standard(2).naive())?, ratio(TauSpec::standard(2))?))
}

pub fn check_naive() -> Result<String, String> {
    let (naive, dihedral) = naive_ratios(12)?;
    let detail = format!("σ_min/σ_max naive {naive:.3e}, dihedral {dihedral:.3e}");
    if naive < 1e-10 && dihedral > 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// A random-data 2D Dirichlet Poisson spec at `n` with the given test.
fn random_problem(rng: &mut ChaCha8Rng, n: usize, test: InteriorTest) -> (ProblemSpec, CoeffTensor) {
    let mut spec = ProblemSpec::isotropic(Equation::Poisson, n, (-1.0, 1.0), dirichlet(2)).with_test(test);
    let f = CoeffTensor::from_fn(vec![0, 1], vec![n, n], |_| rng.gen_range(-1.0..1.0));
    for axis in 0..2 {
        for k in 0..2 {
            let g = CoeffTensor::from_fn(vec![1 - axis], vec![n], |_| rng.gen_range(-1.0..1.0));
            spec.set_data(axis, k, g).expect("face data has the face shape");
        }
    }
    (spec, f)
}

/// Largest relative difference in `u` between ultraspherical-test and
/// collocation-test assemblies over `count` random problems.
pub fn tau_equivalence(seed: u64, n: usize, count: usize) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for i in 0..count {
        let mut solutions = Vec::new();
        for test in [InteriorTest::Ultraspherical, InteriorTest::Collocation] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let (spec, f) = random_problem(&mut rng, n, test);
            let sys = assemble(&spec, &f).map_err(|e| e.to_string())?;
            solutions.push(gentau::solve(&sys).map_err(|e| e.to_string())?.u.into_values());
        }
        worst = worst.max(max_diff(&solutions[0], &solutions[1]) / max_abs(&solutions[0]));
    }
    Ok(worst)
}

pub fn check_tau_equivalence(seed: u64) -> Result<String, String> {
    let rel = tau_equivalence(seed, 16, 20)?;
    let detail = format!("max relative difference {rel:.3e} over 20 problems at N = 16");
    if rel < 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Worst `(relative u difference, tau difference)` between the Schur and
/// dense paths over random right-hand sides; also checks the Schur block size.
pub fn solver_agreement(seed: u64, sizes: &[usize], count: usize) -> Result<(f64, f64), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut du, mut dt) = (0.0f64, 0.0f64);
    for &n in sizes {
        let ops = (0..2).map(|j| vec![BoundaryOperator::robin(j, Side::Low, 1.0, 1.0).unwrap(), BoundaryOperator::robin(j, Side::High, 1.0, 1.0).unwrap()]).collect();
        let spec = ProblemSpec::isotropic(Equation::Poisson, n, (-1.0, 1.0), ops);
        let mut sys = assemble(&spec, &CoeffTensor::full(vec![n, n])).map_err(|e| e.to_string())?;
        for _ in 0..count {
            let rhs = (0..sys.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            sys.set_rhs(rhs).map_err(|e| e.to_string())?;
            let dense = solve_dense(&sys).map_err(|e| e.to_string())?;
            let (schur, report) = solve_schur_2d(&sys).map_err(|e| e.to_string())?;
            if report.schur_block != (n - 2) * (n - 2) {
                return Err(format!("Schur block {} at N = {n}", report.schur_block));
            }
            du = du.max(max_diff(dense.u.values(), schur.u.values()) / max_abs(dense.u.values()));
            for (k, v) in &dense.taus {
                dt = dt.max((v - schur.taus[k]).abs() / v.abs().max(1.0));
            }
        }
    }
    Ok((du, dt))
}

pub fn check_solver_agreement(seed: u64) -> Result<String, String> {
    let (du, dt) = solver_agreement(seed, &[8, 16, 32], 20)?;
    let detail = format!("u relative {du:.3e}, taus {dt:.3e} over 60 right-hand sides");
    if du < 1e-10 && dt < 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn corner_solution(n: usize, scheme: CornerScheme, g: &dyn Fn(usize, Side, &[f64]) -> f64) -> Result<CoeffTensor, String> {
    let domain = vec![(-1.0, 1.0); 2];
    let mut spec = ProblemSpec::isotropic(Equation::Poisson, n, (-1.0, 1.0), dirichlet(2)).with_tau(TauSpec::standard(2).with_scheme(scheme));
    for axis in 0..2 {
        for (k, side) in [Side::Low, Side::High].into_iter().enumerate() {
            let data = project_face(&[n, n], &domain, axis, side, |p| g(axis, side, p)).map_err(|e| e.to_string())?;
            spec.set_data(axis, k, data).map_err(|e| e.to_string())?;
        }
    }
    let sys = assemble(&spec, &CoeffTensor::full(vec![n, n])).map_err(|e| e.to_string())?;
    Ok(gentau::solve(&sys).map_err(|e| e.to_string())?.u)
}

/// `(largest difference between corner schemes for continuous data,
/// dihedral value at the north-west corner for north = 1, others 0)`.
pub fn corner_consistency(n: usize) -> Result<(f64, f64), String> {
    let smooth = |_: usize, _: Side, p: &[f64]| p[0].exp() * p[1].cos();
    let reference = corner_solution(n, CornerScheme::Dihedral, &smooth)?;
    let mut spread = 0.0f64;
    for scheme in [CornerScheme::Clockwise, CornerScheme::EastWest] {
        spread = spread.max(max_diff(reference.values(), corner_solution(n, scheme, &smooth)?.values()));
    }
    let step = |axis: usize, side: Side, _: &[f64]| if axis == 1 && side == Side::High { 1.0 } else { 0.0 };
    let u = corner_solution(n, CornerScheme::Dihedral, &step)?;
    let nw = evaluate_at(&u, &[(-1.0, 1.0), (-1.0, 1.0)], &[-1.0, 1.0]).map_err(|e| e.to_string())?;
    Ok((spread, nw))
}

pub fn check_corners() -> Result<String, String> {
    let (spread, nw) = corner_consistency(16)?;
    let detail = format!("scheme spread {spread:.3e}, dihedral u(NW) = {nw:.12}");
    if spread < 1e-10 && (nw - 0.5).abs() < 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Every check, in a fixed order.
pub fn run_checks(seed: u64) -> Vec<CheckOutcome> {
    vec![
        outcome("counting identities", check_counting()),
        outcome("naive-mode singularity", check_naive()),
        outcome("tau equivalence", check_tau_equivalence(seed)),
        outcome("solver agreement", check_solver_agreement(seed)),
        outcome("corner schemes", check_corners()),
    ]
}
