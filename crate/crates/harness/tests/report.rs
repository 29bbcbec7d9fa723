use gentau_harness::config::ExperimentConfig;
use gentau_harness::experiment::{run_experiment, ConvergenceReport, ConvergenceRow};
use gentau_harness::report::{convergence_csv, convergence_svg, snapshot_csv, CSV_HEADER};

const SMALL: &str = r#"
name = "small"
equation = "poisson"
dim = 2
domain = [[0.0, 1.0]]
n = [8, 12, 16]
forcing = "-2*pi^2*sin(pi*x)*sin(pi*y)"

[reference]
mode = "manufactured"
solution = "sin(pi*x)*sin(pi*y)"

[[bc]]
face = "x-low"
kind = "dirichlet"
[[bc]]
face = "x-high"
kind = "dirichlet"
[[bc]]
face = "y-low"
kind = "dirichlet"
[[bc]]
face = "y-high"
kind = "dirichlet"
"#;

/// The CSV without its timing column.
fn without_timing(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols.remove(3);
            cols.join(",")
        })
        .collect()
}

#[test]
fn reruns_are_bitwise_identical() {
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let (a, b) = (run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
    assert_eq!(without_timing(&convergence_csv(&a.report)), without_timing(&convergence_csv(&b.report)));
    assert_eq!(snapshot_csv(a.snapshots.last().unwrap()), snapshot_csv(b.snapshots.last().unwrap()));
}

#[test]
fn convergence_table() {
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let out = run_experiment(&cfg).unwrap();
    let csv = convergence_csv(&out.report);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 4);
    for (line, n) in lines[1..].iter().zip([8, 12, 16]) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[0], n as f64);
        assert!(cols[2] <= cols[1] && cols[4] >= 1.0);
    }
    let errors: Vec<f64> = out.report.rows.iter().map(|r| r.error_inf).collect();
    assert!(errors[2] < 1e-10 && errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn snapshot_layout() {
    let mut cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    cfg.n = vec![8];
    let out = run_experiment(&cfg).unwrap();
    let csv = snapshot_csv(&out.snapshots[0]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,y,u");
    assert_eq!(lines.len(), 1 + 101 * 101);
    let second: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(&second[..2], &[0.0, 0.01]);
}

#[test]
fn svg_plots_every_point() {
    let report = ConvergenceReport {
        name: "demo".into(),
        rows: [(8, 1e-2), (16, 1e-6), (32, 0.0)]
            .iter()
            .map(|&(n, e)| ConvergenceRow { n, error_inf: e, error_2: e / 2.0, solve_seconds: 0.1, condition_estimate: 10.0 })
            .collect(),
    };
    let svg = convergence_svg(&report);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<circle").count(), 6);
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains(">demo<") && !svg.contains("NaN"));
}
