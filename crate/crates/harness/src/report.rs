//! CSV tables and a minimal SVG convergence plot.

use std::fmt::Write as _;

use gentau::Spectrum;

use crate::experiment::{ConvergenceReport, Snapshot};

pub const CSV_HEADER: &str = "N,error_inf,error_2,solve_seconds,condition_estimate";

/// 17 significant digits, so equal bits print equally.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.n, num(r.error_inf), num(r.error_2), num(r.solve_seconds), num(r.condition_estimate));
    }
    out
}

/// `x,y[,z],u` rows on the snapshot grid.
pub fn snapshot_csv(s: &Snapshot) -> String {
    let names = ["x", "y", "z"];
    let d = s.points.len();
    let mut out = names[..d].join(",");
    out.push_str(",u\n");
    let extents: Vec<usize> = s.points.iter().map(Vec::len).collect();
    for (v, idx) in s.values.iter().zip(gentau::tensor::MultiIndex::new(&extents)) {
        for (j, &i) in idx.iter().enumerate() {
            let _ = write!(out, "{},", num(s.points[j][i]));
        }
        let _ = writeln!(out, "{}", num(*v));
    }
    out
}

/// Finite eigenvalues with the exact values where known.
pub fn spectrum_csv(spectrum: &Spectrum, exact: &[f64]) -> String {
    let mut out = String::from("index,re,im,exact,rel_error\n");
    for (k, z) in spectrum.eigenvalues.iter().enumerate() {
        let _ = write!(out, "{k},{},{}", num(z.re), num(z.im));
        match exact.get(k) {
            Some(&e) => {
                let rel = ((z.re - e).powi(2) + z.im.powi(2)).sqrt() / e.abs();
                let _ = writeln!(out, ",{},{}", num(e), num(rel));
            }
            None => out.push_str(",,\n"),
        }
    }
    out
}

/// Semilog-y plot of both error norms against N.
pub fn convergence_svg(report: &ConvergenceReport) -> String {
    let (w, h, margin) = (640.0, 420.0, 60.0);
    let floor = 1e-17;
    let logs = |f: fn(&crate::experiment::ConvergenceRow) -> f64| -> Vec<(f64, f64)> {
        report.rows.iter().map(|r| (r.n as f64, f(r).max(floor).log10())).collect()
    };
    let series = [("error_inf", "#1f77b4", logs(|r| r.error_inf)), ("error_2", "#d62728", logs(|r| r.error_2))];
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.2.iter().copied()).filter(|p| p.1.is_finite()).collect();
    let (xmin, xmax) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (ymin, ymax) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let (ymin, ymax) = if all.is_empty() { (-16.0, 0.0) } else { (ymin.floor(), ymax.ceil().max(ymin.floor() + 1.0)) };
    let (xmin, xmax) = if all.is_empty() || xmin == xmax { (xmin.min(0.0), xmin.max(0.0) + 1.0) } else { (xmin, xmax) };
    let sx = |x: f64| margin + (x - xmin) / (xmax - xmin) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - (y - ymin) / (ymax - ymin) * (h - 2.0 * margin);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, report.name);
    let step = ((ymax - ymin) / 8.0).ceil().max(1.0);
    let mut y = ymin;
    while y <= ymax {
        let _ = writeln!(s, r##"<line x1="{margin}" x2="{}" y1="{1:.1}" y2="{1:.1}" stroke="#ddd"/>"##, w - margin, sy(y));
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">1e{}</text>"#, margin - 6.0, sy(y) + 4.0, y as i64);
        y += step;
    }
    for r in &report.rows {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#, sx(r.n as f64), h - margin + 18.0, r.n);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">N</text>"#, w / 2.0, h - 12.0);
    let _ = writeln!(s, r#"<rect x="{margin}" y="{margin}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - 2.0 * margin, h - 2.0 * margin);
    for (k, (label, color, pts)) in series.iter().enumerate() {
        let path: Vec<String> = pts.iter().filter(|p| p.1.is_finite()).map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for p in &path {
            let (x, y) = p.split_once(',').unwrap();
            let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
        }
        let ly = margin + 16.0 + 16.0 * k as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{label}</text>"#, w - margin - 8.0);
    }
    s.push_str("</svg>\n");
    s
}
