//! Sweep CSV files and SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::RcsSample;

pub const CSV_HEADER: &str = "theta_deg,phi_deg,rcs_dbsm";

/// Rows sorted by `(theta, phi)`, six decimals.
pub fn sweep_csv(samples: &[RcsSample]) -> String {
    let mut rows = samples.to_vec();
    rows.sort_by(|a, b| a.theta_deg.total_cmp(&b.theta_deg).then(a.phi_deg.total_cmp(&b.phi_deg)));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{:.6},{:.6},{:.6}", r.theta_deg, r.phi_deg, r.rcs_dbsm);
    }
    out
}

pub fn write_sweep(path: &Path, samples: &[RcsSample]) -> Result<()> {
    Ok(std::fs::write(path, sweep_csv(samples))?)
}

pub fn parse_sweep(text: &str, path: &Path) -> Result<Vec<RcsSample>> {
    let bad = |reason: String| Error::format("CSV", path, reason);
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(bad(format!("expected header '{CSV_HEADER}'"))),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let f: Vec<f64> = l
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("row {}: {e}", n + 2)))?;
            if f.len() != 3 {
                return Err(bad(format!("row {} has {} fields", n + 2, f.len())));
            }
            Ok(RcsSample {
                theta_deg: f[0],
                phi_deg: f[1],
                rcs_dbsm: f[2],
            })
        })
        .collect()
}

pub fn read_sweep(path: &Path) -> Result<Vec<RcsSample>> {
    parse_sweep(&std::fs::read_to_string(path)?, path)
}

/// Line plot of RCS against the swept angle for several labelled sweeps.
pub fn sweep_svg(series: &[(&str, &[RcsSample])]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let x_of = |s: &RcsSample, theta_swept: bool| if theta_swept { s.theta_deg } else { s.phi_deg };
    let all: Vec<&RcsSample> = series.iter().flat_map(|(_, s)| s.iter()).collect();
    let theta_swept = all.windows(2).any(|w| w[0].theta_deg != w[1].theta_deg);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in &all {
        let x = x_of(s, theta_swept);
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(s.rcs_dbsm);
        y1 = y1.max(s.rcs_dbsm);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * M,
        H - 2.0 * M
    );
    let axis = if theta_swept { "theta (deg)" } else { "phi (deg)" };
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{axis}</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(out, r#"<text x="12" y="{}" transform="rotate(-90 12 {})" text-anchor="middle">RCS (dBsm)</text>"#, H / 2.0, H / 2.0);
    let _ = writeln!(out, r#"<text x="{M}" y="{}">{x0:.0}</text><text x="{}" y="{}" text-anchor="end">{x1:.0}</text>"#, H - M + 15.0, W - M, H - M + 15.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{y1:.1}</text><text x="{}" y="{}" text-anchor="end">{y0:.1}</text>"#, M - 4.0, M + 4.0, M - 4.0, H - M);
    for (n, (label, samples)) in series.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let pts: Vec<String> = samples
            .iter()
            .map(|s| format!("{:.2},{:.2}", px(x_of(s, theta_swept)), py(s.rcs_dbsm)))
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(out, r#"<text x="{}" y="{}" fill="{color}">{label}</text>"#, M + 8.0, M + 16.0 * (n as f64 + 1.0));
    }
    out.push_str("</svg>\n");
    out
}
