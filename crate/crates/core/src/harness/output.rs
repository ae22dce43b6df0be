//! Sweep output: the per-sample CSV and two SVG charts (kappa against T per
//! beta, and a (T, beta) heatmap of the mean core fraction).

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use super::{CellMean, SampleRow, SweepResults};

pub const SWEEP_CSV_HEADER: [&str; 12] = [
    "T",
    "beta",
    "sample",
    "seed",
    "n_stations_lcc",
    "ratio_lcc",
    "delta_s_lcc",
    "kappa",
    "beta_hat",
    "ks",
    "two_core_frac",
    "core_frac",
];

/// `inf` for the uniform-weight limit, shortest round-trip decimal otherwise.
pub fn format_beta(beta: f64) -> String {
    if beta.is_infinite() {
        "inf".to_string()
    } else {
        format!("{beta}")
    }
}

fn record(row: &SampleRow) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    vec![
        format!("{}", row.temperature),
        format_beta(row.beta),
        row.sample.to_string(),
        row.seed.to_string(),
        row.n_stations_lcc.to_string(),
        format!("{}", row.ratio_lcc),
        format!("{}", row.delta_s_lcc),
        format!("{}", row.kappa),
        opt(row.beta_hat),
        opt(row.ks),
        format!("{}", row.two_core_frac),
        format!("{}", row.core_frac),
    ]
}

/// The CSV as a string; header only when there are no rows.
pub fn results_csv(results: &SweepResults) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(SWEEP_CSV_HEADER).expect("in-memory write");
    for row in &results.rows {
        writer.write_record(record(row)).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Writes `csv_path` and, with `svg`, `<stem>_kappa.svg` and
/// `<stem>_core.svg` next to it.
pub fn write_results(results: &SweepResults, csv_path: &Path, svg: bool) -> io::Result<()> {
    if let Some(parent) = csv_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(csv_path, results_csv(results))?;
    if svg {
        let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
        let dir = csv_path.parent().unwrap_or(Path::new(""));
        let means = results.cell_means();
        fs::write(dir.join(format!("{stem}_kappa.svg")), kappa_chart(&means))?;
        fs::write(dir.join(format!("{stem}_core.svg")), core_heatmap(&means))?;
    }
    Ok(())
}

fn sorted_unique(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Line chart of mean kappa against T, one line per beta.
pub fn kappa_chart(means: &[CellMean]) -> String {
    let (w, h, margin) = (640.0, 420.0, 50.0);
    let temps = sorted_unique(means.iter().map(|m| m.temperature));
    let betas = sorted_unique(means.iter().map(|m| m.beta));
    let t_max = temps.last().copied().unwrap_or(1.0).max(1e-9);
    let k_max = means.iter().map(|m| m.kappa).fold(0.0f64, f64::max).max(1e-9);
    let x = |t: f64| margin + t / t_max * (w - 2.0 * margin);
    let y = |k: f64| h - margin - k / k_max * (h - 2.0 * margin);
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = margin,
        b = h - margin,
        r = w - margin
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">T</text>"#, w / 2.0, h - 12.0);
    let _ = writeln!(svg, r#"<text x="14" y="{}" transform="rotate(-90 14 {})">kappa (max {k_max:.3})</text>"#, h / 2.0, h / 2.0);
    for (i, &beta) in betas.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<&CellMean> = means.iter().filter(|m| m.beta == beta).collect();
        pts.sort_by(|a, b| a.temperature.total_cmp(&b.temperature));
        let path: Vec<String> = pts
            .iter()
            .map(|m| format!("{:.1},{:.1}", x(m.temperature), y(m.kappa)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">beta={}</text>"#,
            w - margin - 70.0,
            margin + 16.0 * i as f64,
            format_beta(beta)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Heatmap of mean core fraction over (T, beta); darker is larger.
pub fn core_heatmap(means: &[CellMean]) -> String {
    let temps = sorted_unique(means.iter().map(|m| m.temperature));
    let betas = sorted_unique(means.iter().map(|m| m.beta));
    let (cell, margin) = (28.0, 60.0);
    let w = margin + cell * temps.len() as f64 + 20.0;
    let h = margin + cell * betas.len() as f64 + 40.0;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for m in means {
        let i = temps.iter().position(|&t| t == m.temperature).unwrap_or(0);
        let j = betas.iter().position(|&b| b == m.beta).unwrap_or(0);
        let shade = (255.0 * (1.0 - m.core_frac.clamp(0.0, 1.0))).round() as u8;
        let _ = writeln!(
            svg,
            r#"<rect x="{:.1}" y="{:.1}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)"><title>T={} beta={} core={:.4}</title></rect>"#,
            margin + cell * i as f64,
            20.0 + cell * j as f64,
            m.temperature,
            format_beta(m.beta),
            m.core_frac
        );
    }
    for (j, &b) in betas.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#,
            margin - 6.0,
            20.0 + cell * (j as f64 + 0.65),
            format_beta(b)
        );
    }
    for (i, &t) in temps.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{t}</text>"#,
            margin + cell * (i as f64 + 0.5),
            20.0 + cell * betas.len() as f64 + 14.0
        );
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">T (columns) / beta (rows): mean core fraction</text>"#, w / 2.0, h - 6.0);
    svg.push_str("</svg>\n");
    svg
}
