//! CSV, JSON and SVG artifacts. Every file is written through a temporary
//! sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::integrate::Trajectory;

use super::run::RunReport;
use super::ScenarioError;

pub const CSV_HEADER: &str = "t,x_re,x_im";
pub const CSV_HEADER_MOMENTA: &str = "t,x_re,x_im,p_re,p_im";

/// One row per sample, 17 significant digits.
pub fn csv_string(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(80 * (traj.len() + 1));
    out.push_str(if traj.momenta.is_some() {
        CSV_HEADER_MOMENTA
    } else {
        CSV_HEADER
    });
    out.push('\n');
    for (i, (t, x)) in traj.times.iter().zip(&traj.positions).enumerate() {
        write!(out, "{t:.16e},{:.16e},{:.16e}", x.re, x.im).unwrap();
        if let Some(p) = traj.momenta.as_ref().map(|m| m[i]) {
            write!(out, ",{:.16e},{:.16e}", p.re, p.im).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parsed CSV columns: times, positions and optional momenta.
pub type CsvColumns = (Vec<f64>, Vec<Complex64>, Option<Vec<Complex64>>);

pub fn parse_csv(text: &str) -> Result<CsvColumns, ScenarioError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let with_p = match header {
        CSV_HEADER => false,
        CSV_HEADER_MOMENTA => true,
        other => return Err(ScenarioError::Parse(format!("unexpected CSV header `{other}`"))),
    };
    let (mut ts, mut xs, mut ps) = (Vec::new(), Vec::new(), Vec::new());
    for (row, line) in lines.enumerate() {
        let cols = line
            .split(',')
            .map(str::parse::<f64>)
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| ScenarioError::Parse(format!("CSV row {}: {e}", row + 1)))?;
        let want = if with_p { 5 } else { 3 };
        if cols.len() != want {
            return Err(ScenarioError::Parse(format!(
                "CSV row {}: expected {want} columns, got {}",
                row + 1,
                cols.len()
            )));
        }
        ts.push(cols[0]);
        xs.push(Complex64::new(cols[1], cols[2]));
        if with_p {
            ps.push(Complex64::new(cols[3], cols[4]));
        }
    }
    Ok((ts, xs, with_p.then_some(ps)))
}

pub fn json_string(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

const PALETTE: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f",
    "#bcbd22",
];

/// Complex-plane plot: `Re x` to the right, `Im x` up, equal aspect.
pub fn svg_string(trajectories: &[&Trajectory], labels: &[String], title: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 640.0;
    const PAD: f64 = 40.0;
    const LEGEND_W: f64 = 200.0;

    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for x in trajectories.iter().flat_map(|t| t.positions.iter()) {
        lo = Complex64::new(lo.re.min(x.re), lo.im.min(x.im));
        hi = Complex64::new(hi.re.max(x.re), hi.im.max(x.im));
    }
    if !lo.re.is_finite() {
        lo = Complex64::new(-1.0, -1.0);
        hi = Complex64::new(1.0, 1.0);
    }
    let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
    let scale = (W - 2.0 * PAD).min(H - 2.0 * PAD) / span;
    let mid = 0.5 * (lo + hi);
    let px = |x: Complex64| (W / 2.0 + (x.re - mid.re) * scale, H / 2.0 - (x.im - mid.im) * scale);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{H}" viewBox="0 0 {} {H}">"#,
        W + LEGEND_W,
        W + LEGEND_W
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    )
    .unwrap();

    // Axes through the origin when visible.
    let (ox, oy) = px(Complex64::new(0.0, 0.0));
    if (0.0..=W).contains(&ox) {
        writeln!(out, r##"<line x1="{ox:.2}" y1="0" x2="{ox:.2}" y2="{H}" stroke="#bbbbbb" stroke-width="1"/>"##).unwrap();
    }
    if (0.0..=H).contains(&oy) {
        writeln!(out, r##"<line x1="0" y1="{oy:.2}" x2="{W}" y2="{oy:.2}" stroke="#bbbbbb" stroke-width="1"/>"##).unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">Re x</text>"#,
        W - 6.0,
        H - 6.0
    )
    .unwrap();
    writeln!(out, r#"<text x="6" y="36" font-family="sans-serif" font-size="12">Im x</text>"#).unwrap();

    for (i, traj) in trajectories.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::with_capacity(16 * traj.len());
        for x in &traj.positions {
            let (u, v) = px(*x);
            write!(pts, "{u:.2},{v:.2} ").unwrap();
        }
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            pts.trim_end()
        )
        .unwrap();
        let y = PAD + 18.0 * i as f64;
        writeln!(
            out,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="3"/>"#,
            W + 10.0,
            W + 34.0
        )
        .unwrap();
        let label = labels.get(i).cloned().unwrap_or_default();
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            W + 40.0,
            y + 4.0,
            escape(&label)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Write `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), ScenarioError> {
    let io_err = |source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn emit_csv(traj: &Trajectory, path: &Path) -> Result<(), ScenarioError> {
    write_atomic(path, &csv_string(traj))
}

pub fn emit_json(report: &RunReport, path: &Path) -> Result<(), ScenarioError> {
    write_atomic(path, &json_string(report))
}

pub fn emit_svg(trajectories: &[&Trajectory], labels: &[String], title: &str, path: &Path) -> Result<(), ScenarioError> {
    write_atomic(path, &svg_string(trajectories, labels, title))
}
