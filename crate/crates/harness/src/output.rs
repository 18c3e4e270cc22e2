//! CSV traces and self-rendered SVG regret panels.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{HarnessError, RegretTrace, TracePoint};

#[derive(Debug, Serialize, Deserialize)]
struct Row<'a> {
    episode: u64,
    instant_regret: f64,
    cum_regret: f64,
    #[serde(borrow)]
    algorithm: std::borrow::Cow<'a, str>,
    seed: u64,
    wall_s: f64,
}

/// Writes `episode,instant_regret,cum_regret,algorithm,seed,wall_s` rows with a header.
pub fn emit_csv<W: Write>(trace: &RegretTrace, out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for p in &trace.points {
        w.serialize(Row {
            episode: p.episode,
            instant_regret: p.instant_regret,
            cum_regret: p.cum_regret,
            algorithm: trace.algorithm.as_str().into(),
            seed: trace.seed,
            wall_s: trace.wall_s,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(trace: &RegretTrace, path: &Path) -> Result<(), HarnessError> {
    if trace.points.is_empty() {
        return Err(HarnessError::EmptyTrace {
            algorithm: trace.algorithm.clone(),
            seed: trace.seed,
        });
    }
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    emit_csv(trace, std::io::BufWriter::new(file)).map_err(|e| HarnessError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Reads traces back, one per `(algorithm, seed)` in order of first appearance.
/// `total_episodes` is taken from the last recorded episode.
pub fn parse_csv(path: &Path) -> Result<Vec<RegretTrace>, HarnessError> {
    let csv_err = |e: csv::Error| HarnessError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut traces: Vec<RegretTrace> = Vec::new();
    let mut raw = csv::StringRecord::new();
    let headers = reader.headers().map_err(csv_err)?.clone();
    while reader.read_record(&mut raw).map_err(csv_err)? {
        let row: Row = raw.deserialize(Some(&headers)).map_err(csv_err)?;
        let point = TracePoint {
            episode: row.episode,
            instant_regret: row.instant_regret,
            cum_regret: row.cum_regret,
        };
        match traces
            .iter_mut()
            .find(|t| t.algorithm == row.algorithm && t.seed == row.seed)
        {
            Some(t) => {
                t.points.push(point);
                t.total_episodes = row.episode;
            }
            None => traces.push(RegretTrace {
                algorithm: row.algorithm.into_owned(),
                seed: row.seed,
                wall_s: row.wall_s,
                total_episodes: row.episode,
                points: vec![point],
            }),
        }
    }
    Ok(traces)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Line chart of mean cumulative regret per algorithm with a min–max band
/// across seeds. Traces of one algorithm must share recorded episodes.
pub fn render_svg(title: &str, y_label: &str, traces: &[RegretTrace]) -> Result<String, HarnessError> {
    if traces.is_empty() || traces.iter().any(|t| t.points.is_empty()) {
        return Err(HarnessError::Shape("cannot render an empty panel".into()));
    }
    let mut groups: BTreeMap<&str, Vec<&RegretTrace>> = BTreeMap::new();
    for t in traces {
        groups.entry(t.algorithm.as_str()).or_default().push(t);
    }
    struct Band {
        x: Vec<f64>,
        mean: Vec<f64>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    }
    let mut bands = Vec::new();
    for (name, group) in &groups {
        let n = group[0].points.len();
        if group.iter().any(|t| t.points.len() != n) {
            return Err(HarnessError::Shape(format!("{name}: seeds recorded different episodes")));
        }
        let mut b = Band {
            x: Vec::with_capacity(n),
            mean: Vec::with_capacity(n),
            lo: Vec::with_capacity(n),
            hi: Vec::with_capacity(n),
        };
        for j in 0..n {
            let ys: Vec<f64> = group.iter().map(|t| t.points[j].cum_regret).collect();
            b.x.push(group[0].points[j].episode as f64);
            b.mean.push(ys.iter().sum::<f64>() / ys.len() as f64);
            b.lo.push(ys.iter().copied().fold(f64::INFINITY, f64::min));
            b.hi.push(ys.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        bands.push((*name, b));
    }

    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (80.0, 160.0, 40.0, 60.0);
    let x_max = bands.iter().flat_map(|(_, b)| b.x.iter().copied()).fold(1.0, f64::max);
    let y_max = bands
        .iter()
        .flat_map(|(_, b)| b.hi.iter().copied())
        .fold(0.0, f64::max)
        .max(1e-12);
    let px = |x: f64| left + x / x_max * (w - left - right);
    let py = |y: f64| h - bottom - y / y_max * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
    // axes and ticks
    let _ = writeln!(
        s,
        r#"<g class="axes" stroke="black"><line x1="{left}" y1="{}" x2="{}" y2="{}"/><line x1="{left}" y1="{top}" x2="{left}" y2="{}"/></g>"#,
        h - bottom,
        w - right,
        h - bottom,
        h - bottom
    );
    for j in 0..=4 {
        let fx = x_max * j as f64 / 4.0;
        let fy = y_max * j as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            px(fx),
            h - bottom + 18.0,
            tick(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            py(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">episode</text>"#,
        (left + w - right) / 2.0,
        h - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (top + h - bottom) / 2.0,
        escape(y_label)
    );
    for (k, (name, b)) in bands.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut band = String::new();
        for (x, y) in b.x.iter().zip(&b.hi) {
            let _ = write!(band, "{:.2},{:.2} ", px(*x), py(*y));
        }
        for (x, y) in b.x.iter().zip(&b.lo).rev() {
            let _ = write!(band, "{:.2},{:.2} ", px(*x), py(*y));
        }
        let _ = writeln!(
            s,
            r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            band.trim_end()
        );
        let mut line = String::new();
        for (x, y) in b.x.iter().zip(&b.mean) {
            let _ = write!(line, "{:.2},{:.2} ", px(*x), py(*y));
        }
        let _ = writeln!(
            s,
            r#"<polyline class="mean" data-algorithm="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            escape(name),
            line.trim_end()
        );
    }
    let _ = writeln!(s, r#"<g class="legend">"#);
    for (k, (name, _)) in bands.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let y = top + 10.0 + 20.0 * k as f64;
        let x = w - right + 16.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            x + 24.0,
            x + 30.0,
            y + 4.0,
            escape(name)
        );
    }
    let _ = writeln!(s, "</g>\n</svg>");
    Ok(s)
}

pub fn emit_svg(path: &Path, title: &str, y_label: &str, traces: &[RegretTrace]) -> Result<(), HarnessError> {
    let svg = render_svg(title, y_label, traces)?;
    std::fs::write(path, svg).map_err(|e| HarnessError::io(path, e))
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
