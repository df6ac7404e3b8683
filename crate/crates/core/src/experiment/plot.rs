//! SVG line plots of sweep CSVs.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub log_x: bool,
    #[serde(default)]
    pub title: Option<String>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const DASHES: [&str; 4] = ["", "6,4", "2,3", "8,3,2,3"];

struct Series {
    gate: String,
    points: Vec<(f64, f64)>,
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| Error::Csv(format!("missing column '{name}'")))
}

fn parse(csv_text: &str) -> Result<Vec<Series>> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = r.headers()?.clone();
    let (gc, xc, yc) = (column(&headers, "gate")?, column(&headers, "tau_c_over_2")?, column(&headers, "f_min")?);
    let mut series: Vec<Series> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| -> Result<f64> {
            let s = rec.get(c).unwrap_or("");
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Csv(format!("row {}: '{s}' is not a finite number", i + 2)))
        };
        let (x, y) = (num(xc)?, num(yc)?);
        let gate = rec.get(gc).unwrap_or("").to_string();
        match series.iter_mut().find(|s| s.gate == gate) {
            Some(s) => s.points.push((x, y)),
            None => series.push(Series { gate, points: vec![(x, y)] }),
        }
    }
    if series.is_empty() {
        return Err(Error::Csv("no data rows".into()));
    }
    Ok(series)
}

/// Axis range with padding; degenerate ranges are widened.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let w = 0.5 * lo.abs().max(1e-3);
        (lo - w, hi + w)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders a sweep CSV as an SVG line plot with one series per gate.
///
/// Output is a pure function of the inputs.
pub fn emit_plot(csv_text: &str, spec: &PlotSpec) -> Result<String> {
    let series = parse(csv_text)?;
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let tx = |x: f64| if spec.log_x { x.log10() } else { x };
    if spec.log_x {
        if let Some(bad) = xs.clone().find(|&x| x <= 0.0) {
            return Err(Error::InvalidParameter(format!("log-scale x needs positive values, got {bad}")));
        }
    }
    let (x0, x1) = range(xs.map(tx));
    let (y0, y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (tx(x) - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if let Some(t) = &spec.title {
        let _ = writeln!(s, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, esc(t));
    }
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

    for k in 0..=4 {
        let v = y0 + (y1 - y0) * k as f64 / 4.0;
        let y = TOP + ph - ph * k as f64 / 4.0;
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, tick_label(v, y1 - y0));
    }
    for k in 0..=4 {
        let t = x0 + (x1 - x0) * k as f64 / 4.0;
        let x = LEFT + pw * k as f64 / 4.0;
        let v = if spec.log_x { 10f64.powf(t) } else { t };
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{v:.3e}</text>"#, TOP + ph + 18.0);
    }
    let xlabel = if spec.log_x { "τc/2 ((rad/s)², log scale)" } else { "τc/2 ((rad/s)²)" };
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#, LEFT + pw / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">F_min</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = DASHES[i % DASHES.len()];
        let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
        let pts: Vec<String> = ser.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-gate="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash_attr}/>"#,
            esc(&ser.gate),
            pts.join(" ")
        );
        for &(x, y) in &ser.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(x), py(y));
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"{dash_attr}/>"#,
            lx + 30.0
        );
        let _ = writeln!(s, r#"<text class="legend" x="{:.2}" y="{:.2}">{}</text>"#, lx + 36.0, ly + 4.0, esc(&ser.gate));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn tick_label(v: f64, span: f64) -> String {
    let digits = (-(span / 4.0).log10().floor()).clamp(0.0, 12.0) as usize + 1;
    format!("{v:.digits$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "gate,tau_c_over_2,f_min\n";

    #[test]
    fn single_point() {
        let svg = emit_plot(&format!("{HEADER}T,1e9,0.99\n"), &PlotSpec::default()).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn one_series_per_gate() {
        let mut text = HEADER.to_string();
        for g in ["T", "H", "U_phase", "CNOT"] {
            for x in [1e8, 1e9] {
                text.push_str(&format!("{g},{x},0.9\n"));
            }
        }
        let svg = emit_plot(&text, &PlotSpec { log_x: true, title: None }).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert_eq!(svg.matches(r#"class="legend""#).count(), 4);
        for g in ["T", "H", "U_phase", "CNOT"] {
            assert!(svg.contains(&format!(">{g}</text>")), "no legend entry for {g}");
        }
        assert_eq!(svg, emit_plot(&text, &PlotSpec { log_x: true, title: None }).unwrap());
    }

    #[test]
    fn malformed_input_rejected() {
        assert!(matches!(emit_plot("gate,f_min\nT,1\n", &PlotSpec::default()), Err(Error::Csv(_))));
        assert!(matches!(emit_plot(&format!("{HEADER}T,x,1\n"), &PlotSpec::default()), Err(Error::Csv(_))));
        assert!(matches!(emit_plot(HEADER, &PlotSpec::default()), Err(Error::Csv(_))));
        assert!(emit_plot(&format!("{HEADER}T,0,1\n"), &PlotSpec { log_x: true, title: None }).is_err());
    }
}
