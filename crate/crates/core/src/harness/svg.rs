//! Minimal static SVG plots.

use std::fmt::Write;

use super::artifact::PathTable;
use crate::limits::ConvergenceTable;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let range = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it
                .filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-300 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = range(&mut xs.clone());
        let (y0, y1) = range(&mut ys.clone());
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn open(title: &str, xlabel: &str, ylabel: &str, frame: &Frame) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, W / 2.0, H - 14.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (v, x, y, anchor) in [
        (frame.x0, frame.px(frame.x0), H - PAD + 16.0, "middle"),
        (frame.x1, frame.px(frame.x1), H - PAD + 16.0, "middle"),
        (frame.y0, PAD - 6.0, frame.py(frame.y0), "end"),
        (frame.y1, PAD - 6.0, frame.py(frame.y1), "end"),
    ] {
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    s
}

fn polyline(s: &mut String, frame: &Frame, pts: &[(f64, f64)], color: &str) {
    let coords: Vec<String> = pts
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
        coords.join(" ")
    );
    for c in &coords {
        let (x, y) = c.split_once(',').expect("formatted pair");
        let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>"#);
    }
}

fn legend(s: &mut String, labels: &[&str]) {
    for (i, l) in labels.iter().enumerate() {
        let y = PAD + 16.0 + 16.0 * i as f64;
        let x = W - PAD - 90.0;
        let _ = writeln!(s, r#"<rect x="{x}" y="{}" width="10" height="10" fill="{}"/>"#, y - 9.0, COLORS[i % COLORS.len()]);
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{l}</text>"#, x + 14.0);
    }
}

/// Log-log plot of the three error columns against `ε` (log10 axes).
pub fn error_plot(t: &ConvergenceTable) -> String {
    let lg = |v: f64| if v > 0.0 { v.log10() } else { f64::NAN };
    let cols: Vec<Vec<(f64, f64)>> = (0..3)
        .map(|c| t.rows.iter().map(|r| (lg(r.eps), lg(r.errors()[c]))).collect())
        .collect();
    let frame = Frame::fit(
        cols.iter().flatten().map(|p| p.0).collect::<Vec<_>>().into_iter(),
        cols.iter().flatten().map(|p| p.1).collect::<Vec<_>>().into_iter(),
    );
    let mut s = open(
        &format!("convergence to the limit ({})", t.chart),
        "log10 eps",
        "log10 error",
        &frame,
    );
    for (i, c) in cols.iter().enumerate() {
        polyline(&mut s, &frame, c, COLORS[i]);
    }
    legend(&mut s, &["err_x", "err_xdot", "err_v"]);
    s.push_str("</svg>\n");
    s
}

/// Chart coordinates and `v` against `u`, with the strip boundaries marked.
pub fn path_plot(p: &PathTable) -> String {
    let series: Vec<usize> = (1..=p.dim).chain([2 * p.dim + 1]).collect();
    let frame = Frame::fit(
        p.rows.iter().map(|r| r[0]).collect::<Vec<_>>().into_iter(),
        p.rows
            .iter()
            .flat_map(|r| series.iter().map(move |&c| r[c]))
            .collect::<Vec<_>>()
            .into_iter(),
    );
    let mut s = open("regularized geodesic", "u", "coordinate", &frame);
    if let Some((a, b)) = p.marks {
        for m in [a, b] {
            let x = frame.px(m);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{PAD}" x2="{x:.2}" y2="{}" stroke="#999" stroke-dasharray="4 3"/>"##,
                H - PAD
            );
        }
    }
    let mut labels = Vec::new();
    for (i, &c) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = p.rows.iter().map(|r| (r[0], r[c])).collect();
        polyline(&mut s, &frame, &pts, COLORS[i % COLORS.len()]);
        labels.push(if c == 2 * p.dim + 1 { "v".to_string() } else { format!("x{c}") });
    }
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    legend(&mut s, &refs);
    s.push_str("</svg>\n");
    s
}
