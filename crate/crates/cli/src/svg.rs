//! Standalone SVG line plot for radius sweeps, with the plotted data
//! repeated as a text table under the axes.

use std::fmt::Write as _;

use crate::common::fmt_num;

const W: f64 = 640.0;
const PLOT_H: f64 = 360.0;
const MARGIN: f64 = 60.0;
const ROW_H: f64 = 16.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Lower and upper bounds against the radius. Radii are placed at equal
/// spacing in the given order so that `inf` gets a position.
pub fn sweep_plot(rows: &[(f64, f64, f64)]) -> String {
    let n = rows.len();
    let height = PLOT_H + 2.0 * MARGIN + ROW_H * (n as f64 + 1.0);
    let (mut ymin, mut ymax) = rows
        .iter()
        .flat_map(|&(_, l, u)| [l, u])
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !ymin.is_finite() {
        (ymin, ymax) = (0.0, 1.0);
    }
    if ymax - ymin < 1e-12 {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let x_at = |i: usize| {
        if n <= 1 {
            MARGIN + (W - 2.0 * MARGIN) / 2.0
        } else {
            MARGIN + (W - 2.0 * MARGIN) * i as f64 / (n - 1) as f64
        }
    };
    let y_at = |v: f64| {
        let v = v.clamp(ymin, ymax);
        MARGIN + PLOT_H * (1.0 - (v - ymin) / (ymax - ymin))
    };
    let line = |pick: fn(&(f64, f64, f64)) -> f64| {
        rows.iter()
            .enumerate()
            .map(|(i, r)| format!("{:.2},{:.2}", x_at(i), y_at(pick(r))))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" viewBox="0 0 {W} {height}" font-family="sans-serif" font-size="12">"#
    );
    s.push_str("<title>Maximum deviation bounds against radius</title>\n");
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{PLOT_H}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN
    );
    for (i, (r, _, _)) in rows.iter().enumerate() {
        let x = x_at(i);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN + PLOT_H + 16.0,
            escape(&fmt_num(*r))
        );
    }
    for (v, label) in [(ymin, ymin), (ymax, ymax)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            y_at(v) + 4.0,
            escape(&format!("{label:.4}"))
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">radius</text>"#,
        W / 2.0,
        MARGIN + PLOT_H + 34.0
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        line(|r| r.1)
    );
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="firebrick" stroke-width="2" stroke-dasharray="6 3"/>"#,
        line(|r| r.2)
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{:.2}" fill="steelblue">lower</text><text x="{:.2}" y="{:.2}" fill="firebrick">upper</text>"#,
        MARGIN - 12.0,
        MARGIN + 60.0,
        MARGIN - 12.0
    );
    let top = MARGIN + PLOT_H + 2.0 * MARGIN / 1.5;
    s.push_str("<g id=\"data\">\n");
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{top:.2}" font-weight="bold">r, lower, upper</text>"#
    );
    for (k, (r, l, u)) in rows.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN}" y="{:.2}">{}, {}, {}</text>"#,
            top + ROW_H * (k as f64 + 1.0),
            escape(&fmt_num(*r)),
            escape(&fmt_num(*l)),
            escape(&fmt_num(*u))
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}
