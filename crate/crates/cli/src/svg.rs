//! Minimal static SVG: heatmaps as rectangles, curves as polylines.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Piecewise-linear dark blue -> teal -> yellow.
fn color(t: f64) -> String {
    let stops = [(0.0, [68.0, 1.0, 84.0]), (0.5, [33.0, 145.0, 140.0]), (1.0, [253.0, 231.0, 37.0])];
    let t = t.clamp(0.0, 1.0);
    let k = if t <= 0.5 { 0 } else { 1 };
    let (t0, c0) = stops[k];
    let (t1, c1) = stops[k + 1];
    let u = (t - t0) / (t1 - t0);
    let c: Vec<u8> = (0..3).map(|i| (c0[i] + u * (c1[i] - c0[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn open(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>
"#,
        W / 2.0,
        escape(title),
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 10.0,
        escape(x_label),
        TOP + (H - TOP - BOTTOM) / 2.0,
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(y_label)
    );
}

/// `matrix[i][j]` is drawn at column `i` (x axis) and row `j` (y axis, upward).
/// Missing cells are grey.
pub fn heatmap(
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    ys: &[f64],
    matrix: &[Vec<Option<f64>>],
) -> String {
    let mut out = String::new();
    open(&mut out, title, x_label, y_label);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let (nx, ny) = (xs.len().max(1), ys.len().max(1));
    let (cw, ch) = (pw / nx as f64, ph / ny as f64);
    let vmax = matrix.iter().flatten().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
    for (i, col) in matrix.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            let fill = match v {
                Some(v) if vmax > 0.0 => color(v.abs() / vmax),
                Some(_) => color(0.0),
                None => "#bbbbbb".to_string(),
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                LEFT + i as f64 * cw,
                TOP + ph - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    let ticks = |n: usize| -> Vec<usize> {
        if n <= 1 {
            return vec![0];
        }
        let k = 5.min(n - 1);
        let mut t: Vec<usize> = (0..=k).map(|m| m * (n - 1) / k).collect();
        t.dedup();
        t
    };
    for i in ticks(xs.len()) {
        let x = LEFT + (i as f64 + 0.5) * cw;
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 16.0,
            label(xs[i])
        );
    }
    for j in ticks(ys.len()) {
        let y = TOP + ph - (j as f64 + 0.5) * ch;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            label(ys[j])
        );
    }
    // color bar
    let bx = W - RIGHT + 20.0;
    for k in 0..50 {
        let t = k as f64 / 49.0;
        let _ = writeln!(
            out,
            r#"<rect x="{bx}" y="{:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            TOP + ph * (1.0 - (k + 1) as f64 / 50.0),
            ph / 50.0 + 0.05,
            color(t)
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, bx + 20.0, TOP + 8.0, label(vmax));
    let _ = writeln!(out, r#"<text x="{}" y="{}">0</text>"#, bx + 20.0, TOP + ph);
    out.push_str("</svg>\n");
    out
}

pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub dashed: bool,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

/// Curves sharing one pair of axes, with optional vertical sticks `(x, height)`
/// scaled to the y range.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    sticks: &[(f64, f64)],
) -> String {
    let mut out = String::new();
    open(&mut out, title, x_label, y_label);
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let finite = |v: &&f64| v.is_finite();
    let xs = series.iter().flat_map(|s| s.x.iter()).chain(sticks.iter().map(|s| &s.0));
    let ys = series.iter().flat_map(|s| s.y.iter()).chain(sticks.iter().map(|s| &s.1));
    let (mut x0, mut x1) = xs.filter(finite).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (mut y0, mut y1) = ys.filter(finite).fold((0.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if !(x1 > x0) {
        x0 -= 0.5;
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 = y0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" x2="{}" y1="{:.2}" y2="{:.2}" stroke="#999999" stroke-width="0.5"/>"##,
            LEFT + pw,
            py(0.0),
            py(0.0)
        );
    }
    for k in 0..=4 {
        let xv = x0 + (x1 - x0) * k as f64 / 4.0;
        let yv = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(xv),
            TOP + ph + 16.0,
            label(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py(yv) + 4.0,
            label(yv)
        );
    }
    for &(x, h) in sticks {
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="#d62728" stroke-width="1.5"/>"##,
            px(x),
            px(x),
            py(0.0f64.max(y0)),
            py(h)
        );
    }
    for (k, s) in series.iter().enumerate() {
        let mut pts = String::new();
        for (&x, &y) in s.x.iter().zip(s.y) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
            }
        }
        let dash = if s.dashed { r#" stroke-dasharray="6 3""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.2"{dash}/>"#,
            pts.trim_end(),
            s.color
        );
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let lx = W - RIGHT + 10.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" x2="{}" y1="{ly}" y2="{ly}" stroke="{}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            s.color,
            lx + 22.0,
            ly + 4.0,
            escape(s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_has_one_rect_per_cell() {
        let m = vec![vec![Some(0.1), None], vec![Some(0.3), Some(0.2)], vec![Some(0.0), Some(0.05)]];
        let svg = heatmap("t <&>", "B", "T", &[1.0, 2.0, 3.0], &[0.0, 10.0], &m);
        // 6 cells, 50 color bar slices, 1 background
        assert_eq!(svg.matches("<rect").count(), 57);
        assert!(svg.contains("#bbbbbb"));
        assert!(svg.contains("t &lt;&amp;&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn colors_span_the_scale() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
    }

    #[test]
    fn line_plot_draws_each_series() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.0, -0.5, 0.25];
        let svg = line_plot(
            "trace",
            "tau",
            "<cos>",
            &[
                Series { name: "a", color: "black", dashed: false, x: &x, y: &y },
                Series { name: "b", color: "red", dashed: true, x: &x, y: &y },
            ],
            &[(1.0, 0.1)],
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("&lt;cos&gt;"));
    }
}
