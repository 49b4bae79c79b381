//! Minimal SVG line charts.

use std::fmt::Write;

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
    pub color: &'a str,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Lines over episodes `1..=n`, with an optional shaded `(lower, upper)` band.
pub fn line_chart(title: &str, y_label: &str, series: &[Series<'_>], band: Option<(&[f64], &[f64])>) -> String {
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(0).max(1);
    let all = series
        .iter()
        .flat_map(|s| s.values.iter())
        .chain(band.into_iter().flat_map(|(lo, hi)| lo.iter().chain(hi.iter())))
        .copied()
        .filter(|v| v.is_finite());
    let (mut lo, mut hi) = all.fold((0.0f64, 1.0f64), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    lo -= 0.02 * (hi - lo);
    let x = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };
    let y = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - lo) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.0}</text>"#,
            x0 - 6.0,
            y(v) + 4.0
        );
        let i = (n - 1) * k / 4;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            x(i),
            y0 + 18.0,
            i + 1
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">episode</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    if let Some((lower, upper)) = band {
        let mut d = String::new();
        for (i, v) in upper.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, x(i), y(*v));
        }
        for (i, v) in lower.iter().enumerate().rev() {
            let _ = write!(d, "L{:.2},{:.2} ", x(i), y(*v));
        }
        let _ = writeln!(svg, r##"<path d="{d}Z" fill="#1f77b4" fill-opacity="0.2" stroke="none"/>"##);
    }
    for (k, s) in series.iter().enumerate() {
        let pts: Vec<String> = s.values.iter().enumerate().map(|(i, v)| format!("{:.2},{:.2}", x(i), y(*v))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            pts.join(" "),
            s.color
        );
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{ly}" fill="{}">{}</text>"#,
            x1 - 150.0,
            s.color,
            escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_lines_and_band() {
        let a = [1.0, 3.0, 2.0];
        let lo = [0.5, 2.0, 1.0];
        let hi = [1.5, 4.0, 3.0];
        let svg = line_chart("t <x>", "reward", &[Series { label: "mean", values: &a, color: "#000" }], Some((&lo, &hi)));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<polyline") && svg.contains("fill-opacity"));
        assert!(svg.contains("t &lt;x&gt;"));
        let empty = line_chart("none", "y", &[], None);
        assert!(empty.contains("</svg>"));
    }
}
