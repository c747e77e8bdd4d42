//! Minimal SVG plotting for trajectory and map overlays.

use std::fmt::Write;

/// One plotted series in world coordinates.
#[derive(Debug, Clone)]
pub enum Series {
    Line { label: String, color: String, points: Vec<[f64; 2]> },
    Dots { label: String, color: String, points: Vec<[f64; 2]>, radius: f64 },
}

impl Series {
    fn points(&self) -> &[[f64; 2]] {
        match self {
            Series::Line { points, .. } | Series::Dots { points, .. } => points,
        }
    }

    fn label(&self) -> (&str, &str) {
        match self {
            Series::Line { label, color, .. } | Series::Dots { label, color, .. } => (label, color),
        }
    }
}

/// Renders the series with equal axis scaling, `y` pointing up.
pub fn render(title: &str, series: &[Series], width: f64) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in series.iter().flat_map(|s| s.points()).filter(|p| p[0].is_finite() && p[1].is_finite()) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if lo[0] > hi[0] {
        lo = [-1.0, -1.0];
        hi = [1.0, 1.0];
    }
    let margin = 30.0;
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-6);
    let scale = (width - 2.0 * margin) / span;
    let height = (hi[1] - lo[1]) * scale + 2.0 * margin + 20.0 * series.len() as f64;
    let map = |p: &[f64; 2]| (margin + (p[0] - lo[0]) * scale, margin + (hi[1] - p[1]) * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{margin}" y="18" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    for series in series {
        match series {
            Series::Line { color, points, .. } => {
                let mut d = String::new();
                for (i, p) in points.iter().enumerate() {
                    let (x, y) = map(p);
                    let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
                }
                let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
            }
            Series::Dots { color, points, radius, .. } => {
                let _ = writeln!(s, r#"<g fill="{color}" fill-opacity="0.5">"#);
                for p in points {
                    let (x, y) = map(p);
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{radius}"/>"#);
                }
                s.push_str("</g>\n");
            }
        }
    }
    let mut y = height - 20.0 * series.len() as f64 + 5.0;
    for series in series {
        let (label, color) = series.label();
        let _ = writeln!(
            s,
            r#"<rect x="{margin}" y="{:.0}" width="12" height="12" fill="{color}"/><text x="{:.0}" y="{:.0}" font-family="sans-serif" font-size="12">{}</text>"#,
            y,
            margin + 18.0,
            y + 11.0,
            escape(label)
        );
        y += 20.0;
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_all_series() {
        let svg = render(
            "a <b>",
            &[
                Series::Line {
                    label: "gt".into(),
                    color: "black".into(),
                    points: vec![[0.0, 0.0], [10.0, 5.0]],
                },
                Series::Dots {
                    label: "map".into(),
                    color: "red".into(),
                    points: vec![[1.0, 1.0]; 3],
                    radius: 1.0,
                },
            ],
            400.0,
        );
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("a &lt;b&gt;"));
        assert!(svg.contains("M30.00,"));
    }

    #[test]
    fn empty_plot_is_valid() {
        assert!(render("empty", &[], 200.0).contains("</svg>"));
    }
}
