//! Minimal SVG line plots: one polyline per series, labelled axes with the
//! data range at the ends.

use std::fmt::Write as _;

use crate::output::format_number;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Plot {
    pub stem: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

impl Plot {
    pub fn new(stem: &str, title: &str, x_label: &str, y_label: &str) -> Self {
        Self { stem: stem.into(), title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series: Vec::new() }
    }

    pub fn series(mut self, name: &str, x: &[f64], y: &[f64]) -> Self {
        self.series.push((name.into(), x.iter().copied().zip(y.iter().copied()).collect()));
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let pts = self.series.iter().flat_map(|(_, p)| p.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        (x0, x1, y0, y1)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title)).unwrap();
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        writeln!(s, r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#, right - left, bottom - top)
            .unwrap();
        for (x, anchor, v) in [(left, "start", x0), (right, "end", x1)] {
            writeln!(s, r#"<text x="{x}" y="{}" text-anchor="{anchor}">{}</text>"#, bottom + 16.0, format_number(v)).unwrap();
        }
        for (y, v) in [(bottom, y0), (top + 10.0, y1)] {
            writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#, left - 4.0, format_number(v)).unwrap();
        }
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 16.0, escape(&self.x_label)).unwrap();
        writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        )
        .unwrap();
        for (k, (name, pts)) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = pts
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" ")).unwrap();
            let ly = top + 16.0 + 16.0 * k as f64;
            writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#, right - 120.0, ly - 4.0, right - 100.0, ly - 4.0)
                .unwrap();
            writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, right - 96.0, escape(name)).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_polyline_per_series() {
        let p = Plot::new("t", "a < b", "x", "y").series("one", &[0.0, 1.0], &[0.0, 1.0]).series("two", &[0.0, 1.0], &[1.0, 1.0]);
        let svg = p.render();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn flat_or_empty_data_still_renders() {
        assert!(Plot::new("t", "", "", "").render().contains("<svg"));
        let flat = Plot::new("t", "", "", "").series("c", &[1.0, 1.0], &[2.0, 2.0]).render();
        assert!(!flat.contains("NaN"));
    }
}
