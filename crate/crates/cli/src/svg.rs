//! Minimal SVG line/dot plots. The output depends only on the data, so
//! identical runs produce identical files.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: [&str; 6] = [
    "#d62728", "#2ca02c", "#1f77b4", "#9467bd", "#ff7f0e", "#555555",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Line,
    Dots,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub mark: Mark,
    /// Added to every y value before plotting.
    pub offset: f64,
    /// Index into the palette; series sharing a colour form a pair.
    pub colour: usize,
}

pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x_range: Option<(f64, f64)>,
}

fn bounds(series: &[Series], x_range: Option<(f64, f64)>) -> ((f64, f64), (f64, f64)) {
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (0.0f64, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            if let Some((lo, hi)) = x_range {
                if x < lo || x > hi {
                    continue;
                }
            }
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y + s.offset);
            y1 = y1.max(y + s.offset);
        }
    }
    let xr = x_range.unwrap_or((x0, x1));
    if xr.1.is_nan() || xr.0.is_nan() || xr.1 <= xr.0 {
        return ((xr.0 - 1.0, xr.0 + 1.0), (y0, y0 + 1.0));
    }
    let pad = 0.05 * (y1 - y0).max(1e-12);
    (xr, (y0, y1 + pad))
}

pub fn render(plot: &Plot, series: &[Series]) -> String {
    let ((x0, x1), (y0, y1)) = bounds(series, plot.x_range);
    let inner_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let inner_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * inner_w;
    let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * inner_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_LEFT + inner_w / 2.0,
        escape(plot.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{inner_w}" height="{inner_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(fx),
            HEIGHT - MARGIN_BOTTOM + 18.0,
            tick(fx)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 6.0,
            sy(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + inner_w / 2.0,
        HEIGHT - 12.0,
        escape(plot.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        MARGIN_TOP + inner_h / 2.0,
        MARGIN_TOP + inner_h / 2.0,
        escape(plot.y_label)
    );

    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[s.colour % PALETTE.len()];
        let visible = s
            .points
            .iter()
            .filter(|(x, _)| *x >= x0 && *x <= x1)
            .map(|&(x, y)| (sx(x), sy(y + s.offset)));
        match s.mark {
            Mark::Line => {
                let pts: Vec<String> = visible.map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            Mark::Dots => {
                for (x, y) in visible {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{colour}"/>"#
                    );
                }
            }
        }
        let ly = MARGIN_TOP + 14.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{colour}">{}</text>"#,
            lx,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-2 && v.abs() < 1e4) {
        format!("{v:.2}")
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_every_series_in_the_legend() {
        let series = vec![
            Series {
                label: "a".into(),
                points: vec![(0.0, 0.0), (1.0, 1.0)],
                mark: Mark::Line,
                offset: 0.0,
                colour: 0,
            },
            Series {
                label: "b<1>".into(),
                points: vec![(0.5, 0.5)],
                mark: Mark::Dots,
                offset: 0.2,
                colour: 1,
            },
        ];
        let plot = Plot {
            title: "t",
            x_label: "x",
            y_label: "y",
            x_range: None,
        };
        let svg = render(&plot, &series);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("circle"));
        assert!(svg.contains("b&lt;1&gt;"));
        assert_eq!(svg, render(&plot, &series));
    }
}
