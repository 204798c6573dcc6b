//! Minimal self-contained SVG line plots with deterministic byte output.

use kslab::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 48.0;

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn fmt_coord(x: f64) -> String {
    format!("{x:.3}")
}

fn fmt_tick(x: f64) -> String {
    format!("{x:.4e}")
}

/// Render a line plot; with `log_log` both axes are base-e logarithmic and
/// every coordinate must be strictly positive. Identical input yields
/// identical bytes.
pub fn emit_plot(series: &[Series], log_log: bool, x_label: &str, y_label: &str) -> Result<String> {
    if series.is_empty() || series.iter().any(|s| s.points.is_empty()) {
        return Err(Error::InvalidParameter(
            "plot requires at least one nonempty series".into(),
        ));
    }
    let map = |v: f64| -> Result<f64> {
        if log_log {
            if v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "log-log plot requires positive values, got {v}"
                )));
            }
            Ok(v.ln())
        } else {
            Ok(v)
        }
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            xs.push(map(x)?);
            ys.push(map(y)?);
        }
    }
    let (mut x_lo, mut x_hi) = bounds(&xs);
    let (mut y_lo, mut y_hi) = bounds(&ys);
    if x_hi == x_lo {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if y_hi == y_lo {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64, y: f64| {
        (
            MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w,
            MARGIN_TOP + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h,
        )
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // axes
    let (x0, y0) = (MARGIN_LEFT, HEIGHT - MARGIN_BOTTOM);
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt_coord(x0),
        fmt_coord(MARGIN_TOP),
        fmt_coord(x0),
        fmt_coord(y0)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt_coord(x0),
        fmt_coord(y0),
        fmt_coord(WIDTH - MARGIN_RIGHT),
        fmt_coord(y0)
    ));
    // tick labels at the corners of the data range
    let tick = |raw: f64| {
        if log_log {
            fmt_tick(raw.exp())
        } else {
            fmt_tick(raw)
        }
    };
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"start\">{}</text>\n",
        fmt_coord(x0),
        fmt_coord(y0 + 16.0),
        tick(x_lo)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        fmt_coord(WIDTH - MARGIN_RIGHT),
        fmt_coord(y0 + 16.0),
        tick(x_hi)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        fmt_coord(x0 - 4.0),
        fmt_coord(y0),
        tick(y_lo)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
        fmt_coord(x0 - 4.0),
        fmt_coord(MARGIN_TOP + 10.0),
        tick(y_hi)
    ));
    // axis labels
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        fmt_coord(MARGIN_LEFT + plot_w / 2.0),
        fmt_coord(HEIGHT - 10.0),
        xml_escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        fmt_coord(MARGIN_TOP + plot_h / 2.0),
        fmt_coord(MARGIN_TOP + plot_h / 2.0),
        xml_escape(y_label)
    ));

    for (si, s) in series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        let mut path = String::new();
        for (i, &(x, y)) in s.points.iter().enumerate() {
            let (px, py) = to_px(map(x)?, map(y)?);
            if i == 0 {
                path.push_str(&format!("M {} {}", fmt_coord(px), fmt_coord(py)));
            } else {
                path.push_str(&format!(" L {} {}", fmt_coord(px), fmt_coord(py)));
            }
        }
        svg.push_str(&format!(
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
        ));
        for &(x, y) in &s.points {
            let (px, py) = to_px(map(x)?, map(y)?);
            svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                fmt_coord(px),
                fmt_coord(py)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            fmt_coord(WIDTH - MARGIN_RIGHT - 160.0),
            fmt_coord(MARGIN_TOP + 14.0 * (si as f64 + 1.0)),
            xml_escape(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_series_renders_marker() {
        let svg = emit_plot(
            &[Series {
                label: "one".into(),
                points: vec![(2.0, 3.0)],
            }],
            false,
            "x",
            "y",
        )
        .unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<circle"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn log_log_descending_polyline() {
        let points: Vec<(f64, f64)> = [2u32, 4, 8, 16, 32]
            .iter()
            .map(|&n| (n as f64, 1.0 / (n as f64).sqrt()))
            .collect();
        let svg = emit_plot(
            &[Series {
                label: "delta".into(),
                points,
            }],
            true,
            "n",
            "norm",
        )
        .unwrap();
        assert!(svg.contains("<path"));
        // deterministic bytes
        let again = emit_plot(
            &[Series {
                label: "delta".into(),
                points: [2u32, 4, 8, 16, 32]
                    .iter()
                    .map(|&n| (n as f64, 1.0 / (n as f64).sqrt()))
                    .collect(),
            }],
            true,
            "n",
            "norm",
        )
        .unwrap();
        assert_eq!(svg, again);
    }

    #[test]
    fn rejects_empty_and_nonpositive_log_input() {
        assert!(emit_plot(&[], false, "x", "y").is_err());
        assert!(emit_plot(
            &[Series {
                label: "bad".into(),
                points: vec![(0.0, 1.0)]
            }],
            true,
            "x",
            "y"
        )
        .is_err());
    }
}
