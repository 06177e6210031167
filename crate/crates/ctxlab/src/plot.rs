//! Self-contained SVG emission for the three figure kinds: the C histogram,
//! the B_max histogram on the contextual subensemble, and the C-vs-B_max
//! scatter. No external plotting dependency; the figures are static.

use crate::pipeline::TSIRELSON;
use crate::stats::Histogram;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_B
            - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn svg_open(out: &mut String) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    for k in 0..=4 {
        let xv = f.x_min + (f.x_max - f.x_min) * k as f64 / 4.0;
        let yv = f.y_min + (f.y_max - f.y_min) * k as f64 / 4.0;
        let xp = f.x(xv);
        let yp = f.y(yv);
        out.push_str(&format!(
            "<text x=\"{xp}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{xv:.2}</text>\n",
            HEIGHT - MARGIN_B + 18.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{yv:.3}</text>\n",
            MARGIN_L - 6.0,
            yp + 4.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">{x_label}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 10.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {})\">{y_label}</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0
    ));
}

fn vline(out: &mut String, f: &Frame, x: f64) {
    let xp = f.x(x);
    out.push_str(&format!(
        "<line x1=\"{xp}\" y1=\"{}\" x2=\"{xp}\" y2=\"{MARGIN_T}\" stroke=\"black\" \
         stroke-dasharray=\"6 4\"/>\n",
        HEIGHT - MARGIN_B
    ));
}

fn hline(out: &mut String, f: &Frame, y: f64) {
    let yp = f.y(y);
    out.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{yp}\" x2=\"{}\" y2=\"{yp}\" stroke=\"black\" \
         stroke-dasharray=\"6 4\"/>\n",
        WIDTH - MARGIN_R
    ));
}

fn histogram_svg(hist: &Histogram, x_label: &str, guides: &[f64]) -> String {
    let rows = hist.rows();
    let y_max = rows
        .iter()
        .map(|&(_, _, _, d)| d)
        .fold(0.0f64, f64::max)
        .max(1e-9)
        * 1.08;
    let f = Frame {
        x_min: hist.low,
        x_max: hist.high,
        y_min: 0.0,
        y_max,
    };
    let mut out = String::new();
    svg_open(&mut out);
    for (lo, hi, _, d) in rows {
        if d <= 0.0 {
            continue;
        }
        let x = f.x(lo);
        let w = f.x(hi) - x;
        let y = f.y(d);
        let h = f.y(0.0) - y;
        out.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" \
             fill=\"#4878a8\" stroke=\"none\"/>\n"
        ));
    }
    for &g in guides {
        vline(&mut out, &f, g);
    }
    axes(&mut out, &f, x_label, "density");
    out.push_str("</svg>\n");
    out
}

/// C histogram with the dashed guide at the classical bound C = 4.
pub fn hist_c_svg(hist: &Histogram) -> String {
    histogram_svg(hist, "C", &[4.0])
}

/// B_max histogram with dashed guides at the classical bound 2 and the
/// quantum maximum 2*sqrt(2).
pub fn hist_b_svg(hist: &Histogram) -> String {
    histogram_svg(hist, "B_max", &[2.0, TSIRELSON])
}

/// Scatter of (C, B_max) with horizontal guides at the classical and quantum
/// CHSH bounds and vertical guides at the observed C extremes.
pub fn scatter_svg(points: &[(f64, f64)]) -> String {
    let c_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let c_max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let pad = ((c_max - c_min) * 0.05).max(1e-3);
    let f = Frame {
        x_min: (c_min - pad).max(2.0),
        x_max: (c_max + pad).min(6.0 + 1e-9).max(c_min + 2.0 * pad),
        y_min: 1.95,
        y_max: TSIRELSON + 0.05,
    };
    let mut out = String::new();
    svg_open(&mut out);
    for &(c, b) in points {
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.6\" fill=\"#4878a8\" fill-opacity=\"0.5\"/>\n",
            f.x(c),
            f.y(b)
        ));
    }
    hline(&mut out, &f, 2.0);
    hline(&mut out, &f, TSIRELSON);
    vline(&mut out, &f, c_min);
    vline(&mut out, &f, c_max);
    axes(&mut out, &f, "C", "B_max");
    out.push_str("</svg>\n");
    out
}
