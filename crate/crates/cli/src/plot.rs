//! Minimal self-contained SVG rendering: polylines, markers and heatmaps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, style: Style::Line }
    }

    pub fn markers(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, style: Style::Markers }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Vertical reference lines `(x, label)`.
    pub markers: Vec<(f64, String)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 1e-12 { lo.abs() * 0.05 } else { 0.5 };
        return (lo - pad, hi + pad);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        (LEFT + W - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(out, "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", x1 - x0, y1 - y0);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{y1}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\
             <text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            y1 + 5.0,
            y1 + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", (x0 + x1) / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

impl LinePlot {
    pub fn render(&self) -> String {
        let xs = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).chain(self.markers.iter().map(|m| m.0));
        let ys = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1));
        let f = Frame { x: range(xs), y: range(ys) };
        let mut out = String::new();
        header(&mut out, &self.title);
        axes(&mut out, &f, &self.x_label, &self.y_label);
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<(f64, f64)> =
                s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).map(|&(x, y)| (f.px(x), f.py(y))).collect();
            match s.style {
                Style::Line => {
                    let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    let _ = writeln!(
                        out,
                        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
                        path.join(" ")
                    );
                }
                Style::Markers => {
                    for (x, y) in &pts {
                        let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>");
                    }
                }
            }
            let ly = TOP + 14.0 + 18.0 * i as f64;
            let lx = W - RIGHT + 12.0;
            let _ = writeln!(
                out,
                "<line x1=\"{lx}\" y1=\"{:.2}\" x2=\"{}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\
                 <text x=\"{}\" y=\"{ly:.2}\">{}</text>",
                ly - 4.0,
                lx + 18.0,
                ly - 4.0,
                lx + 24.0,
                escape(&s.label)
            );
        }
        for (x, label) in &self.markers {
            let px = f.px(*x);
            let _ = writeln!(
                out,
                "<line x1=\"{px:.2}\" y1=\"{TOP}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\
                 <text x=\"{:.2}\" y=\"{}\" fill=\"gray\">{}</text>",
                H - BOTTOM,
                px + 4.0,
                TOP + 12.0,
                escape(label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Cell-colored map of `values[iy][ix]` on a rectangular grid.
#[derive(Clone, Debug, Default)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Optional overlay curve in data coordinates.
    pub overlay: Vec<(f64, f64)>,
}

fn color_scale(t: f64) -> String {
    // white -> blue -> dark red
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let u = t / 0.5;
        (255.0 * (1.0 - u) + 40.0 * u, 255.0 * (1.0 - u) + 90.0 * u, 255.0 * (1.0 - u) + 200.0 * u)
    } else {
        let u = (t - 0.5) / 0.5;
        (40.0 + 140.0 * u, 90.0 * (1.0 - u), 200.0 * (1.0 - u) + 30.0 * u)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

fn cell_edges(v: &[f64]) -> (f64, f64) {
    if v.len() < 2 {
        let c = v.first().copied().unwrap_or(0.0);
        return (c - 0.5, c + 0.5);
    }
    let h0 = (v[1] - v[0]) / 2.0;
    let h1 = (v[v.len() - 1] - v[v.len() - 2]) / 2.0;
    (v[0] - h0, v[v.len() - 1] + h1)
}

impl Heatmap {
    pub fn render(&self) -> String {
        let f = Frame { x: cell_edges(&self.xs), y: cell_edges(&self.ys) };
        let (lo, hi) = range(self.values.iter().flatten().copied());
        let mut out = String::new();
        header(&mut out, &self.title);
        let half = |v: &[f64], i: usize| -> (f64, f64) {
            let left = if i == 0 { cell_edges(v).0 } else { (v[i - 1] + v[i]) / 2.0 };
            let right = if i + 1 == v.len() { cell_edges(v).1 } else { (v[i] + v[i + 1]) / 2.0 };
            (left, right)
        };
        for (iy, row) in self.values.iter().enumerate() {
            let (y0, y1) = half(&self.ys, iy);
            for (ix, &val) in row.iter().enumerate() {
                let (x0, x1) = half(&self.xs, ix);
                let _ = writeln!(
                    out,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                    f.px(x0),
                    f.py(y1),
                    f.px(x1) - f.px(x0),
                    f.py(y0) - f.py(y1),
                    color_scale((val - lo) / (hi - lo))
                );
            }
        }
        axes(&mut out, &f, &self.x_label, &self.y_label);
        if !self.overlay.is_empty() {
            let path: Vec<String> = self.overlay.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
            let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"{}\"/>", path.join(" "));
        }
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let y = H - BOTTOM - t * (H - TOP - BOTTOM);
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{:.2}\" width=\"16\" height=\"16\" fill=\"{}\"/><text x=\"{}\" y=\"{:.2}\">{}</text>",
                W - RIGHT + 20.0,
                y - 8.0,
                color_scale(t),
                W - RIGHT + 42.0,
                y + 4.0,
                tick(lo + t * (hi - lo))
            );
        }
        out.push_str("</svg>\n");
        out
    }
}
