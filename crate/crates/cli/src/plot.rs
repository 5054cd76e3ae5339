//! Minimal vector plots: polylines, markers, labelled direction rays.
//! Data coordinates are mapped with `y` flipped; the view box fits all
//! geometry with 10% padding on every side.

use scurve_core::quaddiff::CriticalGraph;
use scurve_core::scurve::SCurveSolution;
use scurve_core::C64;
use svg::node::element::path::Data;
use svg::node::element::{Circle, Group, Path, Rectangle, Text};
use svg::Document;

pub const PADDING: f64 = 0.1;

struct Line {
    pts: Vec<C64>,
    color: &'static str,
    width: f64,
    dashed: bool,
}

struct Marker {
    at: C64,
    color: &'static str,
}

struct Label {
    at: C64,
    text: String,
}

#[derive(Default)]
pub struct Plot {
    lines: Vec<Line>,
    markers: Vec<Marker>,
    labels: Vec<Label>,
    title: Option<String>,
}

/// `(x, y, width, height)` of the padded view box in SVG coordinates.
pub type ViewBox = (f64, f64, f64, f64);

impl Plot {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn title(&mut self, t: impl Into<String>) -> &mut Self {
        self.title = Some(t.into());
        self
    }

    pub fn line(&mut self, pts: &[C64], color: &'static str, width: f64) -> &mut Self {
        self.lines.push(Line { pts: pts.to_vec(), color, width, dashed: false });
        self
    }

    pub fn dashed(&mut self, pts: &[C64], color: &'static str) -> &mut Self {
        self.lines.push(Line { pts: pts.to_vec(), color, width: 1.0, dashed: true });
        self
    }

    pub fn marker(&mut self, at: C64, color: &'static str) -> &mut Self {
        self.markers.push(Marker { at, color });
        self
    }

    pub fn label(&mut self, at: C64, text: impl Into<String>) -> &mut Self {
        self.labels.push(Label { at, text: text.into() });
        self
    }

    fn all_points(&self) -> impl Iterator<Item = C64> + '_ {
        self.lines
            .iter()
            .flat_map(|l| l.pts.iter().copied())
            .chain(self.markers.iter().map(|m| m.at))
            .chain(self.labels.iter().map(|l| l.at))
            .filter(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn view_box(&self) -> ViewBox {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in self.all_points() {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(-z.im);
            y1 = y1.max(-z.im);
        }
        if !x0.is_finite() {
            return (-1.0, -1.0, 2.0, 2.0);
        }
        // degenerate extents get the other axis' size
        let span = (x1 - x0).max(y1 - y0).max(1e-3);
        let (w, h) = ((x1 - x0).max(1e-2 * span), (y1 - y0).max(1e-2 * span));
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let (w, h) = (w * (1.0 + 2.0 * PADDING), h * (1.0 + 2.0 * PADDING));
        (cx - 0.5 * w, cy - 0.5 * h, w, h)
    }

    pub fn render(&self) -> String {
        let vb = self.view_box();
        let unit = vb.2.max(vb.3);
        let mut doc = Document::new()
            .set("viewBox", vb)
            .set("width", 800)
            .set("height", (800.0 * vb.3 / vb.2).round().clamp(100.0, 2400.0))
            .add(
                Rectangle::new()
                    .set("x", vb.0)
                    .set("y", vb.1)
                    .set("width", vb.2)
                    .set("height", vb.3)
                    .set("fill", "white"),
            );
        let mut lines = Group::new().set("fill", "none").set("stroke-linecap", "round");
        for l in self.lines.iter().filter(|l| l.pts.len() >= 2) {
            let mut d = Data::new().move_to((l.pts[0].re, -l.pts[0].im));
            for z in &l.pts[1..] {
                d = d.line_to((z.re, -z.im));
            }
            let mut p = Path::new()
                .set("d", d)
                .set("stroke", l.color)
                .set("stroke-width", l.width)
                .set("vector-effect", "non-scaling-stroke");
            if l.dashed {
                p = p.set("stroke-dasharray", "4 3");
            }
            lines = lines.add(p);
        }
        doc = doc.add(lines);
        for m in &self.markers {
            doc = doc.add(
                Circle::new()
                    .set("cx", m.at.re)
                    .set("cy", -m.at.im)
                    .set("r", 6e-3 * unit)
                    .set("fill", m.color),
            );
        }
        let font = 2.5e-2 * unit;
        for l in &self.labels {
            doc = doc.add(
                Text::new(l.text.clone())
                    .set("x", l.at.re)
                    .set("y", -l.at.im)
                    .set("font-size", font)
                    .set("font-family", "sans-serif"),
            );
        }
        if let Some(t) = &self.title {
            doc = doc.add(
                Text::new(t.clone())
                    .set("x", vb.0 + 0.02 * vb.2)
                    .set("y", vb.1 + 1.5 * font)
                    .set("font-size", font)
                    .set("font-family", "sans-serif"),
            );
        }
        doc.to_string()
    }
}

/// Critical graph: bounded arcs blue, escaping ones black, truncated ones
/// orange, zeros red, infinity directions as labelled dashed rays.
pub fn graph_plot(g: &CriticalGraph) -> Plot {
    let mut p = Plot::new();
    let bounded = g.bounded().count();
    p.title(format!("critical graph: {} zeros, {bounded} bounded, {} trajectories", g.zeros.len(), g.trajectories.len()));
    for t in &g.trajectories {
        let (color, width) = if t.is_bounded() {
            ("#1f4fd1", 2.5)
        } else if t.is_truncated() {
            ("#e08a00", 1.0)
        } else {
            ("black", 1.0)
        };
        p.line(&t.nodes, color, width);
    }
    for z in &g.zeros {
        p.marker(z.z, "#d11f1f");
    }
    if !g.infinity.is_empty() {
        let center = if g.zeros.is_empty() {
            C64::new(0.0, 0.0)
        } else {
            g.zeros.iter().map(|z| z.z).sum::<C64>() / g.zeros.len() as f64
        };
        let reach = g
            .trajectories
            .iter()
            .flat_map(|t| t.nodes.iter())
            .map(|z| (z - center).norm())
            .fold(1.0, f64::max);
        for (k, &a) in g.infinity.iter().enumerate() {
            let tip = center + C64::from_polar(reach, a);
            p.dashed(&[center + C64::from_polar(0.6 * reach, a), tip], "#888888");
            p.label(tip, format!("∞{k}: {:.3}", a));
        }
    }
    p
}

/// Solution overview: contour grey, support blue, endpoints red.
pub fn solution_plot(sol: &SCurveSolution) -> Plot {
    let mut p = Plot::new();
    p.title(format!(
        "I = {:.6}, criticality {:.2e}, {}",
        sol.energy,
        sol.residuals.criticality,
        if sol.certified() { "certified" } else { "not certified" }
    ));
    for arc in &sol.contour.arcs {
        p.line(arc, "#999999", 1.0);
    }
    for a in &sol.arcs {
        p.line(&a.polyline, "#1f4fd1", 3.0);
    }
    for e in sol.endpoints() {
        p.marker(e, "#d11f1f");
    }
    p
}
