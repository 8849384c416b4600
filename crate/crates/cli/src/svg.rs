//! Minimal SVG scenes for fans, webs and eigenvalue densities.
//!
//! Scene coordinates are screen coordinates (y grows downwards). The
//! `viewBox` is computed from the elements, so nothing is ever clipped.

use std::f64::consts::PI;
use std::fmt::Write;

use lenscs_core::{Density, LatticeFan, PQWeb, Triangulation};

#[derive(Clone, Debug, PartialEq)]
pub struct Style {
    pub stroke: &'static str,
    pub fill: &'static str,
    pub stroke_width: f64,
    pub dashed: bool,
}

impl Style {
    pub const fn line(stroke: &'static str, stroke_width: f64) -> Self {
        Style { stroke, fill: "none", stroke_width, dashed: false }
    }

    pub const fn solid(fill: &'static str) -> Self {
        Style { stroke: "none", fill, stroke_width: 0.0, dashed: false }
    }

    fn attrs(&self) -> String {
        let mut s = format!(r#"stroke="{}" fill="{}""#, self.stroke, self.fill);
        if self.stroke_width > 0.0 {
            write!(s, r#" stroke-width="{}""#, num(self.stroke_width)).unwrap();
        }
        if self.dashed {
            s.push_str(r#" stroke-dasharray="4 3""#);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    Point { at: [f64; 2], radius: f64, style: Style },
    Segment { from: [f64; 2], to: [f64; 2], style: Style },
    Polygon { points: Vec<[f64; 2]>, style: Style },
    Polyline { points: Vec<[f64; 2]>, style: Style },
    Label { at: [f64; 2], text: String, size: f64, fill: &'static str },
}

impl Element {
    /// Axis-aligned box `[x0, y0, x1, y1]` containing the element as drawn.
    fn bounds(&self) -> [f64; 4] {
        let of = |pts: &[[f64; 2]], pad: f64| {
            let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
            for p in pts {
                b = [b[0].min(p[0] - pad), b[1].min(p[1] - pad), b[2].max(p[0] + pad), b[3].max(p[1] + pad)];
            }
            b
        };
        match self {
            Element::Point { at, radius, .. } => of(&[*at], *radius),
            Element::Segment { from, to, style } => of(&[*from, *to], style.stroke_width),
            Element::Polygon { points, style } | Element::Polyline { points, style } => of(points, style.stroke_width),
            Element::Label { at, text, size, .. } => {
                // Rough glyph box: 0.6 em per character, baseline at `at`.
                let w = 0.6 * size * text.chars().count() as f64;
                [at[0], at[1] - size, at[0] + w, at[1] + 0.3 * size]
            }
        }
    }

    fn coordinates(&self) -> Vec<[f64; 2]> {
        match self {
            Element::Point { at, .. } | Element::Label { at, .. } => vec![*at],
            Element::Segment { from, to, .. } => vec![*from, *to],
            Element::Polygon { points, .. } | Element::Polyline { points, .. } => points.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SvgScene {
    pub width: f64,
    pub height: f64,
    pub elements: Vec<Element>,
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn points_attr(points: &[[f64; 2]]) -> String {
    points.iter().map(|p| format!("{},{}", num(p[0]), num(p[1]))).collect::<Vec<_>>().join(" ")
}

impl SvgScene {
    pub fn new(width: f64, height: f64) -> Self {
        SvgScene { width, height, elements: Vec::new() }
    }

    pub fn push(&mut self, e: Element) {
        self.elements.push(e);
    }

    /// `[x, y, w, h]` enclosing every element with a margin.
    pub fn view_box(&self) -> [f64; 4] {
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for e in &self.elements {
            let eb = e.bounds();
            b = [b[0].min(eb[0]), b[1].min(eb[1]), b[2].max(eb[2]), b[3].max(eb[3])];
        }
        if !b[0].is_finite() {
            return [0.0, 0.0, self.width, self.height];
        }
        let m = 10.0;
        [b[0] - m, b[1] - m, (b[2] - b[0]) + 2.0 * m, (b[3] - b[1]) + 2.0 * m]
    }

    pub fn all_finite(&self) -> bool {
        self.elements.iter().flat_map(|e| e.coordinates()).all(|p| p[0].is_finite() && p[1].is_finite())
    }

    pub fn to_svg(&self) -> String {
        let vb = self.view_box();
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="{} {} {} {}">"#,
            num(self.width),
            num(self.height),
            num(vb[0]),
            num(vb[1]),
            num(vb[2]),
            num(vb[3])
        )
        .unwrap();
        for e in &self.elements {
            let line = match e {
                Element::Point { at, radius, style } => {
                    format!(r#"<circle cx="{}" cy="{}" r="{}" {}/>"#, num(at[0]), num(at[1]), num(*radius), style.attrs())
                }
                Element::Segment { from, to, style } => format!(
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}" {}/>"#,
                    num(from[0]),
                    num(from[1]),
                    num(to[0]),
                    num(to[1]),
                    style.attrs()
                ),
                Element::Polygon { points, style } => {
                    format!(r#"<polygon points="{}" {}/>"#, points_attr(points), style.attrs())
                }
                Element::Polyline { points, style } => {
                    format!(r#"<polyline points="{}" {}/>"#, points_attr(points), style.attrs())
                }
                Element::Label { at, text, size, fill } => format!(
                    r#"<text x="{}" y="{}" font-size="{}" font-family="sans-serif" fill="{}">{}</text>"#,
                    num(at[0]),
                    num(at[1]),
                    num(*size),
                    fill,
                    escape(text)
                ),
            };
            s.push_str("  ");
            s.push_str(&line);
            s.push('\n');
        }
        s.push_str("</svg>\n");
        s
    }
}

const GRID: f64 = 40.0;

fn lattice(x: f64, y: f64) -> [f64; 2] {
    [GRID * x, -GRID * y]
}

/// Fan points, hull and triangulation on a fixed lattice scale.
pub fn render_fan(fan: &LatticeFan, tri: &Triangulation) -> SvgScene {
    let mut scene = SvgScene::new(480.0, 480.0);
    let at = |i: usize| lattice(fan.points[i].x as f64, fan.points[i].y as f64);
    let hull: Vec<[f64; 2]> = fan.hull_vertices.iter().map(|v| lattice(v.x as f64, v.y as f64)).collect();
    scene.push(Element::Polygon { points: hull, style: Style { fill: "#eef3fb", ..Style::line("#1f3b73", 2.0) } });
    for (e, _) in tri.edge_map() {
        scene.push(Element::Segment { from: at(e[0]), to: at(e[1]), style: Style::line("#5b7db8", 1.0) });
    }
    let interior: std::collections::BTreeSet<_> = lenscs_core::interior_points(fan).into_iter().collect();
    for (i, v) in fan.points.iter().enumerate() {
        let fill = if interior.contains(v) { "#c0392b" } else { "#1f3b73" };
        scene.push(Element::Point { at: at(i), radius: 4.0, style: Style::solid(fill) });
        let p = at(i);
        scene.push(Element::Label { at: [p[0] + 6.0, p[1] - 6.0], text: format!("({},{})", v.x, v.y), size: 9.0, fill: "#333" });
    }
    scene
}

/// The web with internal edges, external legs and trivalent nodes.
pub fn render_web(web: &PQWeb) -> SvgScene {
    let mut scene = SvgScene::new(480.0, 480.0);
    let pos: Vec<[f64; 2]> = web.positions.iter().map(|r| r.to_f64()).map(|[x, y]| lattice(x, y)).collect();
    for e in &web.internal_edges {
        scene.push(Element::Segment { from: pos[e.nodes[0]], to: pos[e.nodes[1]], style: Style::line("#1f3b73", 1.5) });
    }
    for leg in &web.external_legs {
        let (cx, cy) = (leg.charge[0] as f64, leg.charge[1] as f64);
        let norm = (cx * cx + cy * cy).sqrt();
        let from = pos[leg.node];
        let to = [from[0] + 1.2 * GRID * cx / norm, from[1] - 1.2 * GRID * cy / norm];
        scene.push(Element::Segment { from, to, style: Style { dashed: true, ..Style::line("#1f3b73", 1.5) } });
    }
    for p in &pos {
        scene.push(Element::Point { at: *p, radius: 3.0, style: Style::solid("#c0392b") });
    }
    scene
}

/// Cuts on the cylinder: group `I` sits at height `2 pi I / p`, with its
/// density drawn above the cut. Cuts of non-trivial sectors are red.
pub fn render_density(densities: &[Density], p: usize) -> SvgScene {
    let mut scene = SvgScene::new(640.0, 480.0);
    let sx = 120.0;
    let sy = 60.0;
    let row = 2.0 * PI / p.max(1) as f64;
    let peak = densities.iter().flat_map(|d| d.values.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let amp = if peak > 0.0 { 0.8 * row / peak } else { 0.0 };
    let (lo, hi) = densities
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d.support.0), hi.max(d.support.1)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (-1.0, 1.0) };
    let pad = 0.1 * (hi - lo).max(1e-9);
    let to = |x: f64, y: f64| [sx * x, -sy * y];
    // Cylinder axis and the identification line at height 2 pi.
    scene.push(Element::Segment { from: to(lo - pad, 0.0), to: to(hi + pad, 0.0), style: Style::line("#999", 0.8) });
    scene.push(Element::Segment {
        from: to(lo - pad, 2.0 * PI),
        to: to(hi + pad, 2.0 * PI),
        style: Style { dashed: true, ..Style::line("#999", 0.8) },
    });
    for d in densities {
        let y = row * d.group as f64;
        let colour = if d.group == 0 { "#1f3b73" } else { "#c0392b" };
        scene.push(Element::Segment { from: to(d.support.0, y), to: to(d.support.1, y), style: Style::line(colour, 3.0) });
        let curve: Vec<[f64; 2]> = d.grid.iter().zip(&d.values).map(|(&x, &v)| to(x, y + amp * v)).collect();
        scene.push(Element::Polyline { points: curve, style: Style::line(colour, 1.2) });
        let at = to(hi + pad, y);
        scene.push(Element::Label { at: [at[0] + 6.0, at[1] + 4.0], text: format!("I = {}", d.group), size: 11.0, fill: colour });
    }
    scene
}
