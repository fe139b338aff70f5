//! Layered SVG figures of a domain, its mesh and the nodal line.
//!
//! Coordinates are written in domain units with six decimals and `y`
//! flipped, so identical inputs give identical bytes.

use std::fmt::Write as _;

use slidenodal_core::geometry::{DomainBoundary, LoopTag, Point, ProbeSet};
use slidenodal_core::mesh::Mesh;
use slidenodal_core::nodal::NodalSet;
use slidenodal_core::sweep::Evaluation;

/// Screen pixels per domain unit.
const PX_PER_UNIT: f64 = 240.0;
/// Angular step used to flatten boundary arcs, in radians.
const ARC_STEP: f64 = 0.5 * std::f64::consts::PI / 180.0;

pub const NODAL_COLOR: &str = "#1f4fd1";
pub const SIGMA_COLOR: &str = "#d1231f";

#[derive(Clone, Copy, Debug)]
pub struct Scene<'a> {
    pub boundary: &'a DomainBoundary,
    pub mesh: Option<&'a Mesh>,
    pub nodal: Option<&'a NodalSet>,
    /// The segment from W to E.
    pub sigma: Option<(Point, Point)>,
    pub p_hole: Option<Point>,
    pub title: Option<&'a str>,
}

impl<'a> Scene<'a> {
    pub fn new(boundary: &'a DomainBoundary) -> Self {
        Scene { boundary, mesh: None, nodal: None, sigma: None, p_hole: None, title: None }
    }

    /// Boundary, nodal line and probes of an evaluated parameter.
    pub fn of(ev: &'a Evaluation, with_mesh: bool) -> Self {
        let probes = ProbeSet::new(&ev.params);
        Scene {
            boundary: &ev.boundary,
            mesh: with_mesh.then_some(&ev.mesh),
            nodal: Some(&ev.nodal),
            sigma: Some(probes.sigma),
            p_hole: (ev.boundary.loops.len() == 2).then_some(probes.p_hole),
            title: None,
        }
    }
}

fn xy(out: &mut String, cmd: char, p: Point) {
    let _ = write!(out, "{cmd}{:.6} {:.6}", p.x, -p.y);
}

fn path(points: &[Point], closed: bool) -> String {
    let mut d = String::new();
    for (i, &p) in points.iter().enumerate() {
        xy(&mut d, if i == 0 { 'M' } else { 'L' }, p);
    }
    if closed {
        d.push('Z');
    }
    d
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(scene: &Scene) -> String {
    let (lo, hi) = scene.boundary.bounds();
    let pad = 0.05 * (hi.x - lo.x).max(hi.y - lo.y);
    let (x0, y0) = (lo.x - pad, -hi.y - pad);
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let stroke = 0.004 * w.max(h);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0:.6} {y0:.6} {w:.6} {h:.6}\" width=\"{:.0}\" height=\"{:.0}\">",
        w * PX_PER_UNIT,
        h * PX_PER_UNIT
    );
    if let Some(t) = scene.title {
        let _ = writeln!(s, "<title>{}</title>", escape(t));
    }
    let _ = writeln!(s, "<rect x=\"{x0:.6}\" y=\"{y0:.6}\" width=\"{w:.6}\" height=\"{h:.6}\" fill=\"white\"/>");

    if let Some(m) = scene.mesh {
        let mut d = String::new();
        for &(a, b) in m.edges().keys() {
            xy(&mut d, 'M', m.vertices[a]);
            xy(&mut d, 'L', m.vertices[b]);
        }
        let _ = writeln!(
            s,
            "<g id=\"mesh\"><path d=\"{d}\" fill=\"none\" stroke=\"#b8b8b8\" stroke-width=\"{:.6}\"/></g>",
            0.25 * stroke
        );
    }

    let _ = writeln!(s, "<g id=\"boundary\" fill=\"none\" stroke-width=\"{stroke:.6}\">");
    for lp in &scene.boundary.loops {
        let style = match lp.tag {
            LoopTag::Left | LoopTag::Single => "stroke=\"#000000\"".to_string(),
            LoopTag::Right => format!("stroke=\"#5a5a5a\" stroke-dasharray=\"{:.6} {:.6}\"", 3.0 * stroke, 1.5 * stroke),
        };
        let _ = writeln!(
            s,
            "<path class=\"{}\" d=\"{}\" {style}/>",
            lp.tag.as_str(),
            path(&lp.polyline(ARC_STEP), true)
        );
    }
    s.push_str("</g>\n");

    if let Some(n) = scene.nodal.filter(|n| !n.chains.is_empty()) {
        let _ = writeln!(
            s,
            "<g id=\"nodal\" fill=\"none\" stroke=\"{NODAL_COLOR}\" stroke-width=\"{:.6}\">",
            1.5 * stroke
        );
        for c in &n.chains {
            let closed = c.is_closed();
            let pts = if closed { &c.points[..c.points.len() - 1] } else { &c.points[..] };
            let _ = writeln!(s, "<path d=\"{}\"/>", path(pts, closed));
        }
        s.push_str("</g>\n");
    }

    if scene.sigma.is_some() || scene.p_hole.is_some() {
        s.push_str("<g id=\"probes\">\n");
        if let Some((a, b)) = scene.sigma {
            let _ = writeln!(
                s,
                "<path id=\"sigma\" d=\"{}\" fill=\"none\" stroke=\"{SIGMA_COLOR}\" stroke-width=\"{stroke:.6}\"/>",
                path(&[a, b], false)
            );
        }
        if let Some(p) = scene.p_hole {
            let r = 3.0 * stroke;
            let _ = writeln!(
                s,
                "<circle id=\"p_hole\" cx=\"{:.6}\" cy=\"{:.6}\" r=\"{r:.6}\" fill=\"#000000\"/>",
                p.x, -p.y
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_nodal_set_has_no_nodal_layer() {
        let b = DomainBoundary::rectangle(1.0, 0.5);
        let empty = NodalSet { chains: Vec::new(), eps_zero: 1e-9 };
        let svg = render(&Scene { nodal: Some(&empty), ..Scene::new(&b) });
        assert!(!svg.contains("id=\"nodal\""));
        assert!(svg.contains("class=\"single\""));
        assert_eq!(svg, render(&Scene { nodal: Some(&empty), ..Scene::new(&b) }));
    }

    #[test]
    fn loops_get_distinct_strokes() {
        let b = DomainBoundary::annulus(0.0, 1.0, 2.0);
        let svg = render(&Scene::new(&b));
        let left = svg.lines().find(|l| l.contains("class=\"left\"")).unwrap();
        let right = svg.lines().find(|l| l.contains("class=\"right\"")).unwrap();
        assert!(!left.contains("dasharray") && right.contains("dasharray"));
    }
}
