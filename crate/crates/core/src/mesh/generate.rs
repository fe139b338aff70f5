use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{contains, DomainBoundary, Point, Segment};

use super::cdt::{Cdt, Piece, Side};
use super::{point_bits, BoundaryEdge, Mesh, MeshError};

/// Target element sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizingSpec {
    /// Target edge length away from the handle.
    pub base_edge: f64,
    /// Minimum number of element layers across the handle width.
    pub ring_layers: usize,
    /// Growth factor of the edge length per element away from the handle.
    pub grading: f64,
    /// Vertex budget for the whole (mirrored) mesh.
    pub max_vertices: usize,
}

impl Default for SizingSpec {
    fn default() -> Self {
        SizingSpec { base_edge: 0.04, ring_layers: 3, grading: 1.3, max_vertices: 600_000 }
    }
}

/// Minimum angle enforced by the refinement, in degrees.
pub const MIN_ANGLE_DEG: f64 = 20.5;

struct Sizer {
    base: f64,
    ring: Option<(Point, f64, f64, f64)>,
    slope: f64,
}

impl Sizer {
    fn size(&self, p: Point) -> f64 {
        match self.ring {
            None => self.base,
            Some((c, r0, r1, s)) => {
                let d = p.dist(c);
                let gap = (r0 - d).max(d - r1).max(0.0);
                self.base.min(s + self.slope * gap)
            }
        }
    }
}

/// Longest arc sweep of an initial boundary subsegment.
const MAX_SUBSEGMENT_SWEEP: f64 = PI / 16.0;

/// Triangulate the domain. The upper half (`y >= 0`) is meshed with the
/// x-axis as a constraint and then reflected.
pub fn generate(boundary: &DomainBoundary, sizing: &SizingSpec) -> Result<Mesh, MeshError> {
    if !(sizing.base_edge > 0.0) || sizing.ring_layers < 3 || !(sizing.grading >= 1.0) {
        return Err(MeshError::Invalid(alloc::format!(
            "sizing needs base_edge > 0, ring_layers >= 3 and grading >= 1 (got {:?})",
            sizing
        )));
    }
    let params = boundary.params.filter(|p| p.h > 0.0);
    let sizer = Sizer {
        base: sizing.base_edge,
        ring: params.map(|p| (p.center(), p.r, p.r + p.h, p.h / sizing.ring_layers as f64)),
        slope: sizing.grading - 1.0,
    };

    // vertex estimate: equilateral elements of the local size
    let tri_area = |s: f64| 3f64.sqrt() / 4.0 * s * s;
    let mut estimate = boundary.area() / tri_area(sizing.base_edge) / 2.0;
    if let Some(p) = params {
        let s = p.h / sizing.ring_layers as f64;
        let ring_area = PI * ((p.r + p.h).powi(2) - p.r * p.r);
        estimate += ring_area / tri_area(s) / 2.0;
    }
    if estimate > sizing.max_vertices as f64 {
        return Err(MeshError::Resolution(alloc::format!(
            "about {:.0} vertices needed, budget is {}",
            estimate,
            sizing.max_vertices
        )));
    }

    // input curves: the upper boundary chains, then the axis intervals
    let mut pieces: Vec<Piece> = Vec::new();
    let mut axis_x: Vec<f64> = Vec::new();
    for lp in &boundary.loops {
        let chains = lp.upper_chains();
        if chains.is_empty() {
            return Err(MeshError::Invalid(alloc::string::String::from(
                "every boundary loop must cross the x-axis",
            )));
        }
        for ch in chains {
            axis_x.push(ch[0].curve.start().x);
            axis_x.push(ch[ch.len() - 1].curve.end().x);
            for s in ch {
                pieces.push(Piece { curve: s.curve, tag: Some(lp.tag) });
            }
        }
    }
    axis_x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    axis_x.dedup();
    for w in axis_x.windows(2) {
        let mid = Point::new(0.5 * (w[0] + w[1]), 0.0);
        let inside = match boundary.params {
            Some(p) => contains(&p, mid),
            None => boundary.encloses(mid),
        };
        if inside {
            pieces.push(Piece { curve: Segment::line(Point::new(w[0], 0.0), Point::new(w[1], 0.0)), tag: None });
        }
    }

    // initial subsegments
    let mut verts: Vec<Point> = Vec::new();
    let mut index: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    let mut vid = |p: Point, verts: &mut Vec<Point>| -> usize {
        *index.entry(point_bits(p)).or_insert_with(|| {
            verts.push(p);
            verts.len() - 1
        })
    };
    let mut subsegs: Vec<(usize, usize, usize)> = Vec::new();
    for (k, pc) in pieces.iter().enumerate() {
        let mut params_pts = Vec::new();
        subdivide(&pc.curve, 0.0, 1.0, pc.curve.start(), pc.curve.end(), &sizer, &mut params_pts);
        let mut prev = vid(pc.curve.start(), &mut verts);
        for q in params_pts {
            let v = vid(q, &mut verts);
            subsegs.push((prev, v, k));
            prev = v;
        }
        let v = vid(pc.curve.end(), &mut verts);
        subsegs.push((prev, v, k));
    }

    let (lo, hi) = verts.iter().fold(
        (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y))),
    );
    let mut cdt = Cdt::new(lo, hi, &pieces);
    let mut map = Vec::with_capacity(verts.len());
    for &p in &verts {
        map.push(cdt.insert_vertex(p)?);
    }
    for &(a, b, k) in &subsegs {
        cdt.add_segment(map[a], map[b], k);
    }
    let budget = sizing.max_vertices / 2 + 3;
    cdt.recover_segments(budget)?;
    if cfg!(debug_assertions) {
        cdt.validate().map_err(MeshError::Invalid)?;
    }
    cdt.mark_sides()?;
    let size = |p: Point| sizer.size(p);
    cdt.refine(MIN_ANGLE_DEG.to_radians(), &size, budget)?;

    let mesh = mirror_half(&cdt, &pieces)?;
    if let Some((c, r0, r1, s)) = sizer.ring {
        for t in 0..mesh.n_triangles() {
            let [a, b, cc] = mesh.corners(t);
            let g = Point::new((a.x + b.x + cc.x) / 3.0, (a.y + b.y + cc.y) / 3.0);
            let d = g.dist(c);
            if d > r0 && d < r1 && mesh.longest_edge(t) > s * (1.0 + 1e-9) {
                return Err(MeshError::Resolution(alloc::format!(
                    "element of size {} in the handle exceeds {}",
                    mesh.longest_edge(t),
                    s
                )));
            }
        }
    }
    mesh.check((MIN_ANGLE_DEG - 0.5).to_radians())?;
    Ok(mesh)
}

/// Interior split points of a curve so that chords respect the size field
/// and arcs are cut into pieces of bounded sweep.
fn subdivide(curve: &Segment, s0: f64, s1: f64, p0: Point, p1: Point, sizer: &Sizer, out: &mut Vec<Point>) {
    let sm = 0.5 * (s0 + s1);
    let pm = curve.point_at(sm);
    let too_curved = match *curve {
        Segment::Arc { sweep, .. } => (s1 - s0) * sweep.abs() > MAX_SUBSEGMENT_SWEEP,
        Segment::Line { .. } => false,
    };
    if too_curved || p0.dist(p1) > sizer.size(pm) {
        subdivide(curve, s0, sm, p0, pm, sizer, out);
        out.push(pm);
        subdivide(curve, sm, s1, pm, p1, sizer, out);
    }
}

/// Extract the inside triangles of the half-domain triangulation and
/// reflect them.
fn mirror_half(cdt: &Cdt, pieces: &[Piece]) -> Result<Mesh, MeshError> {
    let mut used = alloc::vec![usize::MAX; cdt.pts.len()];
    let mut half_tris = Vec::new();
    for t in 0..cdt.tv.len() {
        if cdt.alive[t] && cdt.side[t] == Side::Inside {
            half_tris.push(cdt.tv[t]);
            for &v in &cdt.tv[t] {
                used[v] = 0;
            }
        }
    }
    let mut verts = Vec::new();
    for v in 0..cdt.pts.len() {
        if used[v] == 0 {
            used[v] = verts.len();
            verts.push(cdt.pts[v]);
        }
    }
    let nh = verts.len();
    let mut mirror = alloc::vec![0usize; nh];
    for i in 0..nh {
        if verts[i].y < 0.0 {
            return Err(MeshError::Invalid(alloc::string::String::from("half mesh has a vertex below the axis")));
        }
        if verts[i].y == 0.0 {
            verts[i].y = 0.0;
            mirror[i] = i;
        } else {
            mirror[i] = verts.len();
            let m = verts[i].mirror();
            verts.push(m);
        }
    }
    let mut tris = Vec::with_capacity(2 * half_tris.len());
    for t in &half_tris {
        tris.push([used[t[0]], used[t[1]], used[t[2]]]);
    }
    for t in &half_tris {
        let [a, b, c] = [used[t[0]], used[t[1]], used[t[2]]];
        tris.push([mirror[a], mirror[c], mirror[b]]);
    }
    let np = pieces.len();
    let mut curves: Vec<Segment> = pieces.iter().map(|p| p.curve).collect();
    curves.extend(pieces.iter().map(|p| p.curve.mirrored()));
    let mut bedges = Vec::new();
    let mut lower = Vec::new();
    for (&(a, b), &(s0, k)) in cdt.segs.iter() {
        let Some(tag) = pieces[k].tag else { continue };
        let s1 = if s0 == a { b } else { a };
        let (u, w) = (used[s0], used[s1]);
        bedges.push(BoundaryEdge { v: [u, w], tag, curve: Some(k) });
        lower.push(BoundaryEdge { v: [mirror[w], mirror[u]], tag, curve: Some(np + k) });
    }
    bedges.extend(lower);
    Mesh::from_parts(verts, tris, bedges, curves)
}
