use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::curve::Segment;
use super::domain::{fillets, rounded_rect_sdf, validate_params, DomainParams};
use super::point::Point;
use super::rrect::RoundedRect;
use super::trace::trace_loops;
use super::GeometryError;

/// Which boundary component a loop is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LoopTag {
    /// The component through `W = (-1, 0)`.
    Left,
    /// The component through `E = (1, 0)`.
    Right,
    /// The only component of a simply connected domain.
    Single,
}

impl LoopTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            LoopTag::Left => "left",
            LoopTag::Right => "right",
            LoopTag::Single => "single",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Ccw,
    Cw,
}

/// Primitive a boundary piece comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Origin {
    /// The rounded rectangle.
    Rect,
    /// One of the handle circles; `width` is the handle width `h`.
    Handle { width: f64 },
    /// A junction fillet.
    Junction,
    /// Any other analytic boundary (validation domains).
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySegment {
    pub curve: Segment,
    pub origin: Origin,
}

/// A closed, simple, piecewise-analytic boundary curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub segments: Vec<BoundarySegment>,
    pub tag: LoopTag,
    pub orientation: Orientation,
}

impl BoundaryLoop {
    fn from_curves(curves: Vec<(Segment, Origin)>, tag: LoopTag) -> Self {
        let mut lp = BoundaryLoop {
            segments: curves.into_iter().map(|(curve, origin)| BoundarySegment { curve, origin }).collect(),
            tag,
            orientation: Orientation::Ccw,
        };
        lp.orientation = if lp.signed_area() >= 0.0 { Orientation::Ccw } else { Orientation::Cw };
        lp
    }

    pub fn signed_area(&self) -> f64 {
        self.segments.iter().map(|s| s.curve.area_term()).sum()
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.curve.length()).sum()
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.segments.iter().map(|s| s.curve.distance(p)).fold(f64::INFINITY, f64::min)
    }

    /// Reverse the traversal direction.
    pub fn reverse(&mut self) {
        self.segments.reverse();
        for s in self.segments.iter_mut() {
            s.curve = s.curve.reversed();
        }
        self.orientation = match self.orientation {
            Orientation::Ccw => Orientation::Cw,
            Orientation::Cw => Orientation::Ccw,
        };
    }

    /// Largest gap between consecutive segment endpoints, including the
    /// closing gap.
    pub fn closure_gap(&self) -> f64 {
        let n = self.segments.len();
        (0..n)
            .map(|i| self.segments[i].curve.end().dist(self.segments[(i + 1) % n].curve.start()))
            .fold(0.0, f64::max)
    }

    /// Dense polyline through the loop (arcs subdivided at most every
    /// `max_angle` radians). The first vertex is not repeated.
    pub fn polyline(&self, max_angle: f64) -> Vec<Point> {
        let mut out = Vec::new();
        for s in &self.segments {
            match s.curve {
                Segment::Line { a, .. } => out.push(a),
                Segment::Arc { sweep, .. } => {
                    let n = ((sweep.abs() / max_angle).ceil() as usize).max(1);
                    for k in 0..n {
                        out.push(s.curve.point_at(k as f64 / n as f64));
                    }
                }
            }
        }
        out
    }

    /// Winding number of the loop around `p`.
    pub fn winding(&self, p: Point) -> i32 {
        let poly = self.polyline(PI / 720.0);
        let n = poly.len();
        let mut total = 0.0;
        for i in 0..n {
            let a = poly[i] - p;
            let b = poly[(i + 1) % n] - p;
            total += a.cross(b).atan2(a.dot(b));
        }
        (total / TAU).round() as i32
    }

    /// Split the loop at its x-axis crossings and return the maximal chains
    /// lying in `y >= 0`, each running from one axis point to another.
    /// Crossing points have `y == 0.0` exactly. Loops that do not meet the
    /// axis yield no chains.
    pub fn upper_chains(&self) -> Vec<Vec<BoundarySegment>> {
        let mut parts: Vec<BoundarySegment> = Vec::new();
        for s in &self.segments {
            let cuts = s.curve.axis_crossings();
            let mut s0 = 0.0;
            let mut p0 = s.curve.start();
            for &u in cuts.iter().chain(core::iter::once(&1.0)) {
                let p1 = if u == 1.0 {
                    s.curve.end()
                } else {
                    let q = s.curve.point_at(u);
                    Point::new(q.x, 0.0)
                };
                parts.push(BoundarySegment { curve: s.curve.sub(s0, u, p0, p1), origin: s.origin });
                s0 = u;
                p0 = p1;
            }
        }
        let upper = |b: &BoundarySegment| b.curve.point_at(0.5).y > 0.0;
        let n = parts.len();
        let Some(first) = (0..n).find(|&i| upper(&parts[i]) && !upper(&parts[(i + n - 1) % n])) else {
            return Vec::new();
        };
        let mut chains = Vec::new();
        let mut cur: Vec<BoundarySegment> = Vec::new();
        for k in 0..n {
            let seg = parts[(first + k) % n];
            if upper(&seg) {
                cur.push(seg);
            } else if !cur.is_empty() {
                chains.push(core::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            chains.push(cur);
        }
        chains
    }
}

/// The boundary of a planar domain as a set of loops. Outer loops run CCW
/// and holes CW.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBoundary {
    pub loops: Vec<BoundaryLoop>,
    /// Set for members of the handle family; `None` for the plain
    /// validation domains.
    pub params: Option<DomainParams>,
}

impl DomainBoundary {
    pub fn loop_by_tag(&self, tag: LoopTag) -> Option<&BoundaryLoop> {
        self.loops.iter().find(|l| l.tag == tag)
    }

    /// Whether `p` lies inside the region bounded by the loops (total
    /// winding number 1).
    pub fn encloses(&self, p: Point) -> bool {
        self.loops.iter().map(|l| l.winding(p)).sum::<i32>() == 1
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.loops.iter().map(|l| l.distance(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn area(&self) -> f64 {
        self.loops.iter().map(|l| l.signed_area()).sum()
    }

    /// Axis-aligned bounding box `(min, max)`, from a dense sampling.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for l in &self.loops {
            for p in l.polyline(PI / 360.0) {
                lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        (lo, hi)
    }

    /// Sharp rectangle `(-a, a) x (-b, b)`.
    pub fn rectangle(a: f64, b: f64) -> Self {
        let c = [
            Point::new(a, 0.0),
            Point::new(a, b),
            Point::new(-a, b),
            Point::new(-a, -b),
            Point::new(a, -b),
        ];
        let curves = (0..5).map(|i| (Segment::line(c[i], c[(i + 1) % 5]), Origin::Generic)).collect();
        DomainBoundary { loops: alloc::vec![BoundaryLoop::from_curves(curves, LoopTag::Single)], params: None }
    }

    /// Rounded rectangle `(-a, a) x (-b, b)` with corner radius `rho`.
    pub fn rounded_rectangle(a: f64, b: f64, rho: f64) -> Self {
        let rr = RoundedRect::new(a, b, rho);
        let curves = rr.pieces().iter().map(|&s| (s, Origin::Rect)).collect();
        DomainBoundary { loops: alloc::vec![BoundaryLoop::from_curves(curves, LoopTag::Single)], params: None }
    }

    /// Disk of radius `radius` centred on the x-axis.
    pub fn disk(cx: f64, radius: f64) -> Self {
        let c = Segment::circle(Point::new(cx, 0.0), radius, 0.0, true);
        DomainBoundary {
            loops: alloc::vec![BoundaryLoop::from_curves(alloc::vec![(c, Origin::Generic)], LoopTag::Single)],
            params: None,
        }
    }

    /// Annulus `r_in < |p - (cx, 0)| < r_out`; the outer circle is tagged
    /// `Left` and the inner one `Right`.
    pub fn annulus(cx: f64, r_in: f64, r_out: f64) -> Self {
        let c = Point::new(cx, 0.0);
        let outer = Segment::circle(c, r_out, 0.0, true);
        let inner = Segment::circle(c, r_in, 0.0, false);
        DomainBoundary {
            loops: alloc::vec![
                BoundaryLoop::from_curves(alloc::vec![(outer, Origin::Generic)], LoopTag::Left),
                BoundaryLoop::from_curves(alloc::vec![(inner, Origin::Generic)], LoopTag::Right),
            ],
            params: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Prim {
    Rect,
    Outer,
    Inner,
    Fillet(usize),
}

/// Boundary of the handle domain for the given parameters, traced from the
/// implicit membership field and snapped onto the analytic primitives.
pub fn build_boundary(p: &DomainParams) -> Result<DomainBoundary, GeometryError> {
    let window = validate_params(p)?;
    let d = p.feature_size() / 4.0;
    let traced = trace_loops(p, d);
    let expected = if p.h > 0.0 { 2 } else { 1 };
    if traced.len() != expected {
        return Err(GeometryError::Topology { expected, found: traced.len() });
    }
    if !window.contains(p.t) {
        return Err(GeometryError::NotAdmissible { t: p.t, lo: window.t_lo, hi: window.t_hi });
    }
    let rr = RoundedRect::new(1.0, p.l, p.rho);
    if p.h == 0.0 {
        let curves = rr.pieces().iter().map(|&s| (s, Origin::Rect)).collect();
        return Ok(DomainBoundary {
            loops: alloc::vec![BoundaryLoop::from_curves(curves, LoopTag::Single)],
            params: Some(*p),
        });
    }

    let c = p.center();
    let ro = p.r + p.h;
    let fil: Vec<Segment> = match fillets(p) {
        Some(fs) => {
            let up: Vec<Segment> = fs.iter().map(|f| f.arc()).collect();
            let mut all = up.clone();
            all.extend(up.iter().map(|a| a.mirrored()));
            all
        }
        None => Vec::new(),
    };
    // analytic breakpoints, upper ones first and then their mirrors
    let mut breaks: Vec<Point> = match fillets(p) {
        Some(fs) => fs.iter().flat_map(|f| [f.on_edge, f.on_circle]).collect(),
        None => alloc::vec![Point::new(c.x - p.a_out(), p.l), Point::new(c.x - p.a_in(), p.l)],
    };
    let mirrored: Vec<Point> = breaks.iter().map(|b| b.mirror()).collect();
    breaks.extend(mirrored);

    let classify = |q: Point| -> Prim {
        let mut best = (rounded_rect_sdf(p.l, p.rho, q).abs(), Prim::Rect);
        let cand = [((q.dist(c) - ro).abs(), Prim::Outer), ((q.dist(c) - p.r).abs(), Prim::Inner)];
        for (dv, pr) in cand {
            if dv < best.0 {
                best = (dv, pr);
            }
        }
        for (k, a) in fil.iter().enumerate() {
            let dv = a.distance(q);
            if dv < best.0 {
                best = (dv, Prim::Fillet(k));
            }
        }
        best.1
    };

    let mut loops = Vec::new();
    for pts in &traced {
        let cls: Vec<Prim> = pts.iter().map(|&q| classify(q)).collect();
        let runs = runs_of(&cls);
        let curves = if runs.len() == 1 {
            match runs[0].0 {
                Prim::Rect => rr.pieces().iter().map(|&s| (s, Origin::Rect)).collect(),
                Prim::Outer => alloc::vec![(Segment::circle(c, ro, 0.0, true), Origin::Handle { width: p.h })],
                Prim::Inner => alloc::vec![(Segment::circle(c, p.r, 0.0, true), Origin::Handle { width: p.h })],
                Prim::Fillet(_) => return Err(GeometryError::Topology { expected, found: traced.len() }),
            }
        } else {
            snap_runs(p, &rr, &fil, &breaks, pts, &runs, d)?
        };
        loops.push(curves);
    }

    let w = Point::new(-1.0, 0.0);
    let e = Point::new(1.0, 0.0);
    let mut built: Vec<BoundaryLoop> =
        loops.into_iter().map(|cv| BoundaryLoop::from_curves(cv, LoopTag::Single)).collect();
    let nearest = |q: Point, ls: &[BoundaryLoop]| -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, l) in ls.iter().enumerate() {
            let dv = l.distance(q);
            if dv < best.0 {
                best = (dv, i);
            }
        }
        best.1
    };
    let li = nearest(w, &built);
    let ri = nearest(e, &built);
    if li == ri {
        return Err(GeometryError::Topology { expected, found: 1 });
    }
    built[li].tag = LoopTag::Left;
    built[ri].tag = LoopTag::Right;
    // the loop with the largest enclosed area is the outer one
    let outer = (0..built.len())
        .max_by(|&a, &b| built[a].signed_area().abs().partial_cmp(&built[b].signed_area().abs()).unwrap())
        .unwrap();
    for (i, l) in built.iter_mut().enumerate() {
        let want = if i == outer { Orientation::Ccw } else { Orientation::Cw };
        if l.orientation != want {
            l.reverse();
        }
    }
    built.sort_by_key(|l| l.tag);
    Ok(DomainBoundary { loops: built, params: Some(*p) })
}

/// Cyclic runs `(primitive, first index, last index)`, with one-point
/// excursions between runs of the same primitive absorbed.
fn runs_of(cls: &[Prim]) -> Vec<(Prim, usize, usize)> {
    let n = cls.len();
    let mut c = cls.to_vec();
    loop {
        let mut changed = false;
        for i in 0..n {
            let a = c[(i + n - 1) % n];
            let b = c[(i + 1) % n];
            if c[i] != a && a == b {
                c[i] = a;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let Some(start) = (0..n).find(|&i| c[i] != c[(i + n - 1) % n]) else {
        return alloc::vec![(c[0], 0, n - 1)];
    };
    let mut runs = Vec::new();
    let mut k = 0;
    while k < n {
        let i0 = (start + k) % n;
        let mut len = 1;
        while k + len < n && c[(start + k + len) % n] == c[i0] {
            len += 1;
        }
        runs.push((c[i0], i0, (i0 + len - 1) % n));
        k += len;
    }
    runs
}

fn snap_runs(
    p: &DomainParams,
    rr: &RoundedRect,
    fil: &[Segment],
    breaks: &[Point],
    pts: &[Point],
    runs: &[(Prim, usize, usize)],
    d: f64,
) -> Result<Vec<(Segment, Origin)>, GeometryError> {
    let n = pts.len();
    let m = runs.len();
    let topo = || GeometryError::Topology { expected: 2, found: 0 };
    // breakpoint between run i and run i+1
    let mut bp = Vec::with_capacity(m);
    for i in 0..m {
        let last = pts[runs[i].2];
        let first = pts[runs[(i + 1) % m].1];
        let loc = last.midpoint(first);
        let (dist, k) = breaks
            .iter()
            .enumerate()
            .map(|(k, b)| (b.dist(loc), k))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
        if dist > 3.0 * d {
            return Err(topo());
        }
        bp.push(breaks[k]);
    }
    let c = p.center();
    let mut out = Vec::new();
    for i in 0..m {
        let (prim, i0, i1) = runs[i];
        let b_in = bp[(i + m - 1) % m];
        let b_out = bp[i];
        let len = (i1 + n - i0) % n + 1;
        let mid = pts[(i0 + len / 2) % n];
        let ahead = |a: f64, mv: f64, b: f64, per: f64| (mv - a).rem_euclid(per) < (b - a).rem_euclid(per);
        match prim {
            Prim::Rect => {
                let s0 = rr.project(b_in);
                let s1 = rr.project(b_out);
                let ccw = ahead(s0, rr.project(mid), s1, rr.perimeter());
                out.extend(rr.pieces_between(s0, b_in, s1, b_out, ccw).into_iter().map(|s| (s, Origin::Rect)));
            }
            Prim::Outer | Prim::Inner => {
                let rad = if prim == Prim::Outer { p.r + p.h } else { p.r };
                let ccw = ahead((b_in - c).angle(), (mid - c).angle(), (b_out - c).angle(), TAU);
                out.push((Segment::arc(c, rad, b_in, b_out, ccw), Origin::Handle { width: p.h }));
            }
            Prim::Fillet(k) => {
                let Segment::Arc { center, radius, .. } = fil[k] else { return Err(topo()) };
                let ccw = ahead((b_in - center).angle(), (mid - center).angle(), (b_out - center).angle(), TAU);
                out.push((Segment::arc(center, radius, b_in, b_out, ccw), Origin::Junction));
            }
        }
    }
    Ok(out)
}

/// Closed polyline through the loop with vertices exactly on the analytic
/// curves. Vertices are placed uniformly by arclength on the upper chains
/// and mirrored, so the result is symmetric under `y -> -y`.
pub fn sample_loop(lp: &BoundaryLoop, target_edge: f64) -> Result<Vec<Point>, GeometryError> {
    if !(target_edge > 0.0) {
        return Err(GeometryError::Resolution { target_edge, limit: 0.0 });
    }
    for s in &lp.segments {
        if let Origin::Handle { width } = s.origin {
            if target_edge > width / 3.0 {
                return Err(GeometryError::Resolution { target_edge, limit: width / 3.0 });
            }
        }
    }
    let mut chains = lp.upper_chains();
    if chains.len() != 1 {
        // not a symmetric loop crossing the axis twice
        let mut v = sample_chain(&lp.segments, target_edge);
        v.pop();
        return Ok(v);
    }
    let up = sample_chain(&chains.pop().unwrap(), target_edge);
    let n = up.len();
    let mut out: Vec<Point> = up.clone();
    out.extend(up[1..n - 1].iter().rev().map(|q| q.mirror()));
    Ok(out)
}

/// Points along the chain at uniform arclength spacing close to `target`,
/// including both ends.
fn sample_chain(chain: &[BoundarySegment], target: f64) -> Vec<Point> {
    let lens: Vec<f64> = chain.iter().map(|s| s.curve.length()).collect();
    let total: f64 = lens.iter().sum();
    let n = ((total / target).round() as usize).max(1);
    let mut out = Vec::with_capacity(n + 1);
    out.push(chain[0].curve.start());
    let mut k = 0;
    let mut acc = 0.0;
    for i in 1..n {
        let s = total * i as f64 / n as f64;
        while k + 1 < chain.len() && acc + lens[k] < s {
            acc += lens[k];
            k += 1;
        }
        let u = if lens[k] > 0.0 { ((s - acc) / lens[k]).clamp(0.0, 1.0) } else { 0.0 };
        out.push(chain[k].curve.point_at(u));
    }
    out.push(chain[chain.len() - 1].curve.end());
    out
}
