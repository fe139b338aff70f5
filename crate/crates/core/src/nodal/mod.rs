//! Zero sets of piecewise-linear fields and their topology.
//!
//! Dirichlet vertices carry the value zero, so the raw zero set always
//! contains the whole boundary, and deep inside a thin handle the field
//! decays below any meaningful threshold. Such vertices take their sign
//! from the nearest vertices whose value is significant before the zero
//! set is traced. Chains that pass through them are marked unresolved and
//! never count as evidence of a closed nodal line.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{point_segment_distance, segments_intersect, LoopTag, Point};
use crate::mesh::{Location, Mesh};

/// Default zero threshold, as a fraction of `‖u‖_∞`.
pub const EPS_ZERO: f64 = 1e-9;

/// Default touch threshold in units of the local boundary edge length.
pub const TOUCH_FACTOR: f64 = 3.0;

/// Largest acceptable distance of a winding sum from an integer.
pub const WINDING_RESIDUAL: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NodalError {
    #[error("sample point ({x}, {y}) lies outside the mesh")]
    SampleOutsideDomain { x: f64, y: f64 },
    #[error("point lies on the curve")]
    PointOnCurve,
    #[error("touch classification needs two boundary loops, found {found}")]
    NotTwoLoops { found: usize },
    #[error("at least {min} samples are required")]
    TooFewSamples { min: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainKind {
    ClosedLoop,
    BoundaryArc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodalChain {
    pub points: Vec<Point>,
    /// Boundary loop touched at each point, if any.
    pub contact: Vec<Option<LoopTag>>,
    pub kind: ChainKind,
    /// Loops of the two end points of a boundary arc.
    pub end_tags: Option<[LoopTag; 2]>,
    pub impact_points: Vec<Point>,
    /// Every crossing lies on an edge whose values decide its sign, or on
    /// the Dirichlet boundary.
    pub resolved: bool,
}

impl NodalChain {
    pub fn is_closed(&self) -> bool {
        self.points.len() > 2 && self.points[0] == self.points[self.points.len() - 1]
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.dist(b)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodalSet {
    pub chains: Vec<NodalChain>,
    pub eps_zero: f64,
}

impl NodalSet {
    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.chains.iter().flat_map(|c| c.points.iter().copied())
    }
}

/// Signs used for tracing. A vertex is resolved when it is interior and
/// `|u| >= eps_zero ‖u‖_∞`; its value is kept. Every other vertex
/// (Dirichlet vertices included) gets the value zero and inherits its sign
/// breadth-first from the nearest resolved vertices, preferring the
/// strongest source and then the lowest index.
pub struct SignField {
    pub value: Vec<f64>,
    pub positive: Vec<bool>,
    pub resolved: Vec<bool>,
}

pub fn effective_signs(mesh: &Mesh, u: &[f64], eps_zero: f64) -> SignField {
    let n = mesh.n_vertices();
    let scale = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = eps_zero * scale;
    let mut value = vec![0.0; n];
    let mut positive = vec![true; n];
    let mut resolved = vec![false; n];
    // strength of the source a vertex took its sign from
    let mut strength = vec![-1.0f64; n];
    for v in 0..n {
        if !mesh.vertex_flags[v].is_boundary() && u[v] != 0.0 && u[v].abs() >= floor {
            value[v] = u[v];
            positive[v] = u[v] > 0.0;
            resolved[v] = true;
            strength[v] = u[v].abs();
        }
    }
    let adj = vertex_neighbors(mesh);
    let mut frontier: Vec<usize> = (0..n).filter(|&v| resolved[v]).collect();
    loop {
        let mut next: Vec<usize> = frontier
            .iter()
            .flat_map(|&v| adj[v].iter().copied())
            .filter(|&w| strength[w] < 0.0)
            .collect();
        next.sort_unstable();
        next.dedup();
        if next.is_empty() {
            break;
        }
        let picks: Vec<(usize, usize)> = next
            .iter()
            .map(|&w| {
                let src = adj[w]
                    .iter()
                    .copied()
                    .filter(|&s| strength[s] >= 0.0)
                    .fold(None, |b: Option<usize>, s| match b {
                        Some(b) if strength[b] >= strength[s] => Some(b),
                        _ => Some(s),
                    })
                    .expect("frontier neighbour has an assigned source");
                (w, src)
            })
            .collect();
        for &(w, src) in &picks {
            positive[w] = positive[src];
            strength[w] = strength[src];
        }
        frontier = next;
    }
    SignField { value, positive, resolved }
}

/// Neighbour lists in increasing index order.
fn vertex_neighbors(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); mesh.n_vertices()];
    for t in &mesh.triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    adj
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

struct Crossing {
    point: Point,
    contact: Option<LoopTag>,
    resolved: bool,
}

/// Trace the zero set of the piecewise-linear interpolant of `u`.
pub fn extract(mesh: &Mesh, u: &[f64], eps_zero: f64) -> NodalSet {
    let f = effective_signs(mesh, u, eps_zero);
    let (val, pos) = (&f.value, &f.positive);
    let adj = vertex_neighbors(mesh);
    // an unresolved interior vertex between resolved values of both signs
    let pinned = |v: usize| {
        let mut seen = [false; 2];
        for &w in &adj[v] {
            if f.resolved[w] {
                seen[pos[w] as usize] = true;
            }
        }
        seen[0] && seen[1]
    };
    let mut boundary_edge: BTreeMap<(usize, usize), LoopTag> = BTreeMap::new();
    for e in &mesh.boundary_edges {
        boundary_edge.insert(edge_key(e.v[0], e.v[1]), e.tag);
    }
    let mut crossings: BTreeMap<(usize, usize), Crossing> = BTreeMap::new();
    let mut links: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for tri in &mesh.triangles {
        let mut cut = Vec::with_capacity(2);
        for i in 0..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            if pos[a] == pos[b] {
                continue;
            }
            let k = edge_key(a, b);
            cut.push(k);
            crossings.entry(k).or_insert_with(|| {
                let (a, b) = k;
                let (fa, fb) = (val[a], val[b]);
                let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                let tag = |v: usize| mesh.vertex_flags[v].boundary;
                if let Some(&t) = boundary_edge.get(&k) {
                    Crossing { point: pa.midpoint(pb), contact: Some(t), resolved: true }
                } else if fa != 0.0 && fb != 0.0 {
                    Crossing { point: pa.lerp(pb, fa / (fa - fb)), contact: None, resolved: true }
                } else if fb != 0.0 {
                    Crossing { point: pa, contact: tag(a), resolved: tag(a).is_some() || pinned(a) }
                } else if fa != 0.0 {
                    Crossing { point: pb, contact: tag(b), resolved: tag(b).is_some() || pinned(b) }
                } else {
                    Crossing { point: pa.midpoint(pb), contact: None, resolved: false }
                }
            });
        }
        if cut.len() == 2 {
            links.entry(cut[0]).or_default().push(cut[1]);
            links.entry(cut[1]).or_default().push(cut[0]);
        }
    }

    let mut used: BTreeMap<(usize, usize), bool> = links.keys().map(|&k| (k, false)).collect();
    let mut chains = Vec::new();
    // open chains start at crossings with a single link
    let starts: Vec<(usize, usize)> = links.iter().filter(|(_, l)| l.len() == 1).map(|(&k, _)| k).collect();
    for s in starts {
        if used[&s] {
            continue;
        }
        let path = walk(s, &links, &mut used);
        chains.push(make_chain(&path, &crossings, false));
    }
    let rest: Vec<(usize, usize)> = used.iter().filter(|(_, &u)| !u).map(|(&k, _)| k).collect();
    for s in rest {
        if used[&s] {
            continue;
        }
        let mut path = walk(s, &links, &mut used);
        path.push(s);
        chains.push(make_chain(&path, &crossings, true));
    }
    NodalSet { chains, eps_zero }
}

fn walk(
    start: (usize, usize),
    links: &BTreeMap<(usize, usize), Vec<(usize, usize)>>,
    used: &mut BTreeMap<(usize, usize), bool>,
) -> Vec<(usize, usize)> {
    let mut path = vec![start];
    used.insert(start, true);
    let mut cur = start;
    loop {
        let next = links[&cur].iter().copied().find(|k| !used[k]);
        match next {
            Some(k) => {
                used.insert(k, true);
                path.push(k);
                cur = k;
            }
            None => return path,
        }
    }
}

fn make_chain(path: &[(usize, usize)], crossings: &BTreeMap<(usize, usize), Crossing>, closed: bool) -> NodalChain {
    let mut points: Vec<Point> = Vec::with_capacity(path.len());
    let mut contact: Vec<Option<LoopTag>> = Vec::with_capacity(path.len());
    let mut resolved = true;
    for k in path {
        let c = &crossings[k];
        resolved &= c.resolved;
        if points.last() == Some(&c.point) {
            let last = contact.len() - 1;
            if contact[last].is_none() {
                contact[last] = c.contact;
            }
            continue;
        }
        points.push(c.point);
        contact.push(c.contact);
    }
    let touches = contact.iter().any(|c| c.is_some());
    let (kind, end_tags, impact_points) = if closed && !touches && points.len() > 2 {
        (ChainKind::ClosedLoop, None, Vec::new())
    } else if !closed {
        let n = points.len();
        let tags = match (contact[0], contact[n - 1]) {
            (Some(a), Some(b)) => Some([a, b]),
            _ => None,
        };
        (ChainKind::BoundaryArc, tags, vec![points[0], points[n - 1]])
    } else {
        let hits: Vec<Point> = points.iter().zip(&contact).filter(|(_, c)| c.is_some()).map(|(p, _)| *p).collect();
        let tags = contact.iter().flatten().copied().collect::<Vec<_>>();
        (ChainKind::BoundaryArc, Some([tags[0], tags[tags.len() - 1]]), hits)
    };
    NodalChain { points, contact, kind, end_tags, impact_points, resolved }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TouchLabel {
    LeftOnly,
    RightOnly,
    Closed,
    Inconclusive,
}

impl TouchLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            TouchLabel::LeftOnly => "LeftOnly",
            TouchLabel::RightOnly => "RightOnly",
            TouchLabel::Closed => "Closed",
            TouchLabel::Inconclusive => "Inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<TouchLabel> {
        [TouchLabel::LeftOnly, TouchLabel::RightOnly, TouchLabel::Closed, TouchLabel::Inconclusive]
            .into_iter()
            .find(|l| l.as_str() == s)
    }
}

/// How close a chain must come to a loop to count as touching it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TouchThreshold {
    Fixed(f64),
    /// Multiple of the length of the boundary edge nearest to the chain.
    LocalEdges(f64),
}

impl Default for TouchThreshold {
    fn default() -> Self {
        TouchThreshold::LocalEdges(TOUCH_FACTOR)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TouchReport {
    pub label: TouchLabel,
    pub dist_left: f64,
    pub dist_right: f64,
    pub delta_left: f64,
    pub delta_right: f64,
}

/// Distance from the chains to the boundary edges with the given tag, and
/// the length of the edge that attains it.
fn distance_to_loop(nodal: &NodalSet, mesh: &Mesh, tag: LoopTag) -> (f64, f64) {
    let edges: Vec<(Point, Point)> = mesh
        .boundary_edges
        .iter()
        .filter(|e| e.tag == tag)
        .map(|e| (mesh.vertices[e.v[0]], mesh.vertices[e.v[1]]))
        .collect();
    let mut best = (f64::INFINITY, 0.0);
    for p in nodal.points() {
        for &(a, b) in &edges {
            let d = point_segment_distance(p, a, b);
            if d < best.0 {
                best = (d, a.dist(b));
            }
        }
    }
    best
}

/// Which boundary loops the nodal set reaches.
pub fn classify_touch(nodal: &NodalSet, mesh: &Mesh, threshold: TouchThreshold) -> Result<TouchReport, NodalError> {
    let mut tags: Vec<LoopTag> = mesh.boundary_edges.iter().map(|e| e.tag).collect();
    tags.sort();
    tags.dedup();
    if tags != [LoopTag::Left, LoopTag::Right] {
        return Err(NodalError::NotTwoLoops { found: tags.len() });
    }
    let (dl, el) = distance_to_loop(nodal, mesh, LoopTag::Left);
    let (dr, er) = distance_to_loop(nodal, mesh, LoopTag::Right);
    let (delta_left, delta_right) = match threshold {
        TouchThreshold::Fixed(d) => (d, d),
        TouchThreshold::LocalEdges(f) => (f * el, f * er),
    };
    let (tl, tr) = (dl <= delta_left, dr <= delta_right);
    let label = if nodal.is_empty() || nodal.chains.iter().any(|c| !c.resolved) {
        TouchLabel::Inconclusive
    } else {
        match (tl, tr) {
            (true, true) => TouchLabel::Inconclusive,
            (true, false) => TouchLabel::LeftOnly,
            (false, true) => TouchLabel::RightOnly,
            (false, false) => TouchLabel::Closed,
        }
    };
    Ok(TouchReport { label, dist_left: dl, dist_right: dr, delta_left, delta_right })
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Number of connected sign components of the interpolant over the open
/// domain.
pub fn count_nodal_domains(mesh: &Mesh, u: &[f64], eps_zero: f64) -> usize {
    let pos = effective_signs(mesh, u, eps_zero).positive;
    let n = mesh.n_vertices();
    let interior = |v: usize| !mesh.vertex_flags[v].is_boundary();
    let mut parent: Vec<usize> = (0..n).collect();
    for t in &mesh.triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            if interior(a) && interior(b) && pos[a] == pos[b] {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    (0..n).filter(|&v| interior(v) && find(&mut parent, v) == v).count()
}

/// Value of the interpolant at `p`, or `None` outside the mesh.
pub fn value_at(mesh: &Mesh, u: &[f64], p: Point, hint: usize) -> Option<(f64, usize)> {
    match mesh.locate_from(p, hint) {
        Location::Inside { triangle, bary } => {
            let t = mesh.triangles[triangle];
            Some((bary[0] * u[t[0]] + bary[1] * u[t[1]] + bary[2] * u[t[2]], triangle))
        }
        Location::Outside => None,
    }
}

/// Minimum number of samples along σ.
pub const MIN_SIGMA_SAMPLES: usize = 512;

/// Sign changes of `u` along the open segment `(a, b)`, with hysteresis
/// band `±eps_zero ‖u‖_∞`.
pub fn sign_changes_on_sigma(
    mesh: &Mesh,
    u: &[f64],
    a: Point,
    b: Point,
    samples: usize,
    eps_zero: f64,
) -> Result<usize, NodalError> {
    if samples < MIN_SIGMA_SAMPLES {
        return Err(NodalError::TooFewSamples { min: MIN_SIGMA_SAMPLES });
    }
    let eps = eps_zero * u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut state = 0i8;
    let mut changes = 0;
    let mut hint = 0;
    for i in 1..=samples {
        let p = a.lerp(b, i as f64 / (samples + 1) as f64);
        let (v, t) = value_at(mesh, u, p, hint).ok_or(NodalError::SampleOutsideDomain { x: p.x, y: p.y })?;
        hint = t;
        let s = if v > eps {
            1
        } else if v < -eps {
            -1
        } else {
            0
        };
        if s != 0 {
            if state != 0 && s != state {
                changes += 1;
            }
            state = s;
        }
    }
    Ok(changes)
}

/// Winding number of a closed polyline around `p`, with the distance of
/// the angle sum from the nearest integer.
pub fn winding_number(points: &[Point], p: Point) -> Result<(i32, f64), NodalError> {
    let mut total = 0.0;
    for w in points.windows(2) {
        if point_segment_distance(p, w[0], w[1]) <= 1e-9 {
            return Err(NodalError::PointOnCurve);
        }
        let (a, b) = (w[0] - p, w[1] - p);
        total += a.cross(b).atan2(a.dot(b));
    }
    let w = total / (2.0 * core::f64::consts::PI);
    let r = w.round();
    Ok((r as i32, (w - r).abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimpleReport {
    pub simple: bool,
    pub violation: Option<Point>,
}

/// Whether the chains are simple and pairwise disjoint, apart from
/// shared boundary contact points.
pub fn check_simple(nodal: &NodalSet) -> SimpleReport {
    // (chain, index in chain, a, b, contact at a, contact at b)
    let mut segs = Vec::new();
    for (c, ch) in nodal.chains.iter().enumerate() {
        for i in 0..ch.points.len().saturating_sub(1) {
            segs.push((c, i, ch.points[i], ch.points[i + 1], ch.contact[i].is_some(), ch.contact[i + 1].is_some()));
        }
    }
    if segs.is_empty() {
        return SimpleReport { simple: true, violation: None };
    }
    let (mut lo, mut hi) = (segs[0].2, segs[0].2);
    let mut total_len = 0.0;
    for s in &segs {
        for p in [s.2, s.3] {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        total_len += s.2.dist(s.3);
    }
    let cell = (2.0 * total_len / segs.len() as f64).max(1e-12);
    let nx = (((hi.x - lo.x) / cell) as usize + 1).min(4096);
    let ny = (((hi.y - lo.y) / cell) as usize + 1).min(4096);
    let cx = |x: f64| (((x - lo.x) / cell) as usize).min(nx - 1);
    let cy = |y: f64| (((y - lo.y) / cell) as usize).min(ny - 1);
    let mut grid: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (k, s) in segs.iter().enumerate() {
        for i in cx(s.2.x.min(s.3.x))..=cx(s.2.x.max(s.3.x)) {
            for j in cy(s.2.y.min(s.3.y))..=cy(s.2.y.max(s.3.y)) {
                grid.entry((i, j)).or_default().push(k);
            }
        }
    }
    for bucket in grid.values() {
        for x in 0..bucket.len() {
            for y in x + 1..bucket.len() {
                let (s, t) = (&segs[bucket[x]], &segs[bucket[y]]);
                if s.0 == t.0 {
                    let n = nodal.chains[s.0].points.len() - 1;
                    let (i, j) = (s.1.min(t.1), s.1.max(t.1));
                    if j == i + 1 || (nodal.chains[s.0].is_closed() && i == 0 && j == n - 1) {
                        continue;
                    }
                }
                if !segments_intersect(s.2, s.3, t.2, t.3) {
                    continue;
                }
                let shared_contact = [(s.2, s.4), (s.3, s.5)]
                    .iter()
                    .any(|&(p, c)| c && ((p == t.2 && t.4) || (p == t.3 && t.5)));
                if shared_contact {
                    continue;
                }
                let violation = crate::geometry::line_intersection(s.2, s.3, t.2, t.3).unwrap_or(s.2);
                return SimpleReport { simple: false, violation: Some(violation) };
            }
        }
    }
    SimpleReport { simple: true, violation: None }
}

/// Largest distance from a chain vertex to the nearest mirrored chain
/// vertex.
pub fn mirror_asymmetry(nodal: &NodalSet) -> f64 {
    let mut pts: Vec<Point> = nodal.points().collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut worst: f64 = 0.0;
    for p in nodal.points() {
        let q = p.mirror();
        // binary search on x, then scan the neighbourhood
        let k = pts.partition_point(|r| r.x < q.x - 1e-6);
        let mut best = f64::INFINITY;
        for r in &pts[k..] {
            if r.x > q.x + 1e-6 {
                break;
            }
            best = best.min(r.dist(q));
        }
        worst = worst.max(best);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainBoundary;
    use crate::mesh::{generate, SizingSpec};

    #[test]
    fn winding_of_square() {
        let sq = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(0.0, 0.0),
        ];
        assert_eq!(winding_number(&sq, Point::new(0.5, 0.5)).unwrap().0, 1);
        assert_eq!(winding_number(&sq, Point::new(5.0, 5.0)).unwrap().0, 0);
        assert_eq!(winding_number(&sq, Point::new(0.5, 0.0)), Err(NodalError::PointOnCurve));
    }

    #[test]
    fn crossing_chains_are_not_simple() {
        let chain = |a: Point, b: Point| NodalChain {
            points: vec![a, b],
            contact: vec![None, None],
            kind: ChainKind::BoundaryArc,
            end_tags: None,
            impact_points: vec![a, b],
            resolved: true,
        };
        let one = NodalSet { chains: vec![chain(Point::new(0.0, 0.0), Point::new(1.0, 1.0))], eps_zero: 0.0 };
        assert!(check_simple(&one).simple);
        let two = NodalSet {
            chains: vec![
                chain(Point::new(0.0, 0.0), Point::new(1.0, 1.0)),
                chain(Point::new(0.0, 1.0), Point::new(1.0, 0.0)),
            ],
            eps_zero: 0.0,
        };
        let r = check_simple(&two);
        assert!(!r.simple);
        let v = r.violation.unwrap();
        assert!((v.x - 0.5).abs() < 1e-12 && (v.y - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_sign_has_no_zero_set() {
        let m = generate(&DomainBoundary::disk(0.0, 1.0), &SizingSpec { base_edge: 0.3, ..SizingSpec::default() })
            .unwrap();
        let u: Vec<f64> = m.vertices.iter().map(|p| 1.0 - p.norm2()).collect();
        assert!(extract(&m, &u, EPS_ZERO).is_empty());
        assert_eq!(count_nodal_domains(&m, &u, EPS_ZERO), 1);
    }
}
