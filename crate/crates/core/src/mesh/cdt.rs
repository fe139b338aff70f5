//! Incremental constrained Delaunay triangulation with Ruppert refinement.
//!
//! Triangles are stored with CCW vertex triples `tv[t]` and neighbour
//! triples `tn[t]`, where `tn[t][i]` lies across the edge opposite
//! `tv[t][i]`. Vertices 0..3 form a large enclosing triangle.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{orient, segments_intersect, LoopTag, Point, Segment};

use super::MeshError;

pub(crate) const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Unknown,
    Inside,
    Outside,
}

/// An input curve of the planar straight-line-and-arc graph. The domain
/// lies to the left of the curve's direction.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Piece {
    pub curve: Segment,
    /// Boundary loop the piece belongs to; `None` for the internal x-axis
    /// constraint.
    pub tag: Option<LoopTag>,
}

pub(crate) struct Cdt<'a> {
    pub pts: Vec<Point>,
    pub tv: Vec<[usize; 3]>,
    pub tn: Vec<[usize; 3]>,
    pub alive: Vec<bool>,
    pub side: Vec<Side>,
    free: Vec<usize>,
    vt: Vec<usize>,
    stamp: Vec<u32>,
    epoch: u32,
    /// Subsegments keyed by sorted endpoints; value is (start vertex in
    /// piece direction, piece index).
    pub segs: BTreeMap<(usize, usize), (usize, usize)>,
    pub pieces: &'a [Piece],
    constrained: bool,
    marked: bool,
    hint: usize,
    rng: u64,
}

#[inline]
fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn in_circle(a: Point, b: Point, c: Point, d: Point) -> bool {
    robust::incircle(a.coord(), b.coord(), c.coord(), d.coord()) > 0.0
}

pub(crate) fn circumcenter(a: Point, b: Point, c: Point) -> Point {
    let b = b - a;
    let c = c - a;
    let d = 2.0 * b.cross(c);
    let b2 = b.norm2();
    let c2 = c.norm2();
    a + Point::new((c.y * b2 - b.y * c2) / d, (b.x * c2 - c.x * b2) / d)
}

enum Walk {
    Found(usize),
    Blocked((usize, usize)),
}

impl<'a> Cdt<'a> {
    pub fn new(lo: Point, hi: Point, pieces: &'a [Piece]) -> Self {
        let m = lo.midpoint(hi);
        let d = (hi - lo).norm().max(1.0);
        let pts = vec![
            Point::new(m.x - 40.0 * d, m.y - 30.0 * d),
            Point::new(m.x + 40.0 * d, m.y - 30.0 * d),
            Point::new(m.x, m.y + 40.0 * d),
        ];
        Cdt {
            pts,
            tv: vec![[0, 1, 2]],
            tn: vec![[NONE; 3]],
            alive: vec![true],
            side: vec![Side::Unknown],
            free: Vec::new(),
            vt: vec![0, 0, 0],
            stamp: vec![0],
            epoch: 0,
            segs: BTreeMap::new(),
            pieces,
            constrained: false,
            marked: false,
            hint: 0,
            rng: 0x9E37_79B9_7F4A_7C15,
        }
    }

    fn next_rand(&mut self) -> usize {
        // xorshift; only used to break cycles in point location
        let mut x = self.rng;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.rng = x;
        (x >> 33) as usize
    }

    fn contains_point(&self, t: usize, p: Point) -> bool {
        let [a, b, c] = self.tv[t];
        let (a, b, c) = (self.pts[a], self.pts[b], self.pts[c]);
        orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
    }

    /// Triangle containing `p` (on its closure).
    fn locate(&mut self, p: Point, start: usize) -> usize {
        let mut t = if start < self.alive.len() && self.alive[start] { start } else { self.hint };
        if !self.alive[t] {
            t = self.alive.iter().position(|&a| a).unwrap();
        }
        let limit = 4 * self.tv.len() + 64;
        for _ in 0..limit {
            let r = self.next_rand() % 3;
            let mut moved = false;
            for k in 0..3 {
                let i = (k + r) % 3;
                let u = self.tv[t][(i + 1) % 3];
                let w = self.tv[t][(i + 2) % 3];
                if orient(self.pts[u], self.pts[w], p) < 0.0 && self.tn[t][i] != NONE {
                    t = self.tn[t][i];
                    moved = true;
                    break;
                }
            }
            if !moved {
                return t;
            }
        }
        (0..self.tv.len()).find(|&t| self.alive[t] && self.contains_point(t, p)).unwrap_or(t)
    }

    fn alloc_tri(&mut self, v: [usize; 3], side: Side) -> usize {
        if let Some(t) = self.free.pop() {
            self.tv[t] = v;
            self.tn[t] = [NONE; 3];
            self.alive[t] = true;
            self.side[t] = side;
            t
        } else {
            self.tv.push(v);
            self.tn.push([NONE; 3]);
            self.alive.push(true);
            self.side.push(side);
            self.stamp.push(0);
            self.tv.len() - 1
        }
    }

    /// Insert `p`, starting the search at `start`. Returns the new vertex,
    /// the new triangles, and any subsegments that were removed because
    /// they were interior to the cavity. The cavity never crosses a
    /// subsegment once the triangulation is constrained, except `allow`.
    fn insert(
        &mut self,
        p: Point,
        start: usize,
        allow: Option<(usize, usize)>,
    ) -> Result<(usize, Vec<usize>, Vec<(usize, usize)>), MeshError> {
        let t0 = self.locate(p, start);
        for &v in &self.tv[t0] {
            if self.pts[v] == p {
                return Err(MeshError::Quality(alloc::format!("duplicate vertex at ({}, {})", p.x, p.y)));
            }
        }
        self.epoch = self.epoch.wrapping_add(1);
        let ep = self.epoch;
        let mut cav = vec![t0];
        self.stamp[t0] = ep;
        let mut k = 0;
        while k < cav.len() {
            let t = cav[k];
            k += 1;
            for i in 0..3 {
                let nb = self.tn[t][i];
                if nb == NONE || self.stamp[nb] == ep {
                    continue;
                }
                let e = key(self.tv[t][(i + 1) % 3], self.tv[t][(i + 2) % 3]);
                if self.constrained && self.segs.contains_key(&e) && Some(e) != allow {
                    continue;
                }
                let [a, b, c] = self.tv[nb];
                if in_circle(self.pts[a], self.pts[b], self.pts[c], p) {
                    self.stamp[nb] = ep;
                    cav.push(nb);
                }
            }
        }
        // boundary edges (u, w, outer neighbour, owner) and removed segments
        let mut ring: Vec<(usize, usize, usize, usize)> = Vec::new();
        let mut lost = Vec::new();
        for &t in &cav {
            for i in 0..3 {
                let nb = self.tn[t][i];
                let u = self.tv[t][(i + 1) % 3];
                let w = self.tv[t][(i + 2) % 3];
                if nb == NONE || self.stamp[nb] != ep {
                    ring.push((u, w, nb, t));
                } else if u < w && self.segs.contains_key(&(u, w)) {
                    lost.push((u, w));
                }
            }
        }
        let pv = self.pts.len();
        self.pts.push(p);
        self.vt.push(NONE);
        let owners_side: Vec<Side> = ring.iter().map(|r| self.side[r.3]).collect();
        for &t in &cav {
            self.alive[t] = false;
        }
        // free in reverse so that reuse order is deterministic
        for &t in cav.iter().rev() {
            self.free.push(t);
        }
        let mut created = Vec::with_capacity(ring.len());
        for (idx, &(u, w, nb, _)) in ring.iter().enumerate() {
            let side = if self.marked { self.side_of([u, w, pv], owners_side[idx]) } else { Side::Unknown };
            let t = self.alloc_tri([u, w, pv], side);
            self.tn[t][2] = nb;
            if nb != NONE {
                for j in 0..3 {
                    if self.tv[nb][(j + 1) % 3] == w && self.tv[nb][(j + 2) % 3] == u {
                        self.tn[nb][j] = t;
                    }
                }
            }
            created.push(t);
        }
        for (idx, &t) in created.iter().enumerate() {
            let (u, w, _, _) = ring[idx];
            // across (w, pv): the new triangle starting at w
            let a = ring.iter().position(|r| r.0 == w).expect("cavity boundary is a closed cycle");
            self.tn[t][0] = created[a];
            // across (pv, u): the new triangle ending at u
            let b = ring.iter().position(|r| r.1 == u).expect("cavity boundary is a closed cycle");
            self.tn[t][1] = created[b];
            self.vt[u] = t;
            self.vt[w] = t;
            self.vt[pv] = t;
        }
        self.hint = created[0];
        Ok((pv, created, lost))
    }

    /// Side of a new triangle: decided by any subsegment among its edges,
    /// otherwise inherited.
    fn side_of(&self, v: [usize; 3], inherited: Side) -> Side {
        for i in 0..3 {
            let (x, y) = (v[i], v[(i + 1) % 3]);
            if let Some(&(s0, _)) = self.segs.get(&key(x, y)) {
                return if s0 == x { Side::Inside } else { Side::Outside };
            }
        }
        inherited
    }

    /// Triangle having `a` and `b` as vertices, with the index of the third
    /// vertex.
    fn find_edge(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        let start = self.vt[a];
        if start == NONE {
            return None;
        }
        let mut t = start;
        for _ in 0..1024 {
            let i = self.tv[t].iter().position(|&v| v == a)?;
            if self.tv[t][(i + 1) % 3] == b {
                return Some((t, (i + 2) % 3));
            }
            if self.tv[t][(i + 2) % 3] == b {
                return Some((t, (i + 1) % 3));
            }
            t = self.tn[t][(i + 1) % 3];
            if t == NONE || t == start {
                return None;
            }
        }
        None
    }

    fn encroaches(&self, a: usize, b: usize, v: usize) -> bool {
        if v < 3 {
            return false;
        }
        let p = self.pts[v];
        (self.pts[a] - p).dot(self.pts[b] - p) < 0.0
    }

    fn encroached(&self, a: usize, b: usize) -> bool {
        match self.find_edge(a, b) {
            None => true,
            Some((t, i)) => {
                if self.encroaches(a, b, self.tv[t][i]) {
                    return true;
                }
                let nb = self.tn[t][i];
                if nb == NONE {
                    return false;
                }
                let apex = self.tv[nb].iter().copied().find(|&v| v != a && v != b).unwrap();
                self.encroaches(a, b, apex)
            }
        }
    }

    /// Structural self-check of the triangulation.
    pub fn validate(&self) -> Result<(), alloc::string::String> {
        for t in 0..self.tv.len() {
            if !self.alive[t] { continue; }
            let [a, b, c] = self.tv[t];
            if orient(self.pts[a], self.pts[b], self.pts[c]) <= 0.0 {
                return Err(alloc::format!("tri {t} not ccw"));
            }
            for i in 0..3 {
                let nb = self.tn[t][i];
                if nb == NONE { continue; }
                if !self.alive[nb] { return Err(alloc::format!("tri {t} has dead nb {nb}")); }
                let u = self.tv[t][(i + 1) % 3];
                let w = self.tv[t][(i + 2) % 3];
                let ok = (0..3).any(|j| self.tn[nb][j] == t && self.tv[nb][(j + 1) % 3] == w && self.tv[nb][(j + 2) % 3] == u);
                if !ok { return Err(alloc::format!("tri {t} nb {nb} not reciprocal")); }
            }
        }
        for v in 3..self.pts.len() {
            let t = self.vt[v];
            if t == NONE || !self.alive[t] || !self.tv[t].contains(&v) {
                return Err(alloc::format!("vt of {v} stale"));
            }
        }
        Ok(())
    }

    pub fn add_segment(&mut self, a: usize, b: usize, piece: usize) {
        self.segs.insert(key(a, b), (a, piece));
    }

    pub fn insert_vertex(&mut self, p: Point) -> Result<usize, MeshError> {
        let h = self.hint;
        let (v, _, _) = self.insert(p, h, None)?;
        Ok(v)
    }

    fn split_segment(
        &mut self,
        a: usize,
        b: usize,
        segq: &mut VecDeque<(usize, usize)>,
        triq: &mut VecDeque<(usize, [usize; 3])>,
    ) -> Result<(), MeshError> {
        let k = key(a, b);
        let Some(&(s0, piece)) = self.segs.get(&k) else { return Ok(()) };
        let s1 = if s0 == a { b } else { a };
        let curve = self.pieces[piece].curve;
        let m = curve.midpoint_between(self.pts[s0], self.pts[s1]);
        let pv = self.pts.len();
        self.segs.remove(&k);
        self.segs.insert(key(s0, pv), (s0, piece));
        self.segs.insert(key(pv, s1), (pv, piece));
        let start = self.find_edge(a, b).map(|x| x.0).unwrap_or(self.hint);
        let (v, created, lost) = self.insert(m, start, Some(k))?;
        debug_assert_eq!(v, pv);
        segq.push_back((s0, pv));
        segq.push_back((pv, s1));
        self.after_insert(v, &created, &lost, segq, triq);
        Ok(())
    }

    fn after_insert(
        &mut self,
        v: usize,
        created: &[usize],
        lost: &[(usize, usize)],
        segq: &mut VecDeque<(usize, usize)>,
        triq: &mut VecDeque<(usize, [usize; 3])>,
    ) {
        for &e in lost {
            segq.push_back(e);
        }
        for &t in created {
            let [u, w, _] = self.tv[t];
            if self.segs.contains_key(&key(u, w)) && self.encroaches(u, w, v) {
                segq.push_back((u, w));
            }
            if self.marked && self.side[t] == Side::Inside {
                triq.push_back((t, self.tv[t]));
            }
        }
    }

    /// Split encroached or missing subsegments until every subsegment is an
    /// edge with an empty diametral circle.
    pub fn recover_segments(&mut self, budget: usize) -> Result<(), MeshError> {
        let mut segq: VecDeque<(usize, usize)> = self.segs.keys().copied().collect();
        let mut triq = VecDeque::new();
        while let Some((a, b)) = segq.pop_front() {
            if self.pts.len() > budget {
                return Err(MeshError::Quality(alloc::format!("vertex budget {budget} exhausted")));
            }
            if self.segs.contains_key(&key(a, b)) && self.encroached(a, b) {
                self.split_segment(a, b, &mut segq, &mut triq)?;
            }
        }
        Ok(())
    }

    /// Mark triangles inside the domain from the orientation of the
    /// subsegments, and switch to constrained insertion.
    pub fn mark_sides(&mut self) -> Result<(), MeshError> {
        let mut stack = Vec::new();
        let keys: Vec<(usize, usize)> = self.segs.keys().copied().collect();
        for k in keys {
            let (s0, _) = self.segs[&k];
            let s1 = if s0 == k.0 { k.1 } else { k.0 };
            let (t, i) = self
                .find_edge(s0, s1)
                .ok_or_else(|| MeshError::Quality(alloc::string::String::from("constraint edge missing")))?;
            let nb = self.tn[t][i];
            let left_is_t = self.tv[t][(i + 1) % 3] == s0;
            for (tri, inside) in [(t, left_is_t), (nb, !left_is_t)] {
                if tri == NONE {
                    continue;
                }
                let want = if inside { Side::Inside } else { Side::Outside };
                if self.side[tri] == Side::Unknown {
                    self.side[tri] = want;
                    stack.push(tri);
                } else if self.side[tri] != want {
                    return Err(MeshError::Quality(alloc::format!(
                        "inconsistent constraint orientation at piece {} ({:?} -> {:?}) tri {:?}",
                        self.segs[&k].1, self.pts[s0], self.pts[s1], self.tv[tri].map(|v| self.pts[v])
                    )));
                }
            }
        }
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                let nb = self.tn[t][i];
                if nb == NONE || self.side[nb] != Side::Unknown {
                    continue;
                }
                let e = key(self.tv[t][(i + 1) % 3], self.tv[t][(i + 2) % 3]);
                if self.segs.contains_key(&e) {
                    continue;
                }
                self.side[nb] = self.side[t];
                stack.push(nb);
            }
        }
        for t in 0..self.tv.len() {
            if self.alive[t] && self.side[t] == Side::Unknown {
                self.side[t] = Side::Outside;
            }
        }
        self.marked = true;
        self.constrained = true;
        Ok(())
    }

    fn is_bad(&self, t: usize, cos_min: f64, size: &dyn Fn(Point) -> f64) -> bool {
        let [a, b, c] = self.tv[t];
        let (pa, pb, pc) = (self.pts[a], self.pts[b], self.pts[c]);
        let la = (pb - pc).norm2();
        let lb = (pc - pa).norm2();
        let lc = (pa - pb).norm2();
        let (s, m1, m2) = if la <= lb && la <= lc {
            (la, lb, lc)
        } else if lb <= lc {
            (lb, la, lc)
        } else {
            (lc, la, lb)
        };
        let cos = (m1 + m2 - s) / (2.0 * (m1 * m2).sqrt());
        if cos > cos_min {
            return true;
        }
        let longest = la.max(lb).max(lc).sqrt();
        let g = Point::new((pa.x + pb.x + pc.x) / 3.0, (pa.y + pb.y + pc.y) / 3.0);
        longest > size(g)
    }

    /// Walk from triangle `t` towards `p` along the segment from its
    /// centroid; stop at the triangle containing `p` or at the first
    /// subsegment crossed.
    fn walk_to(&mut self, t: usize, p: Point) -> Walk {
        let [a, b, c] = self.tv[t];
        let g = Point::new(
            (self.pts[a].x + self.pts[b].x + self.pts[c].x) / 3.0,
            (self.pts[a].y + self.pts[b].y + self.pts[c].y) / 3.0,
        );
        let mut t = t;
        for _ in 0..(self.tv.len() + 16) {
            if self.contains_point(t, p) {
                return Walk::Found(t);
            }
            let mut next = None;
            for i in 0..3 {
                let u = self.tv[t][(i + 1) % 3];
                let w = self.tv[t][(i + 2) % 3];
                if orient(self.pts[u], self.pts[w], p) < 0.0 && segments_intersect(g, p, self.pts[u], self.pts[w]) {
                    next = Some((i, u, w));
                    break;
                }
            }
            let Some((i, u, w)) = next else {
                let h = self.locate(p, t);
                return Walk::Found(h);
            };
            if self.segs.contains_key(&key(u, w)) {
                return Walk::Blocked(key(u, w));
            }
            if self.tn[t][i] == NONE {
                return Walk::Found(t);
            }
            t = self.tn[t][i];
        }
        let h = self.locate(p, t);
        Walk::Found(h)
    }

    /// Ruppert refinement of the inside triangles until every one has
    /// minimum angle above `min_angle` and longest edge below `size`.
    pub fn refine(&mut self, min_angle: f64, size: &dyn Fn(Point) -> f64, budget: usize) -> Result<(), MeshError> {
        let cos_min = min_angle.cos();
        let mut segq: VecDeque<(usize, usize)> = VecDeque::new();
        let mut triq: VecDeque<(usize, [usize; 3])> = (0..self.tv.len())
            .filter(|&t| self.alive[t] && self.side[t] == Side::Inside)
            .map(|t| (t, self.tv[t]))
            .collect();
        loop {
            if self.pts.len() > budget {
                return Err(MeshError::Quality(alloc::format!(
                    "vertex budget {budget} exhausted before the angle bound was met"
                )));
            }
            if let Some((a, b)) = segq.pop_front() {
                if self.segs.contains_key(&key(a, b)) && self.encroached(a, b) {
                    self.split_segment(a, b, &mut segq, &mut triq)?;
                }
                continue;
            }
            let Some((t, verts)) = triq.pop_front() else { break };
            if !self.alive[t] || self.tv[t] != verts || self.side[t] != Side::Inside {
                continue;
            }
            if !self.is_bad(t, cos_min, size) {
                continue;
            }
            let [a, b, c] = verts;
            let cc = circumcenter(self.pts[a], self.pts[b], self.pts[c]);
            match self.walk_to(t, cc) {
                Walk::Blocked((u, w)) => {
                    self.split_segment(u, w, &mut segq, &mut triq)?;
                    triq.push_back((t, verts));
                }
                Walk::Found(host) => {
                    if self.side[host] != Side::Inside {
                        // circumcentre outside the domain without crossing a
                        // constraint: only possible through round-off at a
                        // boundary edge; split the nearest subsegment of t
                        let e = (0..3)
                            .map(|i| key(verts[i], verts[(i + 1) % 3]))
                            .find(|e| self.segs.contains_key(e));
                        match e {
                            Some((u, w)) => {
                                self.split_segment(u, w, &mut segq, &mut triq)?;
                                triq.push_back((t, verts));
                            }
                            None => {
                                return Err(MeshError::Quality(alloc::string::String::from(
                                    "circumcentre escaped the domain",
                                )))
                            }
                        }
                        continue;
                    }
                    let enc = self.cavity_encroachments(host, cc);
                    if !enc.is_empty() {
                        for (u, w) in enc {
                            self.split_segment(u, w, &mut segq, &mut triq)?;
                        }
                        triq.push_back((t, verts));
                        continue;
                    }
                    let (v, created, lost) = self.insert(cc, host, None)?;
                    self.after_insert(v, &created, &lost, &mut segq, &mut triq);
                }
            }
        }
        Ok(())
    }

    /// Subsegments on the boundary of the constrained cavity of `p` whose
    /// diametral circles contain `p`.
    fn cavity_encroachments(&mut self, t0: usize, p: Point) -> Vec<(usize, usize)> {
        self.epoch = self.epoch.wrapping_add(1);
        let ep = self.epoch;
        let mut cav = vec![t0];
        self.stamp[t0] = ep;
        let mut out = Vec::new();
        let mut k = 0;
        while k < cav.len() {
            let t = cav[k];
            k += 1;
            for i in 0..3 {
                let u = self.tv[t][(i + 1) % 3];
                let w = self.tv[t][(i + 2) % 3];
                let e = key(u, w);
                if self.segs.contains_key(&e) {
                    let (pu, pw) = (self.pts[u], self.pts[w]);
                    if (pu - p).dot(pw - p) < 0.0 && !out.contains(&e) {
                        out.push(e);
                    }
                    continue;
                }
                let nb = self.tn[t][i];
                if nb == NONE || self.stamp[nb] == ep {
                    continue;
                }
                let [a, b, c] = self.tv[nb];
                if in_circle(self.pts[a], self.pts[b], self.pts[c], p) {
                    self.stamp[nb] = ep;
                    cav.push(nb);
                }
            }
        }
        out
    }
}
