//! Arclength parametrization of the rounded rectangle boundary.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;


use super::curve::Segment;
use super::point::Point;

/// Boundary of `(-a,a) x (-b,b)` with corner radius `rho`, traversed CCW
/// starting at `(a, 0)`.
#[derive(Clone, Debug)]
pub struct RoundedRect {
    pieces: Vec<Segment>,
    cum: Vec<f64>,
    perimeter: f64,
}

impl RoundedRect {
    pub fn new(a: f64, b: f64, rho: f64) -> Self {
        let (ia, ib) = (a - rho, b - rho);
        let e = Point::new(a, 0.0);
        let joints = [
            Point::new(a, ib),
            Point::new(ia, b),
            Point::new(-ia, b),
            Point::new(-a, ib),
            Point::new(-a, -ib),
            Point::new(-ia, -b),
            Point::new(ia, -b),
            Point::new(a, -ib),
        ];
        let centers = [
            Point::new(ia, ib),
            Point::new(-ia, ib),
            Point::new(-ia, -ib),
            Point::new(ia, -ib),
        ];
        let mut pieces = Vec::with_capacity(9);
        pieces.push(Segment::line(e, joints[0]));
        for k in 0..4 {
            let s = joints[2 * k];
            let t = joints[2 * k + 1];
            if rho > 0.0 {
                pieces.push(Segment::Arc {
                    center: centers[k],
                    radius: rho,
                    start: s,
                    end: t,
                    theta0: k as f64 * FRAC_PI_2,
                    sweep: FRAC_PI_2,
                });
            }
            let next = if k == 3 { e } else { joints[2 * k + 2] };
            pieces.push(Segment::line(t, next));
        }
        let mut cum = Vec::with_capacity(pieces.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for p in &pieces {
            acc += p.length();
            cum.push(acc);
        }
        RoundedRect { pieces, cum, perimeter: acc }
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn pieces(&self) -> &[Segment] {
        &self.pieces
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let s = s.rem_euclid(self.perimeter);
        let k = match self.cum.iter().position(|&c| c > s) {
            Some(i) => i - 1,
            None => self.pieces.len() - 1,
        };
        let len = self.cum[k + 1] - self.cum[k];
        (k, if len > 0.0 { (s - self.cum[k]) / len } else { 0.0 })
    }

    pub fn point_at(&self, s: f64) -> Point {
        let (k, u) = self.locate(s);
        self.pieces[k].point_at(u)
    }

    /// Arclength parameter of the boundary point closest to `p`.
    pub fn project(&self, p: Point) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for (k, piece) in self.pieces.iter().enumerate() {
            let u = piece.project(p);
            let d = p.dist(piece.point_at(u));
            if d < best.0 {
                best = (d, self.cum[k] + u * (self.cum[k + 1] - self.cum[k]));
            }
        }
        best.1
    }

    /// Analytic pieces from the boundary point `p0` (parameter `s0`) to `p1`
    /// (parameter `s1`), going CCW when `ccw` is set. The returned chain
    /// starts at `p0` and ends at `p1` exactly. Coincident parameters yield
    /// the whole loop.
    pub fn pieces_between(&self, s0: f64, p0: Point, s1: f64, p1: Point, ccw: bool) -> Vec<Segment> {
        let per = self.perimeter;
        let (a, b) = if ccw { (s0, s1) } else { (s1, s0) };
        let a = a.rem_euclid(per);
        let mut span = (b - a).rem_euclid(per);
        if span == 0.0 {
            span = per;
        }
        let end = a + span;
        let mut out = Vec::new();
        // walk pieces over two periods to cover wrap-around
        for rep in 0..2 {
            for (k, piece) in self.pieces.iter().enumerate() {
                let c0 = self.cum[k] + rep as f64 * per;
                let c1 = self.cum[k + 1] + rep as f64 * per;
                let lo = c0.max(a);
                let hi = c1.min(end);
                if hi - lo <= 0.0 || c1 - c0 <= 0.0 {
                    continue;
                }
                let u0 = (lo - c0) / (c1 - c0);
                let u1 = (hi - c0) / (c1 - c0);
                let q0 = if lo == a { if ccw { p0 } else { p1 } } else { piece.point_at(u0) };
                let q1 = if hi == end { if ccw { p1 } else { p0 } } else { piece.point_at(u1) };
                out.push(piece.sub(u0, u1, q0, q1));
            }
        }
        if !ccw {
            out.reverse();
            for seg in out.iter_mut() {
                *seg = seg.reversed();
            }
        }
        out
    }
}
