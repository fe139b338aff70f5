use core::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::point::{point_segment_distance, Point};

/// One analytic piece of a boundary loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    Line {
        a: Point,
        b: Point,
    },
    /// Circular arc from `start` to `end`. The arc is traversed from angle
    /// `theta0` through the signed angle `sweep` (positive is CCW). The
    /// endpoints are stored explicitly so that consecutive pieces of a loop
    /// can share them bitwise.
    Arc {
        center: Point,
        radius: f64,
        start: Point,
        end: Point,
        theta0: f64,
        sweep: f64,
    },
}

/// Wrap an angle into `(-PI, PI]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

impl Segment {
    pub fn line(a: Point, b: Point) -> Self {
        Segment::Line { a, b }
    }

    /// Arc of the circle `(center, radius)` from `start` to `end`, running
    /// counter-clockwise when `ccw` is set. Coincident endpoints give the
    /// full circle.
    pub fn arc(center: Point, radius: f64, start: Point, end: Point, ccw: bool) -> Self {
        let theta0 = (start - center).angle();
        let theta1 = (end - center).angle();
        let mut sweep = if ccw {
            (theta1 - theta0).rem_euclid(TAU)
        } else {
            -(theta0 - theta1).rem_euclid(TAU)
        };
        if sweep == 0.0 {
            sweep = if ccw { TAU } else { -TAU };
        }
        Segment::Arc { center, radius, start, end, theta0, sweep }
    }

    /// Full circle starting and ending at angle `theta0`.
    pub fn circle(center: Point, radius: f64, theta0: f64, ccw: bool) -> Self {
        let p = center + Point::new(theta0.cos(), theta0.sin()) * radius;
        Segment::Arc {
            center,
            radius,
            start: p,
            end: p,
            theta0,
            sweep: if ccw { TAU } else { -TAU },
        }
    }

    pub fn start(&self) -> Point {
        match *self {
            Segment::Line { a, .. } => a,
            Segment::Arc { start, .. } => start,
        }
    }

    pub fn end(&self) -> Point {
        match *self {
            Segment::Line { b, .. } => b,
            Segment::Arc { end, .. } => end,
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { a, b } => a.dist(b),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point at normalized parameter `s` in `[0, 1]`. The endpoints are
    /// returned exactly at `s = 0` and `s = 1`.
    pub fn point_at(&self, s: f64) -> Point {
        if s <= 0.0 {
            return self.start();
        }
        if s >= 1.0 {
            return self.end();
        }
        match *self {
            Segment::Line { a, b } => a.lerp(b, s),
            Segment::Arc { center, radius, theta0, sweep, .. } => {
                let th = theta0 + s * sweep;
                center + Point::new(th.cos(), th.sin()) * radius
            }
        }
    }

    /// Unit tangent in the direction of traversal at parameter `s`.
    pub fn tangent_at(&self, s: f64) -> Point {
        match *self {
            Segment::Line { a, b } => (b - a) * (1.0 / a.dist(b)),
            Segment::Arc { theta0, sweep, .. } => {
                let th = theta0 + s.clamp(0.0, 1.0) * sweep;
                let sg = sweep.signum();
                Point::new(-th.sin() * sg, th.cos() * sg)
            }
        }
    }

    /// Normalized parameter of `p` along an arc, if its polar angle lies in
    /// the arc's span.
    fn arc_param(&self, p: Point) -> Option<f64> {
        match *self {
            Segment::Line { .. } => None,
            Segment::Arc { center, theta0, sweep, .. } => {
                let ang = (p - center).angle();
                let d = if sweep > 0.0 {
                    (ang - theta0).rem_euclid(TAU)
                } else {
                    (theta0 - ang).rem_euclid(TAU)
                };
                if d <= sweep.abs() {
                    Some(d / sweep.abs())
                } else {
                    None
                }
            }
        }
    }

    /// Parameter of the point of the segment closest to `p`.
    pub fn project(&self, p: Point) -> f64 {
        match *self {
            Segment::Line { a, b } => {
                let ab = b - a;
                let l2 = ab.norm2();
                if l2 == 0.0 {
                    0.0
                } else {
                    ((p - a).dot(ab) / l2).clamp(0.0, 1.0)
                }
            }
            Segment::Arc { start, end, .. } => match self.arc_param(p) {
                Some(s) => s,
                None => {
                    if p.dist(start) <= p.dist(end) {
                        0.0
                    } else {
                        1.0
                    }
                }
            },
        }
    }

    /// Euclidean distance from `p` to the segment.
    pub fn distance(&self, p: Point) -> f64 {
        match *self {
            Segment::Line { a, b } => point_segment_distance(p, a, b),
            Segment::Arc { center, radius, start, end, .. } => match self.arc_param(p) {
                Some(_) => ((p - center).norm() - radius).abs(),
                None => p.dist(start).min(p.dist(end)),
            },
        }
    }

    /// Point on the segment between the two points `p` and `q` of the
    /// segment, along the shorter arc. Used when splitting boundary edges:
    /// the result lies exactly on the analytic curve. Antipodal points are
    /// split in the direction of the sweep.
    pub fn midpoint_between(&self, p: Point, q: Point) -> Point {
        match *self {
            Segment::Line { .. } => p.midpoint(q),
            Segment::Arc { center, radius, sweep, .. } => {
                let ap = (p - center).angle();
                let aq = (q - center).angle();
                let mut d = wrap_angle(aq - ap);
                if PI - d.abs() < 1e-9 {
                    d = d.abs() * sweep.signum();
                }
                let th = ap + 0.5 * d;
                center + Point::new(th.cos(), th.sin()) * radius
            }
        }
    }

    pub fn reversed(&self) -> Segment {
        match *self {
            Segment::Line { a, b } => Segment::Line { a: b, b: a },
            Segment::Arc { center, radius, start, end, theta0, sweep } => Segment::Arc {
                center,
                radius,
                start: end,
                end: start,
                theta0: theta0 + sweep,
                sweep: -sweep,
            },
        }
    }

    /// Reflection across the x-axis; traversal direction is preserved
    /// point-wise, so the orientation of a closed loop flips.
    pub fn mirrored(&self) -> Segment {
        match *self {
            Segment::Line { a, b } => Segment::Line { a: a.mirror(), b: b.mirror() },
            Segment::Arc { center, radius, start, end, theta0, sweep } => Segment::Arc {
                center: center.mirror(),
                radius,
                start: start.mirror(),
                end: end.mirror(),
                theta0: -theta0,
                sweep: -sweep,
            },
        }
    }

    /// Contribution `1/2 ∮ (x dy − y dx)` of this piece to the signed area
    /// of a closed loop.
    pub fn area_term(&self) -> f64 {
        match *self {
            Segment::Line { a, b } => 0.5 * a.cross(b),
            Segment::Arc { center, radius, theta0, sweep, .. } => {
                let t1 = theta0 + sweep;
                0.5 * (radius * radius * sweep
                    + radius * (center.x * (t1.sin() - theta0.sin()) - center.y * (t1.cos() - theta0.cos())))
            }
        }
    }

    /// Parameters in `(0, 1)` where the segment crosses the x-axis.
    pub fn axis_crossings(&self) -> alloc::vec::Vec<f64> {
        let mut out = alloc::vec::Vec::new();
        match *self {
            Segment::Line { a, b } => {
                if (a.y < 0.0 && b.y > 0.0) || (a.y > 0.0 && b.y < 0.0) {
                    out.push(a.y / (a.y - b.y));
                }
            }
            Segment::Arc { center, radius, theta0, sweep, .. } => {
                let q = -center.y / radius;
                if q.abs() <= 1.0 {
                    let base = q.asin();
                    for th in [base, PI - base] {
                        let d = if sweep > 0.0 {
                            (th - theta0).rem_euclid(TAU)
                        } else {
                            (theta0 - th).rem_euclid(TAU)
                        };
                        let s = d / sweep.abs();
                        if s > 0.0 && s < 1.0 && !out.iter().any(|&o: &f64| (o - s).abs() < 1e-14) {
                            out.push(s);
                        }
                    }
                    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
                }
            }
        }
        out
    }

    /// Sub-piece between parameters `s0 < s1`, with the given endpoints.
    pub fn sub(&self, s0: f64, s1: f64, p0: Point, p1: Point) -> Segment {
        match *self {
            Segment::Line { .. } => Segment::Line { a: p0, b: p1 },
            Segment::Arc { center, radius, theta0, sweep, .. } => Segment::Arc {
                center,
                radius,
                start: p0,
                end: p1,
                theta0: theta0 + s0 * sweep,
                sweep: (s1 - s0) * sweep,
            },
        }
    }
}
