use super::{Mesh, NO_NEIGHBOR};
use crate::geometry::Point;

/// Result of a point location query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Location {
    /// Containing triangle and barycentric coordinates of the point.
    Inside { triangle: usize, bary: [f64; 3] },
    Outside,
}

const BARY_TOL: f64 = 1e-12;

impl Mesh {
    pub fn barycentric(&self, t: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.corners(t);
        let det = (b - a).cross(c - a);
        let l1 = (p - a).cross(c - a) / det;
        let l2 = (b - a).cross(p - a) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Locate `p` by walking from `hint`, falling back to a scan over all
    /// triangles.
    pub fn locate_from(&self, p: Point, hint: usize) -> Location {
        if self.triangles.is_empty() {
            return Location::Outside;
        }
        let mut t = if hint < self.triangles.len() { hint } else { 0 };
        for _ in 0..self.triangles.len().min(100_000) {
            let bary = self.barycentric(t, p);
            let (k, min) = bary
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
            if min >= -BARY_TOL {
                return Location::Inside { triangle: t, bary: snap(bary) };
            }
            let nb = self.neighbors[t][k];
            if nb == NO_NEIGHBOR {
                break;
            }
            t = nb;
        }
        for t in 0..self.triangles.len() {
            let bary = self.barycentric(t, p);
            if bary.iter().all(|&v| v >= -BARY_TOL) {
                return Location::Inside { triangle: t, bary: snap(bary) };
            }
        }
        Location::Outside
    }

    pub fn locate(&self, p: Point) -> Location {
        self.locate_from(p, 0)
    }
}

/// Snap coordinates within round-off of 0 or 1 so that vertex queries
/// report an exact unit coordinate, and renormalize.
fn snap(mut b: [f64; 3]) -> [f64; 3] {
    for v in b.iter_mut() {
        if v.abs() <= BARY_TOL {
            *v = 0.0;
        }
        if (*v - 1.0).abs() <= BARY_TOL {
            *v = 1.0;
        }
    }
    let s: f64 = b.iter().sum();
    if s != 1.0 {
        let k = (0..3).max_by(|&i, &j| b[i].partial_cmp(&b[j]).unwrap()).unwrap();
        b[k] += 1.0 - s;
    }
    b
}
