use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::curve::Segment;
use super::point::Point;
use super::GeometryError;

/// How the annular handle is joined to the rounded rectangle where its
/// circles cross the flat top and bottom edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum JunctionMode {
    /// Plain boolean union with corners where the circles meet the edges.
    Sharp,
    /// Each junction corner replaced by a circular fillet of this radius.
    Filleted(f64),
}

/// Parameters of the rounded rectangle `(-1,1) x (-l,l)` (corner radius
/// `rho`) united with the annulus `r < |p - (t,0)| < r + h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    pub l: f64,
    pub rho: f64,
    pub r: f64,
    pub h: f64,
    pub t: f64,
    /// Clearance kept between the circle crossings and the ends of the flat
    /// edges.
    pub margin: f64,
    pub junction_mode: JunctionMode,
}

impl Default for DomainParams {
    fn default() -> Self {
        DomainParams {
            l: 0.5,
            rho: 0.25,
            r: 2.0,
            h: 0.05,
            t: 1.9,
            margin: 0.05,
            junction_mode: JunctionMode::Sharp,
        }
    }
}

/// Admissible translation window and the two crossing thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    /// Open interval of admissible `t`; unbounded when `h = 0`.
    pub t_lo: f64,
    pub t_hi: f64,
    /// `N` is inside the inner circle iff `t < t_crit_in`.
    pub t_crit_in: f64,
    /// `N` is outside the outer circle iff `t > t_crit_out`.
    pub t_crit_out: f64,
}

impl Window {
    pub fn contains(&self, t: f64) -> bool {
        t > self.t_lo && t < self.t_hi
    }
}

/// Result of a membership query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    /// Within `1e-12` of the boundary.
    Boundary,
}

pub const BOUNDARY_EPS: f64 = 1e-12;

impl DomainParams {
    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn center(&self) -> Point {
        Point::new(self.t, 0.0)
    }

    /// Half-length of the flat part of the top edge that the circles must
    /// cross.
    pub fn flat_half(&self) -> f64 {
        1.0 - self.rho - self.margin
    }

    pub fn a_in(&self) -> f64 {
        (self.r * self.r - self.l * self.l).sqrt()
    }

    pub fn a_out(&self) -> f64 {
        let ro = self.r + self.h;
        (ro * ro - self.l * self.l).sqrt()
    }

    pub fn junction_radius(&self) -> Option<f64> {
        match self.junction_mode {
            JunctionMode::Sharp => None,
            JunctionMode::Filleted(rj) => Some(rj),
        }
    }

    /// Smallest length scale the boundary must resolve.
    pub fn feature_size(&self) -> f64 {
        let mut s = self.rho.min(self.l);
        if self.h > 0.0 {
            s = s.min(self.h);
        }
        if let Some(rj) = self.junction_radius() {
            s = s.min(rj);
        }
        s
    }
}

/// Check the parameter invariants and compute the admissible window.
pub fn validate_params(p: &DomainParams) -> Result<Window, GeometryError> {
    let mut errs: Vec<String> = Vec::new();
    let fields = [("l", p.l), ("rho", p.rho), ("r", p.r), ("h", p.h), ("margin", p.margin)];
    for (name, v) in fields {
        if !v.is_finite() || v < 0.0 {
            errs.push(format!("{name} must be finite and nonnegative (got {v})"));
        }
    }
    if !errs.is_empty() {
        return Err(GeometryError::BadParams(errs));
    }
    if !(p.l > 0.0 && p.l < 1.0) {
        errs.push(format!("l must lie in (0, 1) (got {})", p.l));
    }
    if !(p.rho > 0.0 && p.rho < p.l.min(1.0)) {
        errs.push(format!("rho must lie in (0, min(l, 1)) (got {})", p.rho));
    }
    if p.margin >= 1.0 - p.rho {
        errs.push(format!("margin must be smaller than 1 - rho (got {})", p.margin));
    }
    let corner = Point::new(1.0 - p.rho, p.l - p.rho).norm() + p.rho;
    if !(p.r > corner) {
        errs.push(format!(
            "the untranslated annulus must enclose the rectangle: need r > {corner:.6} (got {})",
            p.r
        ));
    }
    if !(p.h < p.l) {
        errs.push(format!("handle width must satisfy h < l (got h = {}, l = {})", p.h, p.l));
    }
    if let JunctionMode::Filleted(rj) = p.junction_mode {
        if !(rj > 0.0 && rj < p.h) {
            errs.push(format!("junction fillet radius must lie in (0, h) (got {rj})"));
        }
    }
    if !p.t.is_finite() {
        errs.push(String::from("t must be finite"));
    }
    if !errs.is_empty() {
        return Err(GeometryError::BadParams(errs));
    }

    let a_in = p.a_in();
    let a_out = p.a_out();
    if p.h == 0.0 {
        return Ok(Window {
            t_lo: f64::NEG_INFINITY,
            t_hi: f64::INFINITY,
            t_crit_in: a_in,
            t_crit_out: a_out,
        });
    }
    let c = p.flat_half();
    // Both circles cross the flat top edge.
    let mut lo = (a_in - c).max(a_out - c);
    let mut hi = (a_in + c).min(a_out + c);
    // W strictly outside the outer circle.
    lo = lo.max(p.r + p.h - 1.0);
    // E strictly inside the inner circle.
    lo = lo.max(1.0 - a_in);
    hi = hi.min(1.0 + a_in);
    if let JunctionMode::Filleted(rj) = p.junction_mode {
        // Fillet tangency points must also stay on the flat edge.
        let fo = ((p.r + p.h + rj).powi(2) - (p.l + rj).powi(2)).sqrt();
        let fi = ((p.r - rj).powi(2) - (p.l + rj).powi(2)).sqrt();
        lo = lo.max(fo - c).max(fi - c);
        hi = hi.min(fo + c).min(fi + c);
    }
    if !(lo < hi) {
        return Err(GeometryError::EmptyWindow { lo, hi });
    }
    Ok(Window { t_lo: lo, t_hi: hi, t_crit_in: a_in, t_crit_out: a_out })
}

/// Signed distance to the rounded rectangle `(-1,1) x (-l,l)` with corner
/// radius `rho` (negative inside).
pub fn rounded_rect_sdf(l: f64, rho: f64, p: Point) -> f64 {
    let qx = p.x.abs() - (1.0 - rho);
    let qy = p.y.abs() - (l - rho);
    let outside = Point::new(qx.max(0.0), qy.max(0.0)).norm();
    outside + qx.max(qy).min(0.0) - rho
}

/// One junction fillet in the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fillet {
    pub center: Point,
    pub radius: f64,
    /// Tangency point on the flat top edge.
    pub on_edge: Point,
    /// Tangency point on the handle circle.
    pub on_circle: Point,
    /// Sharp corner the fillet replaces.
    pub corner: Point,
}

impl Fillet {
    /// Whether `p` (upper half-plane) lies in the region the fillet adds
    /// to the domain: between the fillet circle and the replaced corner.
    fn covers(&self, p: Point) -> bool {
        if p.y <= self.on_edge.y {
            return false;
        }
        if p.dist(self.center) <= self.radius {
            return false;
        }
        // Inside the sector at the fillet centre spanned by the two
        // tangency directions.
        let a = self.on_edge - self.center;
        let b = self.on_circle - self.center;
        let v = p - self.center;
        let ab = a.cross(b);
        if !(a.cross(v) * ab >= 0.0 && v.cross(b) * ab >= 0.0) {
            return false;
        }
        v.norm() <= (self.corner - self.center).norm()
    }

    /// The fillet arc from the edge tangency to the circle tangency.
    pub fn arc(&self) -> Segment {
        let a = (self.on_edge - self.center).angle();
        let b = (self.on_circle - self.center).angle();
        let ccw = super::curve::wrap_angle(b - a) > 0.0;
        Segment::arc(self.center, self.radius, self.on_edge, self.on_circle, ccw)
    }
}

/// The two upper junction fillets (outer circle, inner circle), if the
/// mode is filleted and the handle has positive width.
pub fn fillets(p: &DomainParams) -> Option<[Fillet; 2]> {
    let rj = p.junction_radius()?;
    if p.h <= 0.0 {
        return None;
    }
    let c = p.center();
    let ro = p.r + p.h;
    let fy = p.l + rj;
    let fo = Point::new(c.x - ((ro + rj).powi(2) - fy * fy).sqrt(), fy);
    let outer = Fillet {
        center: fo,
        radius: rj,
        on_edge: Point::new(fo.x, p.l),
        on_circle: c + (fo - c) * (ro / (ro + rj)),
        corner: Point::new(c.x - p.a_out(), p.l),
    };
    let fi = Point::new(c.x - ((p.r - rj).powi(2) - fy * fy).sqrt(), fy);
    let inner = Fillet {
        center: fi,
        radius: rj,
        on_edge: Point::new(fi.x, p.l),
        on_circle: c + (fi - c) * (p.r / (p.r - rj)),
        corner: Point::new(c.x - p.a_in(), p.l),
    };
    Some([outer, inner])
}

/// Implicit membership value: negative inside, positive outside, and its
/// magnitude a lower bound on the distance to the boundary away from the
/// junction fillets. Exactly symmetric in `y`.
pub fn membership_value(p: &DomainParams, q: Point) -> f64 {
    let q = Point::new(q.x, q.y.abs());
    let rr = rounded_rect_sdf(p.l, p.rho, q);
    if p.h <= 0.0 {
        return rr;
    }
    let d = q.dist(p.center());
    let ring = (p.r - d).max(d - p.r - p.h);
    let mut v = rr.min(ring);
    if v > 0.0 {
        if let Some(fs) = fillets(p) {
            for f in fs.iter() {
                if f.covers(q) {
                    v = v.min(f.radius - q.dist(f.center));
                }
            }
        }
    }
    v
}

/// Classify `q` as inside, outside, or on the boundary of the domain.
pub fn classify(p: &DomainParams, q: Point) -> Membership {
    let v = membership_value(p, q);
    if v.abs() < BOUNDARY_EPS {
        Membership::Boundary
    } else if v < 0.0 {
        Membership::Inside
    } else {
        Membership::Outside
    }
}

/// Whether `q` is interior to the domain. Boundary points report `false`.
pub fn contains(p: &DomainParams, q: Point) -> bool {
    classify(p, q) == Membership::Inside
}

/// Distinguished points and segments used by the diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub w: Point,
    pub e: Point,
    pub n: Point,
    pub s: Point,
    /// The open segment `(W, E)` on the x-axis.
    pub sigma: (Point, Point),
    /// The closed segment `[S, N]` on the y-axis.
    pub bisecting_segment: (Point, Point),
    /// Flat top segment `(P_N, Q_N)` the handle circles must cross.
    pub sigma_n: (Point, Point),
    pub sigma_s: (Point, Point),
    /// A point of the hole.
    pub p_hole: Point,
}

impl ProbeSet {
    pub fn new(p: &DomainParams) -> Self {
        let c = p.flat_half();
        let n = Point::new(0.0, p.l);
        let s = Point::new(0.0, -p.l);
        let w = Point::new(-1.0, 0.0);
        let e = Point::new(1.0, 0.0);
        ProbeSet {
            w,
            e,
            n,
            s,
            sigma: (w, e),
            bisecting_segment: (s, n),
            sigma_n: (Point::new(-c, p.l), Point::new(c, p.l)),
            sigma_s: (Point::new(-c, -p.l), Point::new(c, -p.l)),
            p_hole: Point::new(0.5 * (1.0 + p.t + p.r), 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_window_and_thresholds() {
        let w = validate_params(&DomainParams::default()).unwrap();
        assert!((w.t_crit_in - 1.936492).abs() < 1e-6);
        assert!((w.t_crit_out - 1.988089).abs() < 1e-6);
        assert!(w.t_lo < 1.6 && w.t_hi > 2.3);
    }

    #[test]
    fn zero_width_handle_admits_every_t() {
        let w = validate_params(&DomainParams::default().with_h(0.0)).unwrap();
        assert!(w.contains(-100.0) && w.contains(100.0));
        assert_eq!(w.t_crit_in, w.t_crit_out);
    }

    #[test]
    fn small_annulus_is_rejected() {
        let p = DomainParams { r: 1.0, ..DomainParams::default() };
        assert!(matches!(validate_params(&p), Err(GeometryError::BadParams(_))));
    }

    #[test]
    fn membership_examples() {
        let p = DomainParams::default();
        assert!(contains(&p, Point::ORIGIN));
        assert!(!contains(&p, Point::new(p.t + p.r + p.h + 1.0, 0.0)));
        let hole = ProbeSet::new(&p).p_hole;
        assert!(!contains(&p, hole));
        assert!(hole.dist(p.center()) < p.r);
        assert!(rounded_rect_sdf(p.l, p.rho, hole) > 0.0);
        assert_eq!(classify(&p, Point::new(-1.0, 0.0)), Membership::Boundary);
    }

    #[test]
    fn fillets_are_tangent() {
        let p = DomainParams { junction_mode: JunctionMode::Filleted(0.02), ..DomainParams::default() };
        let [fo, fi] = fillets(&p).unwrap();
        let c = p.center();
        assert!((fo.center.dist(c) - (p.r + p.h + 0.02)).abs() < 1e-14);
        assert!((fi.center.dist(c) - (p.r - 0.02)).abs() < 1e-14);
        assert!((fo.on_circle.dist(c) - (p.r + p.h)).abs() < 1e-14);
        assert!((fi.on_circle.dist(fi.center) - 0.02).abs() < 1e-14);
        // a point just above the sharp corner is added by the fillet
        let q = fo.corner + Point::new(-1e-4, 1e-4);
        assert!(contains(&p, q));
        assert!(!contains(&DomainParams::default(), q));
    }
}
