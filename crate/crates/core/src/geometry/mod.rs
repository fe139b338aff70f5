//! The handle family: a rounded rectangle united with a translated annulus,
//! its admissible translation window, membership tests, and analytic
//! boundary loops.

mod boundary;
mod curve;
mod domain;
mod junction;
mod point;
mod rrect;
mod trace;

use alloc::string::String;
use alloc::vec::Vec;

pub use boundary::{
    build_boundary, sample_loop, BoundaryLoop, BoundarySegment, DomainBoundary, LoopTag, Orientation, Origin,
};
pub use curve::{wrap_angle, Segment};
pub use domain::{
    classify, contains, fillets, membership_value, rounded_rect_sdf, validate_params, DomainParams, Fillet,
    JunctionMode, Membership, ProbeSet, Window, BOUNDARY_EPS,
};
pub use junction::{cutoff, junction_profile, step};
pub use point::{line_intersection, orient, point_segment_distance, segments_intersect, Point};
pub use rrect::RoundedRect;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid domain parameters: {}", .0.join("; "))]
    BadParams(Vec<String>),
    #[error("admissible translation window is empty (lower bound {lo}, upper bound {hi})")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("t = {t} is outside the admissible window ({lo}, {hi})")]
    NotAdmissible { t: f64, lo: f64, hi: f64 },
    #[error("traced {found} boundary loops, expected {expected}")]
    Topology { expected: usize, found: usize },
    #[error("x = {x} is outside the profile interval [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },
    #[error("the junction profile is only defined in filleted mode")]
    SharpJunction,
    #[error("target edge {target_edge} does not resolve the handle (limit {limit})")]
    Resolution { target_edge: f64, limit: f64 },
}
