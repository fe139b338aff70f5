//! Second Dirichlet eigenfunctions on planar domains with a sliding annular
//! handle, and the topology of their nodal lines.
//!
//! The pipeline is a chain of pure stages:
//!
//! - [`geometry`]: the two-parameter family of domains (a rounded rectangle
//!   glued to a translated thin annulus), its admissible parameter window and
//!   its exact boundary loops.
//! - [`mesh`]: mirror-symmetric quality triangulations of those domains.
//! - [`fem`]: P1 stiffness and mass matrices for the Dirichlet Laplacian.
//! - [`eig`]: the smallest eigenpairs of the pencil `K u = λ M u`.
//! - [`nodal`]: zero-set extraction, boundary contact and winding numbers.
//! - [`sweep`]: the scan over the handle position, the bisection of the
//!   contact flip and the closed-nodal-line certificate.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the CLI and
//! parallel drivers live in the companion `slidenodal` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod eig;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod nodal;
pub mod sweep;

pub use geometry::Point;
