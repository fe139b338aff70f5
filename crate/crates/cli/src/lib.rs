//! Command-line driver, file formats and figures for `slidenodal-core`.
//!
//! - [`config`]: flat dotted-key configuration with overrides.
//! - [`io`]: mesh, vector, matrix, CSV and JSON artifacts.
//! - [`render`]: SVG figures of domains, meshes and nodal lines.
//! - [`oracle`] and [`validate`]: closed-form eigenvalues and convergence
//!   studies.
//! - [`commands`]: the subcommands behind the `slidenodal` binary.

pub mod commands;
pub mod config;
pub mod io;
pub mod oracle;
pub mod render;
pub mod validate;

pub use commands::{run, Cli, Command};
