//! Convergence studies against closed-form eigenvalues.
//!
//! Each study meshes a domain once and refines it uniformly, so the edge
//! length halves exactly between levels and the observed order is
//! `log2(e_k / e_{k+1})`.

use std::fmt::Write as _;

use slidenodal_core::eig::{solve_symmetric, SolverOptions};
use slidenodal_core::fem::{assemble_with, Fault};
use slidenodal_core::geometry::DomainBoundary;
use slidenodal_core::mesh::{generate, refine, Mesh, SizingSpec};

use crate::config::ValidateOptions;
use crate::oracle::{disk_eigenvalues, rectangle_eigenvalues};

/// Relative eigenvalue error allowed at the finest rectangle level.
pub const RECTANGLE_TOL: f64 = 0.005;
/// Relative error allowed for the two smallest disk eigenvalues.
pub const DISK_TOL: f64 = 0.01;
/// The disk's second eigenvalue is double; the computed gap must show it.
pub const DISK_GAP_MAX: f64 = 0.05;
/// Accepted range of the observed convergence order.
pub const ORDER_RANGE: (f64, f64) = (1.7, 2.3);

#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub max_edge: f64,
    pub n_vertices: usize,
    pub lambda: [f64; 3],
    pub rel_err: [f64; 3],
    pub gap2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Study {
    pub name: &'static str,
    pub exact: [f64; 3],
    pub levels: Vec<Level>,
    /// Observed order of each eigenvalue between consecutive levels.
    pub orders: Vec<[f64; 3]>,
    pub failures: Vec<String>,
}

impl Study {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ValidateError {
    #[error("{study}: {msg}")]
    Numerical { study: &'static str, msg: String },
    #[error("at least two levels are needed for an order, got {0}")]
    Levels(usize),
}

fn run_levels(name: &'static str, b: &DomainBoundary, exact: [f64; 3], o: &ValidateOptions) -> Result<Study, ValidateError> {
    let fail = |msg: String| ValidateError::Numerical { study: name, msg };
    if o.levels < 2 {
        return Err(ValidateError::Levels(o.levels));
    }
    let mut mesh: Mesh = generate(b, &SizingSpec { base_edge: o.base_edge, ..SizingSpec::default() })
        .map_err(|e| fail(e.to_string()))?;
    let mut levels = Vec::new();
    for level in 0..o.levels {
        if level > 0 {
            let all: Vec<usize> = (0..mesh.n_triangles()).collect();
            mesh = refine(&mesh, &all).map_err(|e| fail(e.to_string()))?.mesh;
        }
        let (k, m, d) = assemble_with(&mesh, o.fault).map_err(|e| fail(e.to_string()))?;
        let r = solve_symmetric(&k, &m, &d.mirror(&mesh), 3, &SolverOptions::default())
            .map_err(|e| fail(e.to_string()))?;
        let lambda = [r.lambda(0), r.lambda(1), r.lambda(2)];
        let rel_err = [0, 1, 2].map(|i| (lambda[i] - exact[i]).abs() / exact[i]);
        levels.push(Level { max_edge: mesh.max_edge(), n_vertices: mesh.n_vertices(), lambda, rel_err, gap2: r.gap2 });
    }
    let orders = levels
        .windows(2)
        .map(|w| [0, 1, 2].map(|i| (w[0].rel_err[i] / w[1].rel_err[i]).log2()))
        .collect();
    Ok(Study { name, exact, levels, orders, failures: Vec::new() })
}

fn in_range(x: f64) -> bool {
    ORDER_RANGE.0 <= x && x <= ORDER_RANGE.1
}

/// `(-1, 1) x (-0.5, 0.5)`: the three smallest eigenvalues within
/// [`RECTANGLE_TOL`] at the finest level, and the order of each between
/// the two finest levels inside [`ORDER_RANGE`].
pub fn rectangle_study(o: &ValidateOptions) -> Result<Study, ValidateError> {
    let ex = rectangle_eigenvalues(0.5, 3);
    let mut s = run_levels("rectangle", &DomainBoundary::rectangle(1.0, 0.5), [ex[0], ex[1], ex[2]], o)?;
    let fine = s.levels.last().expect("levels >= 2").clone();
    let last = *s.orders.last().expect("levels >= 2");
    for i in 0..3 {
        if !(fine.rel_err[i] < RECTANGLE_TOL) {
            s.failures.push(format!("lambda{} error {:.3e} >= {RECTANGLE_TOL}", i + 1, fine.rel_err[i]));
        }
        if !in_range(last[i]) {
            s.failures.push(format!("lambda{} order {:.3} outside {:?}", i + 1, last[i], ORDER_RANGE));
        }
    }
    Ok(s)
}

/// Unit disk: the two smallest eigenvalues within [`DISK_TOL`] and the
/// double second eigenvalue reported with a gap below [`DISK_GAP_MAX`].
pub fn disk_study(o: &ValidateOptions) -> Result<Study, ValidateError> {
    let ex = disk_eigenvalues(3);
    let mut s = run_levels("disk", &DomainBoundary::disk(0.0, 1.0), [ex[0], ex[1], ex[2]], o)?;
    let fine = s.levels.last().expect("levels >= 2").clone();
    for i in 0..2 {
        if !(fine.rel_err[i] < DISK_TOL) {
            s.failures.push(format!("lambda{} error {:.3e} >= {DISK_TOL}", i + 1, fine.rel_err[i]));
        }
    }
    if !(fine.gap2 < DISK_GAP_MAX) {
        s.failures.push(format!("gap2 {:.3e} does not flag the double eigenvalue", fine.gap2));
    }
    Ok(s)
}

/// Human-readable table of a study.
pub fn report(s: &Study) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} study, exact {:.6} {:.6} {:.6}",
        s.name, s.exact[0], s.exact[1], s.exact[2]
    );
    let _ = writeln!(out, "  {:>9} {:>8} {:>11} {:>11} {:>11} {:>9}", "max_edge", "vertices", "err1", "err2", "err3", "gap2");
    for l in &s.levels {
        let _ = writeln!(
            out,
            "  {:>9.5} {:>8} {:>11.3e} {:>11.3e} {:>11.3e} {:>9.2e}",
            l.max_edge, l.n_vertices, l.rel_err[0], l.rel_err[1], l.rel_err[2], l.gap2
        );
    }
    for (i, o) in s.orders.iter().enumerate() {
        let _ = writeln!(out, "  order {}->{}: {:.3} {:.3} {:.3}", i, i + 1, o[0], o[1], o[2]);
    }
    if s.passed() {
        let _ = writeln!(out, "  ok");
    }
    for f in &s.failures {
        let _ = writeln!(out, "  FAIL {f}");
    }
    out
}

/// Whether the fault hook is armed; reported so that a deliberately broken
/// run is recognisable in logs.
pub fn fault_note(f: Fault) -> Option<&'static str> {
    match f {
        Fault::None => None,
        Fault::MassDiagonalOnly => Some("fault injected: element mass matrices keep only their diagonal"),
    }
}
