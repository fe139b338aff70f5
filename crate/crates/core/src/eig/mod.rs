//! Smallest eigenpairs of the reduced pencil `K u = λ M u`.
//!
//! The production path splits the problem by the mesh reflection into an
//! even and an odd block, solves each by block inverse iteration with a
//! sparse direct inner solve, and merges the spectra. Every returned pair
//! is re-checked against the unsplit matrices.

mod envelope;
mod subspace;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::fem::SparseSymmetricMatrix;
use crate::geometry::Point;
use crate::mesh::{Location, Mesh};

pub use envelope::{rcm, EnvelopeCholesky};
pub use subspace::pcg;
use subspace::{dot, norm};

/// Relative gap `(λ₃−λ₂)/λ₂` below which λ₂ is not treated as simple.
pub const SIMPLE_GAP: f64 = 1e-3;

/// Parity defect below which an eigenfunction is classed even or odd.
pub const PARITY_TOL: f64 = 1e-6;

/// Parity tolerance for the y-axis check, which compares values
/// interpolated at reflected points of a mesh that is not itself
/// symmetric in that axis.
pub const SAMPLED_PARITY_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EigError {
    #[error("no convergence within {max_iters} iterations")]
    NoConvergence { max_iters: usize },
    #[error("mass matrix is numerically singular on the search space")]
    NearSingularM,
    #[error("stiffness matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("inner conjugate-gradient solve did not converge within {max_iters} iterations")]
    InnerSolve { max_iters: usize },
    #[error("invalid request: {0}")]
    Invalid(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerSolver {
    /// Envelope Cholesky factorization in reverse Cuthill–McKee order.
    Cholesky,
    /// Jacobi-preconditioned conjugate gradients to `tol / 10`.
    Pcg { max_iters: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub seed: u64,
    pub max_iters: usize,
    /// Search vectors beyond the requested count.
    pub extra_vectors: usize,
    pub inner: InnerSolver,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, seed: 0, max_iters: 400, extra_vectors: 6, inner: InnerSolver::Cholesky }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub lambda: f64,
    /// Coefficients over the interior degrees of freedom.
    pub coeffs: Vec<f64>,
    /// `‖K x − λ M x‖₂ / (λ ‖x‖_M)`.
    pub residual: f64,
    /// `x · M x`.
    pub m_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub pairs: Vec<EigenPair>,
    /// `(λ₃ − λ₂) / λ₂`.
    pub gap2: f64,
    /// Largest `|x_i · M x_j|` over `i ≠ j`.
    pub max_m_coupling: f64,
    pub iterations: usize,
}

impl SpectrumReport {
    pub fn lambda(&self, i: usize) -> f64 {
        self.pairs[i].lambda
    }

    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    /// Simplicity of λ₂ in the sense of [`SIMPLE_GAP`].
    pub fn second_is_simple(&self) -> bool {
        self.gap2 >= SIMPLE_GAP
    }
}

/// Residual of a candidate pair against the given matrices.
pub fn residual(k: &SparseSymmetricMatrix, m: &SparseSymmetricMatrix, lambda: f64, x: &[f64]) -> f64 {
    let kx = k.matvec(x).expect("dimension checked by caller");
    let mx = m.matvec(x).expect("dimension checked by caller");
    let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lambda * b).collect();
    norm(&r) / (lambda.abs() * dot(x, &mx).sqrt())
}

/// Make the entry of largest magnitude positive (first such index wins).
pub fn normalize_sign(x: &mut [f64]) {
    let mut best = 0;
    for i in 1..x.len() {
        if x[i].abs() > x[best].abs() {
            best = i;
        }
    }
    if x.get(best).is_some_and(|&v| v < 0.0) {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

fn check_input(k: &SparseSymmetricMatrix, m: &SparseSymmetricMatrix, count: usize) -> Result<(), EigError> {
    if count < 3 {
        return Err(EigError::Invalid("at least three eigenpairs are required"));
    }
    if k.dim != m.dim || !k.symmetric || !m.symmetric {
        return Err(EigError::Invalid("K and M must be symmetric and of equal size"));
    }
    if k.dim < count {
        return Err(EigError::Invalid("fewer unknowns than requested eigenpairs"));
    }
    Ok(())
}

fn report(
    k: &SparseSymmetricMatrix,
    m: &SparseSymmetricMatrix,
    mut raw: Vec<(f64, Vec<f64>)>,
    count: usize,
    tol: f64,
    iterations: usize,
) -> Result<SpectrumReport, EigError> {
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    raw.truncate(count);
    let mut pairs = Vec::with_capacity(count);
    let mut mx = Vec::with_capacity(count);
    for (lambda, mut x) in raw {
        normalize_sign(&mut x);
        let mxi = m.matvec(&x).expect("sizes match");
        let m_norm = dot(&x, &mxi);
        let res = residual(k, m, lambda, &x);
        if !(res <= tol) {
            return Err(EigError::NoConvergence { max_iters: iterations });
        }
        mx.push(mxi);
        pairs.push(EigenPair { lambda, coeffs: x, residual: res, m_norm });
    }
    let mut coupling: f64 = 0.0;
    for i in 0..pairs.len() {
        for j in 0..pairs.len() {
            if i != j {
                coupling = coupling.max(dot(&pairs[i].coeffs, &mx[j]).abs());
            }
        }
    }
    let gap2 = (pairs[2].lambda - pairs[1].lambda) / pairs[1].lambda;
    Ok(SpectrumReport { pairs, gap2, max_m_coupling: coupling, iterations })
}

/// The `count` smallest eigenpairs of `K x = λ M x`, without using any
/// symmetry.
pub fn solve_smallest(
    k: &SparseSymmetricMatrix,
    m: &SparseSymmetricMatrix,
    count: usize,
    opts: &SolverOptions,
) -> Result<SpectrumReport, EigError> {
    check_input(k, m, count)?;
    let raw = subspace::smallest(k, m, count, opts)?;
    let it = raw.iterations;
    report(k, m, raw.values.into_iter().zip(raw.vectors).collect(), count, opts.tol, it)
}

/// One parity block of a reflection-symmetric problem: each column
/// combines a vertex with its mirror image.
struct Block {
    cols: Vec<[(usize, f64); 2]>,
}

impl Block {
    fn build(mirror: &[usize], odd: bool) -> Block {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let mut cols = Vec::new();
        for (i, &j) in mirror.iter().enumerate() {
            if i == j {
                if !odd {
                    cols.push([(i, 1.0), (i, 0.0)]);
                }
            } else if i < j {
                cols.push([(i, s), (j, if odd { -s } else { s })]);
            }
        }
        Block { cols }
    }

    /// `Qᵀ A Q`, symmetrized.
    fn project(&self, a: &SparseSymmetricMatrix) -> SparseSymmetricMatrix {
        let mut col_of = vec![(usize::MAX, 0.0); a.dim];
        for (c, col) in self.cols.iter().enumerate() {
            for &(i, w) in col {
                if w != 0.0 {
                    col_of[i] = (c, w);
                }
            }
        }
        let mut t = Vec::new();
        for i in 0..a.dim {
            let (ci, wi) = col_of[i];
            if ci == usize::MAX {
                continue;
            }
            for (j, v) in a.row(i) {
                let (cj, wj) = col_of[j];
                if cj == usize::MAX {
                    continue;
                }
                t.push((ci, cj, 0.5 * wi * v * wj));
                t.push((cj, ci, 0.5 * wi * v * wj));
            }
        }
        SparseSymmetricMatrix::from_triplets(self.cols.len(), &t)
    }

    fn lift(&self, y: &[f64], n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (c, col) in self.cols.iter().enumerate() {
            for &(i, w) in col {
                if w != 0.0 {
                    x[i] = w * y[c];
                }
            }
        }
        x
    }
}

/// The `count` smallest eigenpairs of a pencil that commutes with the
/// involution `mirror` on the unknowns. Each returned eigenvector is
/// exactly even or exactly odd.
pub fn solve_symmetric(
    k: &SparseSymmetricMatrix,
    m: &SparseSymmetricMatrix,
    mirror: &[usize],
    count: usize,
    opts: &SolverOptions,
) -> Result<SpectrumReport, EigError> {
    check_input(k, m, count)?;
    if mirror.len() != k.dim || mirror.iter().enumerate().any(|(i, &j)| j >= k.dim || mirror[j] != i) {
        return Err(EigError::Invalid("mirror map is not an involution on the unknowns"));
    }
    let mut raw = Vec::new();
    let mut iterations = 0;
    for odd in [false, true] {
        let block = Block::build(mirror, odd);
        if block.cols.is_empty() {
            continue;
        }
        let kb = block.project(k);
        let mb = block.project(m);
        let r = subspace::smallest(&kb, &mb, count.min(kb.dim), opts)?;
        iterations = iterations.max(r.iterations);
        for (lambda, y) in r.values.into_iter().zip(r.vectors) {
            raw.push((lambda, block.lift(&y, k.dim)));
        }
    }
    if raw.len() < count {
        return Err(EigError::Invalid("fewer unknowns than requested eigenpairs"));
    }
    report(k, m, raw, count, opts.tol, iterations)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryClass {
    Even,
    Odd,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub class: SymmetryClass,
    /// `‖u − u∘mirror‖_∞ / ‖u‖_∞`.
    pub defect_x: f64,
    /// `‖u + u∘mirror‖_∞ / ‖u‖_∞`.
    pub odd_defect_x: f64,
    /// Parity defect about the y-axis, by point sampling, when requested.
    pub y_parity: Option<(SymmetryClass, f64)>,
}

fn classify(even: f64, odd: f64, tol: f64) -> SymmetryClass {
    if even <= tol {
        SymmetryClass::Even
    } else if odd <= tol {
        SymmetryClass::Odd
    } else {
        SymmetryClass::Mixed
    }
}

/// Parity of a vertex field about the x-axis, and optionally about the
/// y-axis (sampled at reflected vertex positions, for domains symmetric
/// in both axes).
pub fn eigen_symmetry_class(mesh: &Mesh, u: &[f64], check_y: bool) -> SymmetryReport {
    let scale = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut even: f64 = 0.0;
    let mut odd: f64 = 0.0;
    for (i, &j) in mesh.mirror_map.iter().enumerate() {
        even = even.max((u[i] - u[j]).abs());
        odd = odd.max((u[i] + u[j]).abs());
    }
    let (even, odd) = (even / scale, odd / scale);
    let y_parity = check_y.then(|| {
        let mut ye: f64 = 0.0;
        let mut yo: f64 = 0.0;
        let mut hint = 0;
        for (i, p) in mesh.vertices.iter().enumerate() {
            if let Location::Inside { triangle, bary } = mesh.locate_from(Point::new(-p.x, p.y), hint) {
                hint = triangle;
                let t = mesh.triangles[triangle];
                let v = bary[0] * u[t[0]] + bary[1] * u[t[1]] + bary[2] * u[t[2]];
                ye = ye.max((u[i] - v).abs());
                yo = yo.max((u[i] + v).abs());
            }
        }
        let (ye, yo) = (ye / scale, yo / scale);
        (classify(ye, yo, SAMPLED_PARITY_TOL), ye.min(yo))
    });
    SymmetryReport { class: classify(even, odd, PARITY_TOL), defect_x: even, odd_defect_x: odd, y_parity }
}
