//! Block inverse iteration with Rayleigh–Ritz extraction.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fem::SparseSymmetricMatrix;

use super::envelope::EnvelopeCholesky;
use super::{EigError, InnerSolver, SolverOptions};

/// Raw eigenpairs of one pencil: ascending values, M-orthonormal vectors
/// and the largest residual seen at exit.
pub(crate) struct RawPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
}

enum Inner {
    Direct(EnvelopeCholesky),
    Pcg { diag: Vec<f64>, max_iters: usize, rtol: f64 },
}

impl Inner {
    fn solve(&self, k: &SparseSymmetricMatrix, b: &[f64], x: &mut [f64], work: &mut Vec<f64>) -> Result<(), EigError> {
        match self {
            Inner::Direct(f) => {
                x.copy_from_slice(b);
                f.solve_in_place(x, work);
                Ok(())
            }
            Inner::Pcg { diag, max_iters, rtol } => pcg(k, diag, b, x, *rtol, *max_iters),
        }
    }
}

/// Jacobi-preconditioned conjugate gradients from a zero start.
pub fn pcg(
    a: &SparseSymmetricMatrix,
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    max_iters: usize,
) -> Result<(), EigError> {
    let n = b.len();
    x.iter_mut().for_each(|v| *v = 0.0);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(());
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for _ in 0..max_iters {
        a.matvec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= rtol * bnorm {
            return Ok(());
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(EigError::InnerSolve { max_iters })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve the dense generalized problem `A y = θ B y`, ascending.
fn dense_pencil(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), EigError> {
    let chol = b.clone().cholesky().ok_or(EigError::NearSingularM)?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or(EigError::NearSingularM)?;
    let c = &linv * a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut v = DMatrix::zeros(a.nrows(), idx.len());
    for (c, &i) in idx.iter().enumerate() {
        v.set_column(c, &eig.eigenvectors.column(i));
    }
    // back to the B-orthonormal basis
    Ok((vals, linv.transpose() * v))
}

fn to_dense(a: &SparseSymmetricMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.dim, a.dim);
    for i in 0..a.dim {
        for (j, v) in a.row(i) {
            d[(i, j)] = v;
        }
    }
    d
}

/// Dense fallback for small pencils.
fn dense_all(k: &SparseSymmetricMatrix, m: &SparseSymmetricMatrix, count: usize) -> Result<RawPairs, EigError> {
    let (vals, v) = dense_pencil(&to_dense(k), &to_dense(m))?;
    if vals.first().is_some_and(|&l| !(l > 0.0)) {
        return Err(EigError::NotPositiveDefinite { pivot: 0 });
    }
    let count = count.min(vals.len());
    let vectors = (0..count).map(|c| v.column(c).iter().copied().collect()).collect();
    Ok(RawPairs { values: vals[..count].to_vec(), vectors, iterations: 0 })
}

/// Pencils up to this size are solved densely.
const DENSE_LIMIT: usize = 64;

/// The `count` smallest eigenpairs of `K x = λ M x`.
pub(crate) fn smallest(
    k: &SparseSymmetricMatrix,
    m: &SparseSymmetricMatrix,
    count: usize,
    opts: &SolverOptions,
) -> Result<RawPairs, EigError> {
    let n = k.dim;
    if n <= DENSE_LIMIT {
        return dense_all(k, m, count);
    }
    let p = (count + opts.extra_vectors).min(n);
    let inner = match opts.inner {
        InnerSolver::Cholesky => Inner::Direct(EnvelopeCholesky::factor(k)?),
        InnerSolver::Pcg { max_iters } => {
            let diag = k.diag();
            if diag.iter().any(|&d| !(d > 0.0)) {
                return Err(EigError::NotPositiveDefinite { pivot: 0 });
            }
            Inner::Pcg { diag, max_iters, rtol: opts.tol / 10.0 }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0).collect())
        .collect();
    let mut y = vec![vec![0.0; n]; p];
    let mut ky = vec![vec![0.0; n]; p];
    let mut my = vec![vec![0.0; n]; p];
    let mut mx = vec![0.0; n];
    let mut work = Vec::new();
    let mut values = vec![0.0; p];
    for it in 1..=opts.max_iters {
        for j in 0..p {
            m.matvec_into(&x[j], &mut mx);
            inner.solve(k, &mx, &mut y[j], &mut work)?;
        }
        for j in 0..p {
            k.matvec_into(&y[j], &mut ky[j]);
            m.matvec_into(&y[j], &mut my[j]);
        }
        let mut a = DMatrix::zeros(p, p);
        let mut b = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let kij = 0.5 * (dot(&y[i], &ky[j]) + dot(&y[j], &ky[i]));
                let mij = 0.5 * (dot(&y[i], &my[j]) + dot(&y[j], &my[i]));
                a[(i, j)] = kij;
                a[(j, i)] = kij;
                b[(i, j)] = mij;
                b[(j, i)] = mij;
            }
        }
        let (theta, c) = dense_pencil(&a, &b)?;
        // Ritz vectors and their residuals from the products already formed
        let mut worst: f64 = 0.0;
        for col in 0..p {
            let xc = &mut x[col];
            xc.iter_mut().for_each(|v| *v = 0.0);
            let mut r = vec![0.0; n];
            for (j, yj) in y.iter().enumerate() {
                let w = c[(j, col)];
                if w == 0.0 {
                    continue;
                }
                for i in 0..n {
                    xc[i] += w * yj[i];
                    r[i] += w * (ky[j][i] - theta[col] * my[j][i]);
                }
            }
            values[col] = theta[col];
            if col < count {
                let res = norm(&r) / theta[col].abs();
                worst = worst.max(res);
            }
        }
        if worst <= opts.tol {
            return Ok(RawPairs { values: values[..count].to_vec(), vectors: x.into_iter().take(count).collect(), iterations: it });
        }
    }
    Err(EigError::NoConvergence { max_iters: opts.max_iters })
}
