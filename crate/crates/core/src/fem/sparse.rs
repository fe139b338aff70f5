use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::FemError;

/// Square sparse matrix in compressed sparse row layout. Symmetric
/// matrices store both triangles of the pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseSymmetricMatrix {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
    pub symmetric: bool,
}

impl SparseSymmetricMatrix {
    /// Build from unordered triplets; duplicates are summed in input order
    /// and exact zeros that arise from cancellation are kept only on the
    /// diagonal.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; dim + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..dim {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut tmp = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            tmp[fill[i]] = (j, v);
            fill[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            let row = &mut tmp[counts[i]..counts[i + 1]];
            // stable sort keeps the summation order of duplicates
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut s = 0.0;
                while k < row.len() && row[k].0 == j {
                    s += row[k].1;
                    k += 1;
                }
                if s != 0.0 || i == j {
                    col_idx.push(j);
                    values.push(s);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let mut m = SparseSymmetricMatrix { dim, row_ptr, col_idx, values, symmetric: false };
        m.symmetric = m.is_symmetric();
        m
    }

    pub fn identity(dim: usize) -> Self {
        let t: Vec<_> = (0..dim).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(dim, &t)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), &t)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    /// `A x`, summing each row left to right.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, FemError> {
        if x.len() != self.dim {
            return Err(FemError::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let mut y = vec![0.0; self.dim];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` without the dimension check.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    /// `x · (A y)`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let mut r = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                r += self.values[k] * y[self.col_idx[k]];
            }
            s += xi * r;
        }
        s
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &SparseSymmetricMatrix, c: f64) -> Result<Self, FemError> {
        if other.dim != self.dim {
            return Err(FemError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, c * v)));
        Ok(Self::from_triplets(self.dim, &t))
    }

    /// Entries in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.dim {
            out.extend(self.row(i).map(|(j, v)| (i, j, v)));
        }
        out
    }

    /// Sum of all stored entries.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}
