//! Profile (envelope) Cholesky factorization in reverse Cuthill–McKee
//! order.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::fem::SparseSymmetricMatrix;

use super::EigError;

/// Reverse Cuthill–McKee ordering; `perm[new] = old`.
pub fn rcm(a: &SparseSymmetricMatrix) -> Vec<usize> {
    let n = a.dim;
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).filter(|&(j, _)| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut scratch = vec![usize::MAX; n];
    loop {
        let Some(seed) = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)) else { break };
        let root = peripheral(a, seed, &degree, &mut scratch);
        let start = order.len();
        visited[root] = true;
        order.push(root);
        let mut k = start;
        let mut nbrs = Vec::new();
        while k < order.len() {
            let v = order[k];
            k += 1;
            nbrs.clear();
            nbrs.extend(a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]));
            nbrs.sort_by_key(|&j| (degree[j], j));
            for &j in &nbrs {
                visited[j] = true;
                order.push(j);
            }
        }
    }
    order.reverse();
    order
}

/// Pseudo-peripheral vertex of the component of `seed` (George–Liu).
fn peripheral(a: &SparseSymmetricMatrix, seed: usize, degree: &[usize], level: &mut [usize]) -> usize {
    let mut root = seed;
    let mut ecc = 0;
    loop {
        let (last, depth, visited) = bfs_levels(a, root, level);
        let cand = last.iter().copied().min_by_key(|&v| (degree[v], v)).unwrap();
        for v in visited {
            level[v] = usize::MAX;
        }
        if depth <= ecc {
            return root;
        }
        ecc = depth;
        root = cand;
    }
}

fn bfs_levels(a: &SparseSymmetricMatrix, root: usize, level: &mut [usize]) -> (Vec<usize>, usize, Vec<usize>) {
    let mut q = VecDeque::new();
    let mut seen = vec![root];
    level[root] = 0;
    q.push_back(root);
    let mut depth = 0;
    while let Some(v) = q.pop_front() {
        depth = depth.max(level[v]);
        for (j, _) in a.row(v) {
            if level[j] == usize::MAX {
                level[j] = level[v] + 1;
                seen.push(j);
                q.push_back(j);
            }
        }
    }
    let last = seen.iter().copied().filter(|&v| level[v] == depth).collect();
    (last, depth, seen)
}

/// `A = L Lᵀ` with `L` stored row by row from its first nonzero column.
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    iperm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    l: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &SparseSymmetricMatrix) -> Result<Self, EigError> {
        let n = a.dim;
        let perm = rcm(a);
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in a.row(old) {
                let jn = iperm[j];
                if jn < first[new] {
                    first[new] = jn;
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut l = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                let jn = iperm[j];
                if jn <= new {
                    l[start[new] + jn - first[new]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let si = start[i];
            for j in fi..i {
                let fj = first[j];
                let sj = start[j];
                let lo = fi.max(fj);
                let (ri, rj) = (&l[si + lo - fi..si + j - fi], &l[sj + lo - fj..sj + j - fj]);
                let mut s = 0.0;
                for (x, y) in ri.iter().zip(rj) {
                    s += x * y;
                }
                let d = l[sj + j - fj];
                l[si + j - fi] = (l[si + j - fi] - s) / d;
            }
            let row = &l[si..si + i - fi];
            let s: f64 = row.iter().map(|x| x * x).sum();
            let d = l[si + i - fi] - s;
            if !(d > 0.0) {
                return Err(EigError::NotPositiveDefinite { pivot: i });
            }
            l[si + i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky { perm, iperm, first, start, l })
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.l.len()
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64], work: &mut Vec<f64>) {
        let n = self.perm.len();
        work.clear();
        work.extend(self.perm.iter().map(|&old| b[old]));
        let y = work.as_mut_slice();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let row = &self.l[si..si + i - fi];
            let mut s = y[i];
            for (x, yy) in row.iter().zip(&y[fi..i]) {
                s -= x * yy;
            }
            y[i] = s / self.l[si + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            let xi = y[i] / self.l[si + i - fi];
            y[i] = xi;
            let row = &self.l[si..si + i - fi];
            for (x, yy) in row.iter().zip(y[fi..i].iter_mut()) {
                *yy -= x * xi;
            }
        }
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = y[self.iperm[i]];
        }
    }
}
