//! Linear (P1) finite elements for the Dirichlet Laplacian.

mod sparse;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::mesh::Mesh;

pub use sparse::SparseSymmetricMatrix;

/// Smallest element area accepted by the assembly.
pub const MIN_ELEMENT_AREA: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("element {triangle} has area {area:e}")]
    DegenerateElement { triangle: usize, area: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Bijection between interior vertices and reduced unknowns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofMap {
    /// Reduced index of each mesh vertex, `None` on the Dirichlet boundary.
    pub dof_of_vertex: Vec<Option<usize>>,
    /// Mesh vertex of each reduced index.
    pub vertex_of_dof: Vec<usize>,
    pub boundary: Vec<usize>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let mut dof_of_vertex = vec![None; mesh.n_vertices()];
        let mut vertex_of_dof = Vec::new();
        let mut boundary = Vec::new();
        for (v, f) in mesh.vertex_flags.iter().enumerate() {
            if f.is_boundary() {
                boundary.push(v);
            } else {
                dof_of_vertex[v] = Some(vertex_of_dof.len());
                vertex_of_dof.push(v);
            }
        }
        DofMap { dof_of_vertex, vertex_of_dof, boundary }
    }

    pub fn n_dofs(&self) -> usize {
        self.vertex_of_dof.len()
    }

    /// Extend reduced coefficients by zero to all vertices.
    pub fn scatter(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dof_of_vertex.len()];
        for (d, &v) in self.vertex_of_dof.iter().enumerate() {
            out[v] = x[d];
        }
        out
    }

    /// Restrict a vertex field to the interior unknowns.
    pub fn gather(&self, f: &[f64]) -> Vec<f64> {
        self.vertex_of_dof.iter().map(|&v| f[v]).collect()
    }

    /// The mesh reflection expressed on reduced indices.
    pub fn mirror(&self, mesh: &Mesh) -> Vec<usize> {
        self.vertex_of_dof
            .iter()
            .map(|&v| self.dof_of_vertex[mesh.mirror_map[v]].expect("mirror of an interior vertex is interior"))
            .collect()
    }
}

/// Deliberate assembly defects, used to check that the validation suite
/// notices a broken discretization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    #[default]
    None,
    /// Drop the off-diagonal entries of the element mass matrix.
    MassDiagonalOnly,
}

/// Twice the signed area of a triangle.
fn det(p: &[Point; 3]) -> f64 {
    (p[1] - p[0]).cross(p[2] - p[0])
}

/// Element stiffness `∫ ∇λ_i · ∇λ_j`.
pub fn local_stiffness(p: &[Point; 3]) -> [[f64; 3]; 3] {
    let d = det(p);
    // edge opposite vertex i, rotated: ∇λ_i = rot(e_i) / d
    let e = [p[2] - p[1], p[0] - p[2], p[1] - p[0]];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = e[i].dot(e[j]) / (2.0 * d);
        }
    }
    k
}

/// Element mass `∫ λ_i λ_j`.
pub fn local_mass(p: &[Point; 3]) -> [[f64; 3]; 3] {
    let a = 0.5 * det(p);
    let mut m = [[a / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = a / 6.0;
    }
    m
}

/// Stiffness and mass over all vertices, before the Dirichlet reduction.
pub fn assemble_full(mesh: &Mesh) -> Result<(SparseSymmetricMatrix, SparseSymmetricMatrix), FemError> {
    let n = mesh.n_vertices();
    let (kt, mt) = element_triplets(mesh, |v| Some(v), Fault::None)?;
    Ok((SparseSymmetricMatrix::from_triplets(n, &kt), SparseSymmetricMatrix::from_triplets(n, &mt)))
}

/// Reduced stiffness and mass over interior vertices.
pub fn assemble(mesh: &Mesh) -> Result<(SparseSymmetricMatrix, SparseSymmetricMatrix, DofMap), FemError> {
    assemble_with(mesh, Fault::None)
}

pub fn assemble_with(
    mesh: &Mesh,
    fault: Fault,
) -> Result<(SparseSymmetricMatrix, SparseSymmetricMatrix, DofMap), FemError> {
    let dofs = DofMap::new(mesh);
    let (kt, mt) = element_triplets(mesh, |v| dofs.dof_of_vertex[v], fault)?;
    let n = dofs.n_dofs();
    Ok((SparseSymmetricMatrix::from_triplets(n, &kt), SparseSymmetricMatrix::from_triplets(n, &mt), dofs))
}

type Triplets = Vec<(usize, usize, f64)>;

fn element_triplets(
    mesh: &Mesh,
    index: impl Fn(usize) -> Option<usize>,
    fault: Fault,
) -> Result<(Triplets, Triplets), FemError> {
    let mut kt = Vec::with_capacity(9 * mesh.n_triangles());
    let mut mt = Vec::with_capacity(9 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = mesh.corners(t);
        let area = 0.5 * det(&p);
        if !(area >= MIN_ELEMENT_AREA) {
            return Err(FemError::DegenerateElement { triangle: t, area });
        }
        let k = local_stiffness(&p);
        let m = local_mass(&p);
        for a in 0..3 {
            let Some(i) = index(tri[a]) else { continue };
            for b in 0..3 {
                let Some(j) = index(tri[b]) else { continue };
                kt.push((i, j, k[a][b]));
                if a == b || fault != Fault::MassDiagonalOnly {
                    mt.push((i, j, m[a][b]));
                }
            }
        }
    }
    Ok((kt, mt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> [Point; 3] {
        [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]
    }

    #[test]
    fn unit_triangle_stiffness() {
        let k = local_stiffness(&unit());
        let want = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unit_triangle_mass() {
        let m = local_mass(&unit());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 / 24.0 } else { 1.0 / 24.0 };
                assert!((m[i][j] - want).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn matvec_examples() {
        let k = local_stiffness(&unit());
        let m = local_mass(&unit());
        let mut kt = Vec::new();
        let mut mt = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                kt.push((i, j, k[i][j]));
                mt.push((i, j, m[i][j]));
            }
        }
        let kk = SparseSymmetricMatrix::from_triplets(3, &kt);
        let mm = SparseSymmetricMatrix::from_triplets(3, &mt);
        assert!(kk.symmetric && mm.symmetric);
        let ones = [1.0; 3];
        for v in kk.matvec(&ones).unwrap() {
            assert!(v.abs() < 1e-15);
        }
        for v in mm.matvec(&ones).unwrap() {
            assert!((v - 1.0 / 6.0).abs() < 1e-16);
        }
        assert_eq!(SparseSymmetricMatrix::identity(3).matvec(&[1.0, -2.0, 3.5]).unwrap(), vec![1.0, -2.0, 3.5]);
        assert_eq!(
            kk.matvec(&[1.0]),
            Err(FemError::DimensionMismatch { expected: 3, found: 1 })
        );
    }

    #[test]
    fn explicit_zeros_dropped() {
        let m = SparseSymmetricMatrix::from_triplets(2, &[(0, 1, 1.0), (0, 1, -1.0), (1, 0, 0.0), (0, 0, 0.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }
}
