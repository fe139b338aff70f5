//! Conforming, exactly mirror-symmetric triangulations of symmetric
//! domains, built on the upper half and reflected across the x-axis.

mod cdt;
mod generate;
mod locate;
mod refine;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::{LoopTag, Point, Segment};

pub use generate::{generate, SizingSpec};
pub use locate::Location;
pub use refine::{refine, Refinement};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("mesh quality not reached: {0}")]
    Quality(String),
    #[error("handle not resolved: {0}")]
    Resolution(String),
    #[error("marking is not mirror-closed: triangle {triangle} is marked but its mirror image is not")]
    AsymmetricMarking { triangle: usize },
    #[error("invalid mesh: {0}")]
    Invalid(String),
}

/// Boundary and axis membership of a vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexFlag {
    /// Boundary loop the vertex lies on, if any.
    pub boundary: Option<LoopTag>,
    pub on_axis: bool,
}

impl VertexFlag {
    pub fn is_boundary(&self) -> bool {
        self.boundary.is_some()
    }
}

/// A boundary edge oriented with the domain on its left.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub tag: LoopTag,
    /// Index into [`Mesh::curves`] of the analytic curve the edge
    /// approximates, when known.
    pub curve: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// CCW vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub vertex_flags: Vec<VertexFlag>,
    /// Involution pairing each vertex with its reflection.
    pub mirror_map: Vec<usize>,
    /// Analytic boundary curves referenced by the boundary edges.
    pub curves: Vec<Segment>,
    /// `neighbors[t][i]` is the triangle across the edge opposite vertex
    /// `i`, or `usize::MAX` on the boundary.
    pub neighbors: Vec<[usize; 3]>,
}

pub const NO_NEIGHBOR: usize = usize::MAX;

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Key identifying a coordinate pair bitwise, with `-0.0` folded to `0.0`.
pub(crate) fn point_bits(p: Point) -> (u64, u64) {
    let n = |v: f64| if v == 0.0 { 0u64 } else { v.to_bits() };
    (n(p.x), n(p.y))
}

impl Mesh {
    /// Assemble a mesh from raw arrays, deriving flags, the mirror map and
    /// adjacency. Fails if the mesh is not mirror-symmetric.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        curves: Vec<Segment>,
    ) -> Result<Mesh, MeshError> {
        let n = vertices.len();
        for t in &triangles {
            if t.iter().any(|&v| v >= n) {
                return Err(MeshError::Invalid(String::from("triangle references a missing vertex")));
            }
        }
        let mut flags = alloc::vec![VertexFlag::default(); n];
        for (i, p) in vertices.iter().enumerate() {
            flags[i].on_axis = p.y == 0.0;
        }
        for e in &boundary_edges {
            if e.v[0] >= n || e.v[1] >= n {
                return Err(MeshError::Invalid(String::from("boundary edge references a missing vertex")));
            }
            for &v in &e.v {
                flags[v].boundary = Some(e.tag);
            }
        }
        let mut index: BTreeMap<(u64, u64), usize> = BTreeMap::new();
        for (i, p) in vertices.iter().enumerate() {
            if index.insert(point_bits(*p), i).is_some() {
                return Err(MeshError::Invalid(alloc::format!("duplicate vertex {i}")));
            }
        }
        let mut mirror_map = Vec::with_capacity(n);
        for p in &vertices {
            match index.get(&point_bits(p.mirror())) {
                Some(&j) => mirror_map.push(j),
                None => {
                    return Err(MeshError::Invalid(alloc::format!(
                        "vertex ({}, {}) has no mirror image",
                        p.x,
                        p.y
                    )))
                }
            }
        }
        let neighbors = compute_neighbors(&triangles)?;
        Ok(Mesh { vertices, triangles, boundary_edges, vertex_flags: flags, mirror_map, curves, neighbors })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * (b - a).cross(c - a)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Smallest interior angle of triangle `t`, in radians.
    pub fn min_angle_of(&self, t: usize) -> f64 {
        let p = self.corners(t);
        let mut best = f64::INFINITY;
        for i in 0..3 {
            let a = p[(i + 1) % 3] - p[i];
            let b = p[(i + 2) % 3] - p[i];
            best = best.min(a.cross(b).abs().atan2(a.dot(b)));
        }
        best
    }

    pub fn min_angle(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.min_angle_of(t)).fold(f64::INFINITY, f64::min)
    }

    pub fn longest_edge(&self, t: usize) -> f64 {
        let p = self.corners(t);
        (0..3).map(|i| p[i].dist(p[(i + 1) % 3])).fold(0.0, f64::max)
    }

    pub fn max_edge(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.longest_edge(t)).fold(0.0, f64::max)
    }

    /// Unique edges with the number of triangles sharing each.
    pub fn edges(&self) -> BTreeMap<(usize, usize), usize> {
        let mut m = BTreeMap::new();
        for t in &self.triangles {
            for i in 0..3 {
                *m.entry(edge_key(t[i], t[(i + 1) % 3])).or_insert(0) += 1;
            }
        }
        m
    }

    /// Mirror image of each triangle, as a triangle index.
    pub fn triangle_mirror(&self) -> Result<Vec<usize>, MeshError> {
        let mut index = BTreeMap::new();
        for (i, t) in self.triangles.iter().enumerate() {
            let mut k = *t;
            k.sort_unstable();
            index.insert(k, i);
        }
        self.triangles
            .iter()
            .map(|t| {
                let mut k = [self.mirror_map[t[0]], self.mirror_map[t[1]], self.mirror_map[t[2]]];
                k.sort_unstable();
                index.get(&k).copied().ok_or_else(|| MeshError::Invalid(String::from("triangle without mirror image")))
            })
            .collect()
    }

    /// Check positivity, conformity, boundary consistency, exact mirror
    /// symmetry and the minimum angle (radians).
    pub fn check(&self, min_angle: f64) -> Result<(), MeshError> {
        for t in 0..self.triangles.len() {
            if !(self.triangle_area(t) > 0.0) {
                return Err(MeshError::Invalid(alloc::format!("triangle {t} has nonpositive area")));
            }
        }
        let edges = self.edges();
        let mut bset = BTreeMap::new();
        for e in &self.boundary_edges {
            bset.insert(edge_key(e.v[0], e.v[1]), ());
        }
        for (e, &c) in &edges {
            let is_b = bset.contains_key(e);
            if c > 2 || (c == 1) != is_b {
                return Err(MeshError::Invalid(alloc::format!(
                    "edge ({}, {}) shared by {c} triangles (boundary: {is_b})",
                    e.0,
                    e.1
                )));
            }
        }
        if bset.len() != self.boundary_edges.len() || bset.keys().any(|k| !edges.contains_key(k)) {
            return Err(MeshError::Invalid(String::from("boundary edge list does not match the mesh")));
        }
        let mut directed = BTreeMap::new();
        for t in &self.triangles {
            for i in 0..3 {
                directed.insert((t[i], t[(i + 1) % 3]), ());
            }
        }
        for e in &self.boundary_edges {
            // domain on the left: some triangle contains the edge in CCW order
            if !directed.contains_key(&(e.v[0], e.v[1])) {
                return Err(MeshError::Invalid(String::from("boundary edge not oriented with the domain on its left")));
            }
        }
        for (i, &j) in self.mirror_map.iter().enumerate() {
            if self.mirror_map[j] != i {
                return Err(MeshError::Invalid(String::from("mirror map is not an involution")));
            }
            let (p, q) = (self.vertices[i], self.vertices[j]);
            let ok = p.x.to_bits() == q.x.to_bits() && (p.y == -q.y) && (p.y == 0.0 || p.y.to_bits() == (-q.y).to_bits());
            if !ok {
                return Err(MeshError::Invalid(alloc::format!("vertex {i} and its mirror {j} are not reflections")));
            }
        }
        self.triangle_mirror()?;
        let m = self.min_angle();
        if m < min_angle {
            return Err(MeshError::Quality(alloc::format!(
                "minimum angle {:.3} deg below {:.3} deg",
                m.to_degrees(),
                min_angle.to_degrees()
            )));
        }
        Ok(())
    }

    /// SHA-256 over the vertex coordinates and triangles, as hex.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.vertices.len() as u64).to_le_bytes());
        for p in &self.vertices {
            h.update(p.x.to_bits().to_le_bytes());
            h.update(p.y.to_bits().to_le_bytes());
        }
        h.update((self.triangles.len() as u64).to_le_bytes());
        for t in &self.triangles {
            for &v in t {
                h.update((v as u64).to_le_bytes());
            }
        }
        let d = h.finalize();
        let mut s = String::with_capacity(64);
        for b in d.iter() {
            s.push(char::from_digit((b >> 4) as u32, 16).unwrap());
            s.push(char::from_digit((b & 15) as u32, 16).unwrap());
        }
        s
    }

    /// Largest distance from a boundary vertex to the analytic curve of an
    /// incident boundary edge.
    pub fn boundary_fidelity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for e in &self.boundary_edges {
            if let Some(c) = e.curve {
                for &v in &e.v {
                    worst = worst.max(self.curves[c].distance(self.vertices[v]));
                }
            }
        }
        worst
    }
}

pub(crate) fn compute_neighbors(triangles: &[[usize; 3]]) -> Result<Vec<[usize; 3]>, MeshError> {
    let mut first: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    let mut nb = alloc::vec![[NO_NEIGHBOR; 3]; triangles.len()];
    for (t, tri) in triangles.iter().enumerate() {
        for i in 0..3 {
            let k = edge_key(tri[(i + 1) % 3], tri[(i + 2) % 3]);
            match first.get(&k) {
                None => {
                    first.insert(k, (t, i));
                }
                Some(&(s, j)) => {
                    if nb[s][j] != NO_NEIGHBOR {
                        return Err(MeshError::Invalid(alloc::format!("edge ({}, {}) shared by 3+ triangles", k.0, k.1)));
                    }
                    nb[s][j] = t;
                    nb[t][i] = s;
                }
            }
        }
    }
    Ok(nb)
}
