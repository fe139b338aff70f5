//! Plain-text artifacts: meshes, vertex fields, sparse matrices and the
//! per-parameter CSV.
//!
//! Floats are written in the shortest form that parses back to the same
//! bits, so a mesh read back has the same fingerprint as the one written.
//!
//! Mesh format, one section per array, each introduced by its name and
//! length:
//!
//! ```text
//! vertices 4
//! 0.0 1.0
//! ...
//! triangles 2
//! 0 1 2
//! ...
//! boundary_edges 4
//! 1 2 left
//! ...
//! ```
//!
//! Boundary edge tags are `left`, `right` or `single`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use slidenodal_core::fem::SparseSymmetricMatrix;
use slidenodal_core::geometry::{LoopTag, Point};
use slidenodal_core::mesh::{BoundaryEdge, Mesh};
use slidenodal_core::sweep::{label_str, Record};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs { path: String, source: std::io::Error },
    #[error("{path}, line {line}: {msg}")]
    Format { path: String, line: usize, msg: String },
}

pub const CSV_HEADER: &str =
    "t,lambda1,lambda2,lambda3,gap2,label,dist_left,dist_right,sign_changes,nodal_domains,symmetry_defect";

pub fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::Fs { path: path.display().to_string(), source })
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Fs { path: path.display().to_string(), source })
}

pub fn mesh_text(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "vertices {}", mesh.vertices.len());
    for p in &mesh.vertices {
        let _ = writeln!(s, "{:?} {:?}", p.x, p.y);
    }
    let _ = writeln!(s, "triangles {}", mesh.triangles.len());
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "boundary_edges {}", mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let _ = writeln!(s, "{} {} {}", e.v[0], e.v[1], e.tag.as_str());
    }
    s
}

/// Line-oriented reader that reports positions.
struct Lines<'a> {
    path: &'a str,
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> IoError {
        IoError::Format { path: self.path.to_string(), line: self.line, msg: msg.into() }
    }

    fn next_fields(&mut self) -> Result<Vec<&'a str>, IoError> {
        loop {
            let (i, l) = self.it.next().ok_or_else(|| self.err("unexpected end of file"))?;
            self.line = i + 1;
            let l = l.trim();
            if !l.is_empty() && !l.starts_with('#') {
                return Ok(l.split_whitespace().collect());
            }
        }
    }

    fn header(&mut self, name: &str) -> Result<usize, IoError> {
        let f = self.next_fields()?;
        match f.as_slice() {
            [n, c] if *n == name => c.parse().map_err(|_| self.err(format!("bad count `{c}`"))),
            _ => Err(self.err(format!("expected `{name} <count>`"))),
        }
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T, IoError> {
        s.parse().map_err(|_| self.err(format!("cannot parse `{s}`")))
    }
}

pub fn parse_mesh(text: &str, path: &str) -> Result<Mesh, IoError> {
    let mut r = Lines { path, it: text.lines().enumerate(), line: 0 };
    let nv = r.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let f = r.next_fields()?;
        if f.len() != 2 {
            return Err(r.err("expected `x y`"));
        }
        vertices.push(Point::new(r.parse(f[0])?, r.parse(f[1])?));
    }
    let nt = r.header("triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let f = r.next_fields()?;
        if f.len() != 3 {
            return Err(r.err("expected `i j k`"));
        }
        triangles.push([r.parse(f[0])?, r.parse(f[1])?, r.parse(f[2])?]);
    }
    let ne = r.header("boundary_edges")?;
    let mut edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let f = r.next_fields()?;
        if f.len() != 3 {
            return Err(r.err("expected `i j tag`"));
        }
        let tag = match f[2] {
            "left" => LoopTag::Left,
            "right" => LoopTag::Right,
            "single" => LoopTag::Single,
            o => return Err(r.err(format!("unknown loop tag `{o}`"))),
        };
        edges.push(BoundaryEdge { v: [r.parse(f[0])?, r.parse(f[1])?], tag, curve: None });
    }
    Mesh::from_parts(vertices, triangles, edges, Vec::new()).map_err(|e| r.err(e.to_string()))
}

pub fn read_mesh(path: &Path) -> Result<Mesh, IoError> {
    parse_mesh(&read_file(path)?, &path.display().to_string())
}

/// One value per line, preceded by the length.
pub fn vector_text(v: &[f64]) -> String {
    let mut s = String::with_capacity(24 * v.len());
    let _ = writeln!(s, "values {}", v.len());
    for x in v {
        let _ = writeln!(s, "{x:?}");
    }
    s
}

pub fn parse_vector(text: &str, path: &str) -> Result<Vec<f64>, IoError> {
    let mut r = Lines { path, it: text.lines().enumerate(), line: 0 };
    let n = r.header("values")?;
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        let f = r.next_fields()?;
        if f.len() != 1 {
            return Err(r.err("expected one value"));
        }
        v.push(r.parse(f[0])?);
    }
    Ok(v)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>, IoError> {
    parse_vector(&read_file(path)?, &path.display().to_string())
}

/// `i j value` for every stored entry, preceded by the dimension.
pub fn triplet_text(a: &SparseSymmetricMatrix) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dim {} nnz {}", a.dim, a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{i} {j} {v:?}");
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

pub fn csv_row(r: &Record) -> String {
    format!(
        "{:?},{:?},{:?},{:?},{:?},{},{},{},{},{},{:?}",
        r.t,
        r.lambda[0],
        r.lambda[1],
        r.lambda[2],
        r.gap2,
        label_str(r.label),
        opt(r.dist_left),
        opt(r.dist_right),
        r.sign_changes,
        r.nodal_domains,
        r.symmetry_defect
    )
}

pub fn csv_text(records: &[Record]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&csv_row(r));
        s.push('\n');
    }
    s
}

pub fn json_text<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| IoError::Format {
        path: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use slidenodal_core::geometry::DomainBoundary;
    use slidenodal_core::mesh::{generate, SizingSpec};

    #[test]
    fn mesh_round_trip_keeps_the_fingerprint() {
        let b = DomainBoundary::annulus(0.0, 1.0, 2.0);
        let m = generate(&b, &SizingSpec { base_edge: 0.2, ..SizingSpec::default() }).unwrap();
        let back = parse_mesh(&mesh_text(&m), "mem").unwrap();
        assert_eq!(back.fingerprint(), m.fingerprint());
        assert_eq!(back.vertex_flags, m.vertex_flags);
        assert_eq!(back.mirror_map, m.mirror_map);
    }

    #[test]
    fn vector_round_trip_is_bitwise() {
        let v = vec![0.1, -1e-300, 1.0 / 3.0, 0.0, -0.0, 6.02e23];
        let back = parse_vector(&vector_text(&v), "mem").unwrap();
        assert!(v.iter().zip(&back).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn truncated_input_names_the_line() {
        let e = parse_vector("values 3\n1.0\n2.0\n", "v.txt").unwrap_err();
        assert!(e.to_string().contains("v.txt"), "{e}");
    }
}
