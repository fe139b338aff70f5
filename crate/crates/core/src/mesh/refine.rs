use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use super::{edge_key, BoundaryEdge, Mesh, MeshError, NO_NEIGHBOR};

/// A refined mesh and, for each new triangle, the triangle it came from.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub mesh: Mesh,
    pub parent: Vec<usize>,
}

/// Ordering key of an edge: length, then the midpoint abscissa and the
/// absolute midpoint ordinate, so that mirror images compare equal.
fn edge_rank(m: &Mesh, a: usize, b: usize) -> (f64, f64, f64) {
    let (p, q) = (m.vertices[a], m.vertices[b]);
    let mid = p.midpoint(q);
    (p.dist(q), mid.x, mid.y.abs())
}

fn longest(m: &Mesh, t: usize) -> usize {
    let tri = m.triangles[t];
    let mut best = 0;
    let mut rank = edge_rank(m, tri[0], tri[1]);
    for i in 1..3 {
        let r = edge_rank(m, tri[i], tri[(i + 1) % 3]);
        if r.partial_cmp(&rank) == Some(core::cmp::Ordering::Greater) {
            best = i;
            rank = r;
        }
    }
    best
}

/// Refine the marked triangles by longest-edge bisection with conforming
/// closure. A triangle with all three edges split is cut into four similar
/// triangles. The marking must be closed under reflection.
pub fn refine(mesh: &Mesh, marked: &[usize]) -> Result<Refinement, MeshError> {
    let nt = mesh.n_triangles();
    let mut is_marked = alloc::vec![false; nt];
    for &t in marked {
        if t >= nt {
            return Err(MeshError::Invalid(alloc::format!("marked triangle {t} does not exist")));
        }
        is_marked[t] = true;
    }
    let tmirror = mesh.triangle_mirror()?;
    for &t in marked {
        if !is_marked[tmirror[t]] {
            return Err(MeshError::AsymmetricMarking { triangle: t });
        }
    }
    if marked.is_empty() {
        return Ok(Refinement { mesh: mesh.clone(), parent: (0..nt).collect() });
    }

    let long: Vec<usize> = (0..nt).map(|t| longest(mesh, t)).collect();
    let tri_edge = |t: usize, i: usize| edge_key(mesh.triangles[t][i], mesh.triangles[t][(i + 1) % 3]);
    let mut split: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    // the triangles sharing an edge, from the adjacency
    let edge_tris = |t: usize, i: usize| -> [usize; 2] {
        // edge i runs from vertex i to i+1 and is opposite vertex i+2
        [t, mesh.neighbors[t][(i + 2) % 3]]
    };
    for t in 0..nt {
        if is_marked[t] {
            let e = tri_edge(t, long[t]);
            if split.insert(e, usize::MAX).is_none() {
                queue.push_back((t, long[t]));
            }
        }
    }
    while let Some((t, i)) = queue.pop_front() {
        for s in edge_tris(t, i) {
            if s == NO_NEIGHBOR {
                continue;
            }
            let e = tri_edge(s, long[s]);
            if !split.contains_key(&e) {
                split.insert(e, usize::MAX);
                queue.push_back((s, long[s]));
            }
        }
    }
    if is_marked.iter().all(|&m| m) {
        // uniform refinement: every edge is split
        for t in 0..nt {
            for i in 0..3 {
                split.entry(tri_edge(t, i)).or_insert(usize::MAX);
            }
        }
    }

    let bmap: BTreeMap<(usize, usize), usize> =
        mesh.boundary_edges.iter().enumerate().map(|(k, e)| (edge_key(e.v[0], e.v[1]), k)).collect();
    let mut verts = mesh.vertices.clone();
    let keys: Vec<(usize, usize)> = split.keys().copied().collect();
    // upper edges first; lower edges reuse the reflection of their image
    for &(a, b) in &keys {
        let (p, q) = (mesh.vertices[a], mesh.vertices[b]);
        if p.y + q.y < 0.0 {
            continue;
        }
        let mut m = match bmap.get(&(a, b)).and_then(|&k| mesh.boundary_edges[k].curve) {
            Some(c) => mesh.curves[c].midpoint_between(p, q),
            None => p.midpoint(q),
        };
        if p.y == 0.0 && q.y == 0.0 {
            m.y = 0.0;
        }
        split.insert((a, b), verts.len());
        verts.push(m);
    }
    for &(a, b) in &keys {
        if split[&(a, b)] != usize::MAX {
            continue;
        }
        let img = edge_key(mesh.mirror_map[a], mesh.mirror_map[b]);
        let v = *split.get(&img).filter(|&&v| v != usize::MAX).ok_or_else(|| {
            MeshError::Invalid(alloc::string::String::from("split set is not closed under reflection"))
        })?;
        let m = verts[v].mirror();
        split.insert((a, b), verts.len());
        verts.push(m);
    }

    let mut tris = Vec::with_capacity(nt + 2 * split.len());
    let mut parent = Vec::with_capacity(tris.capacity());
    for t in 0..nt {
        let tri = mesh.triangles[t];
        let l = long[t];
        let (a, b, c) = (tri[l], tri[(l + 1) % 3], tri[(l + 2) % 3]);
        let mid = |x: usize, y: usize| split.get(&edge_key(x, y)).copied();
        let mut push = |v: [usize; 3]| {
            tris.push(v);
            parent.push(t);
        };
        match (mid(a, b), mid(b, c), mid(c, a)) {
            (None, None, None) => push(tri),
            (Some(m), None, None) => {
                push([a, m, c]);
                push([m, b, c]);
            }
            (Some(m), Some(mbc), None) => {
                push([a, m, c]);
                push([m, b, mbc]);
                push([m, mbc, c]);
            }
            (Some(m), None, Some(mca)) => {
                push([m, b, c]);
                push([a, m, mca]);
                push([mca, m, c]);
            }
            (Some(m), Some(mbc), Some(mca)) => {
                push([a, m, mca]);
                push([m, b, mbc]);
                push([mca, mbc, c]);
                push([m, mbc, mca]);
            }
            _ => {
                return Err(MeshError::Invalid(alloc::string::String::from(
                    "closure left a split edge without its triangle's longest edge",
                )))
            }
        }
    }

    let mut bedges = Vec::with_capacity(mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        match split.get(&edge_key(e.v[0], e.v[1])) {
            Some(&m) => {
                bedges.push(BoundaryEdge { v: [e.v[0], m], ..*e });
                bedges.push(BoundaryEdge { v: [m, e.v[1]], ..*e });
            }
            None => bedges.push(*e),
        }
    }
    let mesh = Mesh::from_parts(verts, tris, bedges, mesh.curves.clone())?;
    Ok(Refinement { mesh, parent })
}
