//! Triangle meshes: loading, generation, and per-element queries.
//!
//! A [`TriMesh`] is immutable after construction and validated on creation:
//! triangle indices in range, no degenerate elements, manifold edges
//! (every edge borders one or two triangles) and a single connected
//! component. Coordinates are always stored as 3-vectors; planar meshes set
//! z = 0 and `dimension() == 2`.

mod generate;
mod io;

pub use generate::{
    generate_coil, generate_heatsink, generate_sphere, generate_square, CoilSpec, HeatsinkSpec,
};
pub use io::{load_mesh, load_off_str, load_obj_str, write_off, MeshFormat};

use crate::{DpinnError, Result};
use std::collections::{HashMap, HashSet};

/// Area below which a triangle is rejected as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// Immutable triangle mesh (planar or embedded surface).
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    dimension: usize,
}

/// Named boundary parts as vertex-index sets.
///
/// Tags are disjoint except at junction vertices where two parts meet.
#[derive(Debug, Clone, Default)]
pub struct BoundaryTag {
    parts: HashMap<String, Vec<usize>>,
}

impl BoundaryTag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, mut vertices: Vec<usize>) {
        vertices.sort_unstable();
        vertices.dedup();
        self.parts.insert(name.to_string(), vertices);
    }

    /// Sorted vertex indices of a part; empty slice if the tag is absent.
    pub fn part(&self, name: &str) -> &[usize] {
        self.parts.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.parts.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str, vertex: usize) -> bool {
        self.parts
            .get(name)
            .is_some_and(|v| v.binary_search(&vertex).is_ok())
    }
}

impl TriMesh {
    /// Build a mesh, checking all structural invariants.
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>, dimension: usize) -> Result<Self> {
        assert!(dimension == 2 || dimension == 3, "dimension must be 2 or 3");
        let mesh = Self {
            vertices,
            triangles,
            dimension,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            for &i in tri {
                if i >= n {
                    return Err(DpinnError::IndexOutOfRange {
                        triangle: t,
                        index: i,
                        count: n,
                    });
                }
            }
            let area = self.triangle_area(t);
            if !(area > DEGENERATE_AREA) {
                return Err(DpinnError::DegenerateTriangle { triangle: t, area });
            }
        }
        // Manifold edges: each edge borders 1 or 2 triangles.
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = ordered(tri[k], tri[(k + 1) % 3]);
                *edge_count.entry((a, b)).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &edge_count {
            if count > 2 {
                return Err(DpinnError::NonManifoldEdge { a, b, count });
            }
        }
        // Single connected component over the vertex graph.
        if n > 0 {
            let adj = self.vertex_adjacency();
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut reached = 1usize;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        reached += 1;
                        stack.push(w);
                    }
                }
            }
            if reached != n {
                // Count components for the error message.
                let mut comp = 0usize;
                let mut seen = vec![false; n];
                for s in 0..n {
                    if seen[s] {
                        continue;
                    }
                    comp += 1;
                    let mut stack = vec![s];
                    seen[s] = true;
                    while let Some(v) = stack.pop() {
                        for &w in &adj[v] {
                            if !seen[w] {
                                seen[w] = true;
                                stack.push(w);
                            }
                        }
                    }
                }
                return Err(DpinnError::Disconnected { components: comp });
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertex(&self, i: usize) -> [f64; 3] {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Vertex-to-vertex adjacency over triangle edges.
    pub fn vertex_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Triangles incident to each vertex.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                inc[v].push(t);
            }
        }
        inc
    }

    /// Edges with exactly one adjacent triangle, as sorted (a, b) pairs.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let e = ordered(tri[k], tri[(k + 1) % 3]);
                *edge_count.entry(e).or_insert(0) += 1;
            }
        }
        let mut edges: Vec<_> = edge_count
            .into_iter()
            .filter_map(|(e, c)| (c == 1).then_some(e))
            .collect();
        edges.sort_unstable();
        edges
    }

    /// Vertices incident to an edge with exactly one adjacent triangle.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut set = HashSet::new();
        for (a, b) in self.boundary_edges() {
            set.insert(a);
            set.insert(b);
        }
        let mut v: Vec<_> = set.into_iter().collect();
        v.sort_unstable();
        v
    }

    /// Unsigned area of triangle `t`.
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [i, j, k] = self.triangles[t];
        let e1 = sub(self.vertices[j], self.vertices[i]);
        let e2 = sub(self.vertices[k], self.vertices[i]);
        0.5 * norm(cross(e1, e2))
    }

    /// Area, centroid, and unit normal of triangle `t`.
    ///
    /// For planar meshes the normal is (0, 0, ±1) by winding orientation.
    pub fn triangle_geometry(&self, t: usize) -> (f64, [f64; 3], [f64; 3]) {
        let [i, j, k] = self.triangles[t];
        let (a, b, c) = (self.vertices[i], self.vertices[j], self.vertices[k]);
        let n = cross(sub(b, a), sub(c, a));
        let len = norm(n);
        let area = 0.5 * len;
        let centroid = [
            (a[0] + b[0] + c[0]) / 3.0,
            (a[1] + b[1] + c[1]) / 3.0,
            (a[2] + b[2] + c[2]) / 3.0,
        ];
        let normal = [n[0] / len, n[1] / len, n[2] / len];
        (area, centroid, normal)
    }

    /// Total surface area.
    pub fn total_area(&self) -> f64 {
        (0..self.triangle_count()).map(|t| self.triangle_area(t)).sum()
    }

    /// Number of distinct edges.
    pub fn edge_count(&self) -> usize {
        let mut edges = HashSet::new();
        for tri in &self.triangles {
            for k in 0..3 {
                edges.insert(ordered(tri[k], tri[(k + 1) % 3]));
            }
        }
        edges.len()
    }

    /// Mean edge length over all distinct edges.
    pub fn mean_edge_length(&self) -> f64 {
        let mut edges = HashSet::new();
        for tri in &self.triangles {
            for k in 0..3 {
                edges.insert(ordered(tri[k], tri[(k + 1) % 3]));
            }
        }
        let total: f64 = edges
            .iter()
            .map(|&(a, b)| norm(sub(self.vertices[b], self.vertices[a])))
            .sum();
        total / edges.len() as f64
    }

    /// Euclidean bounding-box half-diagonal and center, used to normalize
    /// coordinate inputs for networks.
    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for d in 0..3 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        (lo, hi)
    }
}

pub(crate) fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
