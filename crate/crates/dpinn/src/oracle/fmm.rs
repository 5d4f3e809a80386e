//! Fast-marching geodesic distances on triangulated surfaces.
//!
//! First-order front propagation with planar two-point updates. Triangles
//! that are obtuse at the vertex being updated give non-causal stencils, so
//! their wedges are split at setup by unfolding neighboring triangles into
//! the plane until a vertex lands in the admissible sector (virtual edges).
//! A Dijkstra edge-graph pass is available as an independent upper bound.

use crate::mesh::{cross, dot, norm, sub, TriMesh};
use crate::{DpinnError, NodalField, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Geodesic distance field from one source vertex.
#[derive(Debug, Clone)]
pub struct GeodesicField {
    pub source: usize,
    pub distances: NodalField,
}

impl GeodesicField {
    pub fn max_distance(&self) -> f64 {
        self.distances.iter().fold(0.0f64, |a, &b| a.max(b))
    }
}

/// Two support points of a planar update stencil for one vertex, stored in
/// local 2-D coordinates with the vertex at the origin.
#[derive(Debug, Clone, Copy)]
struct Support {
    p1: [f64; 2],
    v1: usize,
    p2: [f64; 2],
    v2: usize,
}

struct Stencils {
    /// per-vertex update supports
    supports: Vec<Vec<Support>>,
    /// vertex -> (center vertex, support slot) pairs it feeds
    feeds: Vec<Vec<usize>>,
}

const UNFOLD_DEPTH: usize = 12;

fn planar_coords(c: [f64; 3], a: [f64; 3], b: [f64; 3]) -> ([f64; 2], [f64; 2]) {
    let e1 = sub(a, c);
    let e2 = sub(b, c);
    let u = {
        let n = norm(e1);
        [e1[0] / n, e1[1] / n, e1[2] / n]
    };
    let w = cross(e1, e2);
    let wn = norm(w);
    let w = [w[0] / wn, w[1] / wn, w[2] / wn];
    let v = cross(w, u);
    (
        [dot(e1, u), 0.0],
        [dot(e2, u), dot(e2, v)],
    )
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// 2-D position of the triangle vertex opposite edge (pa, pb), on the far
/// side from the origin-side triangle, given its mesh distances to a and b.
fn unfold_point(pa: [f64; 2], pb: [f64; 2], da: f64, db: f64) -> Option<[f64; 2]> {
    let ex = [pb[0] - pa[0], pb[1] - pa[1]];
    let l = dot2(ex, ex).sqrt();
    if l < 1e-300 {
        return None;
    }
    let ux = [ex[0] / l, ex[1] / l];
    // component along the edge and offset from it
    let t = (da * da - db * db + l * l) / (2.0 * l);
    let h2 = da * da - t * t;
    if h2 < 0.0 {
        return None;
    }
    let h = h2.sqrt();
    // far side: the origin-side triangle lies toward -normal; put the new
    // vertex on the opposite side of the edge from the origin.
    let n = [-ux[1], ux[0]];
    let base = [pa[0] + t * ux[0], pa[1] + t * ux[1]];
    let cand1 = [base[0] + h * n[0], base[1] + h * n[1]];
    let cand2 = [base[0] - h * n[0], base[1] - h * n[1]];
    // The origin is at (0,0): pick the candidate on the other side of line (pa,pb).
    let side_origin = cross2(ex, [-pa[0], -pa[1]]);
    let side1 = cross2(ex, [cand1[0] - pa[0], cand1[1] - pa[1]]);
    if side1 * side_origin <= 0.0 {
        Some(cand1)
    } else if cross2(ex, [cand2[0] - pa[0], cand2[1] - pa[1]]) * side_origin <= 0.0 {
        Some(cand2)
    } else {
        None
    }
}

fn edge_lengths(mesh: &TriMesh, a: usize, b: usize) -> f64 {
    norm(sub(mesh.vertex(a), mesh.vertex(b)))
}

/// Build update stencils, splitting wedges that are obtuse at the center.
fn build_stencils(mesh: &TriMesh) -> Stencils {
    let n = mesh.vertex_count();
    // adjacency: edge -> opposite vertex per triangle
    use std::collections::HashMap;
    let mut opposite: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for tri in mesh.triangles() {
        for k in 0..3 {
            let (a, b, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let key = crate::mesh::ordered(a, b);
            opposite.entry(key).or_default().push(c);
        }
    }
    let other_side = |a: usize, b: usize, c: usize| -> Option<usize> {
        opposite
            .get(&crate::mesh::ordered(a, b))?
            .iter()
            .copied()
            .find(|&v| v != c)
    };

    let mut supports: Vec<Vec<Support>> = vec![Vec::new(); n];
    for tri in mesh.triangles() {
        for k in 0..3 {
            let (c, a, b) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let (pa, pb) = planar_coords(mesh.vertex(c), mesh.vertex(a), mesh.vertex(b));
            if dot2(pa, pb) >= 0.0 {
                supports[c].push(Support {
                    p1: pa,
                    v1: a,
                    p2: pb,
                    v2: b,
                });
                continue;
            }
            // Obtuse at c: unfold across (a, b) until a vertex direction
            // lies within 90 degrees of both wedge edges. Directions are
            // tracked as signed angles from pa; the admissible sector is
            // [phi - pi/2, pi/2] where phi = angle(pa, pb).
            let orient = cross2(pa, pb).signum();
            let angle_of = |p: [f64; 2]| -> f64 {
                (orient * cross2(pa, p)).atan2(dot2(pa, p))
            };
            let phi = angle_of(pb);
            let (lo, hi) = (phi - std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
            let mut found = None;
            let mut queue = std::collections::VecDeque::new();
            // (2-D coords + mesh ids of the edge, vertex on the near side, depth)
            queue.push_back((pa, a, pb, b, c, 0usize));
            while let Some((qa, va, qb, vb, from, depth)) = queue.pop_front() {
                if depth >= UNFOLD_DEPTH || found.is_some() {
                    continue;
                }
                let Some(vd) = other_side(va, vb, from) else { continue };
                let da = edge_lengths(mesh, va, vd);
                let db = edge_lengths(mesh, vb, vd);
                let Some(pd) = unfold_point(qa, qb, da, db) else { continue };
                let th = angle_of(pd);
                if th >= lo && th <= hi {
                    found = Some((pd, vd));
                } else {
                    // Descend only into sub-edges whose angular span still
                    // covers part of the admissible sector.
                    let (ta, tb) = (angle_of(qa), angle_of(qb));
                    if ta.max(th) >= lo && ta.min(th) <= hi {
                        queue.push_back((qa, va, pd, vd, vb, depth + 1));
                    }
                    if th.max(tb) >= lo && th.min(tb) <= hi {
                        queue.push_back((pd, vd, qb, vb, va, depth + 1));
                    }
                }
            }
            match found {
                Some((pd, vd)) => {
                    supports[c].push(Support {
                        p1: pa,
                        v1: a,
                        p2: pd,
                        v2: vd,
                    });
                    supports[c].push(Support {
                        p1: pd,
                        v1: vd,
                        p2: pb,
                        v2: b,
                    });
                }
                None => supports[c].push(Support {
                    p1: pa,
                    v1: a,
                    p2: pb,
                    v2: b,
                }),
            }
        }
    }

    let mut feeds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, sups) in supports.iter().enumerate() {
        for s in sups {
            feeds[s.v1].push(c);
            feeds[s.v2].push(c);
        }
    }
    for f in &mut feeds {
        f.sort_unstable();
        f.dedup();
    }
    Stencils { supports, feeds }
}

/// Two-point planar Eikonal update: distance at the origin from supports at
/// p1, p2 with values d1, d2, or `None` when the stencil is non-causal.
fn planar_update(p1: [f64; 2], d1: f64, p2: [f64; 2], d2: f64) -> Option<f64> {
    // Gram matrix of the support points and its inverse.
    let g11 = dot2(p1, p1);
    let g12 = dot2(p1, p2);
    let g22 = dot2(p2, p2);
    let det = g11 * g22 - g12 * g12;
    if det <= 1e-300 {
        return None;
    }
    let s11 = g22 / det;
    let s12 = -g12 / det;
    let s22 = g11 / det;
    let a = s11 + 2.0 * s12 + s22;
    let b = s11 * d1 + s12 * (d1 + d2) + s22 * d2;
    let c = s11 * d1 * d1 + 2.0 * s12 * d1 * d2 + s22 * d2 * d2 - 1.0;
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let t = (b + disc.sqrt()) / a;
    if t < d1.max(d2) {
        return None;
    }
    // Monotone causal update: dt/dd_i >= 0 <=> [S (d - t 1)]_i <= 0.
    let r1 = d1 - t;
    let r2 = d2 - t;
    let m1 = s11 * r1 + s12 * r2;
    let m2 = s12 * r1 + s22 * r2;
    if m1 > 1e-12 || m2 > 1e-12 {
        return None;
    }
    Some(t)
}

/// First-order fast-marching geodesic distance from `source`.
pub fn geodesic_field(mesh: &TriMesh, source: usize) -> Result<GeodesicField> {
    if source >= mesh.vertex_count() {
        return Err(DpinnError::InvalidArgument(format!(
            "source vertex {source} out of range {}",
            mesh.vertex_count()
        )));
    }
    let stencils = build_stencils(mesh);
    let n = mesh.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut known = vec![false; n];

    #[derive(PartialEq)]
    struct Item {
        d: f64,
        v: usize,
    }
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Item {
        fn cmp(&self, other: &Self) -> Ordering {
            other.d.total_cmp(&self.d) // min-heap
        }
    }

    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Item { d: 0.0, v: source });

    // Direct edge seeding around the source keeps the first ring exact.
    let adjacency = mesh.vertex_adjacency();

    while let Some(Item { d, v }) = heap.pop() {
        if known[v] || d > dist[v] {
            continue;
        }
        known[v] = true;

        let touch = |c: usize, heap: &mut BinaryHeap<Item>, dist: &mut Vec<f64>| {
            if known[c] {
                return;
            }
            let mut best = dist[c];
            for s in &stencils.supports[c] {
                let (k1, k2) = (known[s.v1], known[s.v2]);
                if k1 && k2 {
                    if let Some(t) = planar_update(s.p1, dist[s.v1], s.p2, dist[s.v2]) {
                        best = best.min(t);
                    }
                }
                if k1 {
                    best = best.min(dist[s.v1] + dot2(s.p1, s.p1).sqrt());
                }
                if k2 {
                    best = best.min(dist[s.v2] + dot2(s.p2, s.p2).sqrt());
                }
            }
            if best < dist[c] {
                dist[c] = best;
                heap.push(Item { d: best, v: c });
            }
        };

        for &c in &stencils.feeds[v] {
            touch(c, &mut heap, &mut dist);
        }
        // Also refresh plain edge neighbors (covers boundary vertices whose
        // stencils may be one-sided).
        for &c in &adjacency[v] {
            touch(c, &mut heap, &mut dist);
        }
    }

    if dist.iter().any(|d| !d.is_finite()) {
        return Err(DpinnError::Disconnected { components: 2 });
    }
    Ok(GeodesicField {
        source,
        distances: dist,
    })
}

/// Edge-graph shortest-path distances (upper bound on the geodesic field).
pub fn dijkstra_distance(mesh: &TriMesh, source: usize) -> NodalField {
    let n = mesh.vertex_count();
    let adj = mesh.vertex_adjacency();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;

    #[derive(PartialEq)]
    struct Item {
        d: f64,
        v: usize,
    }
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Item {
        fn cmp(&self, other: &Self) -> Ordering {
            other.d.total_cmp(&self.d)
        }
    }
    let mut heap = BinaryHeap::new();
    heap.push(Item { d: 0.0, v: source });
    while let Some(Item { d, v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &w in &adj[v] {
            let cand = d + edge_lengths(mesh, v, w);
            if cand < dist[w] {
                dist[w] = cand;
                heap.push(Item { d: cand, v: w });
            }
        }
    }
    dist
}
