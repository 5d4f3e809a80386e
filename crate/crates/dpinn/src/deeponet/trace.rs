//! Geodesic path tracing: explicit-Euler descent of the predicted distance
//! with on-surface walking. Inside a triangle the descent direction is the
//! (constant) negative surface gradient; when a step crosses an edge the
//! remaining motion is rotated into the neighbor's plane (unfolding), so the
//! path stays on the surface without any ambient projection.

use super::{surface_gradient, EncodingGradients, GeodesicNet};
use crate::mesh::{cross, dot, norm, sub, TriMesh};
use crate::pinn::VertexEncoder;
use crate::{DpinnError, Result};
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub points: Vec<[f64; 3]>,
    /// true if the walk entered the termination ball around the target
    pub reached: bool,
}

impl GeodesicPath {
    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| norm(sub(w[1], w[0])))
            .sum()
    }
}

/// Rotate `dir` from the plane of normal `n_from` into the plane of normal
/// `n_to` about their shared axis (Rodrigues); keeps tangential walking
/// directions tangential across edges.
fn rotate_between_planes(dir: [f64; 3], n_from: [f64; 3], n_to: [f64; 3]) -> [f64; 3] {
    let axis = cross(n_from, n_to);
    let s = norm(axis);
    let c = dot(n_from, n_to).clamp(-1.0, 1.0);
    if s < 1e-14 {
        return dir; // coplanar
    }
    let k = [axis[0] / s, axis[1] / s, axis[2] / s];
    let kxd = cross(k, dir);
    let kd = dot(k, dir);
    [
        dir[0] * c + kxd[0] * s + k[0] * kd * (1.0 - c),
        dir[1] * c + kxd[1] * s + k[1] * kd * (1.0 - c),
        dir[2] * c + kxd[2] * s + k[2] * kd * (1.0 - c),
    ]
}

/// Trace from vertex `x1` toward vertex `x2` by descending the predicted
/// distance field `dhat(., x2)`. Terminates inside a ball of radius
/// 1.5x mean edge length around the target, or after `max_steps`.
pub fn trace_geodesic(
    net: &GeodesicNet,
    mesh: &TriMesh,
    encoder: &VertexEncoder,
    x1: usize,
    x2: usize,
    step: f64,
    max_steps: usize,
) -> Result<GeodesicPath> {
    if step <= 0.0 {
        return Err(DpinnError::InvalidArgument("step must be positive".into()));
    }
    let nv = mesh.vertex_count();
    if x1 >= nv || x2 >= nv {
        return Err(DpinnError::InvalidArgument("endpoint out of range".into()));
    }
    if x1 == x2 {
        return Ok(GeodesicPath {
            points: vec![mesh.vertex(x1)],
            reached: true,
        });
    }

    // edge -> adjacent triangles
    let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for k in 0..3 {
            let e = crate::mesh::ordered(tri[k], tri[(k + 1) % 3]);
            edge_tris.entry(e).or_default().push(t);
        }
    }
    let incident = mesh.vertex_triangles();
    let target = mesh.vertex(x2);
    let ball = 1.5 * mesh.mean_edge_length();
    let v2 = encoder.vertex_input(x2);
    let mut enc_grads = EncodingGradients::new(mesh);

    // start in the incident triangle whose descent direction agrees best
    let mut tri = incident[x1][0];
    let mut best = f64::NEG_INFINITY;
    for &t in &incident[x1] {
        let g = surface_gradient(net, mesh, encoder, &mut enc_grads, t, &v2)?;
        let (_, centroid, _) = mesh.triangle_geometry(t);
        let toward = sub(centroid, mesh.vertex(x1));
        let score = -dot(g, toward) / (norm(toward) * norm(g)).max(1e-300);
        if score > best {
            best = score;
            tri = t;
        }
    }

    let mut pos = mesh.vertex(x1);
    let mut points = vec![pos];
    let mut reached = false;

    'outer: for _ in 0..max_steps {
        if norm(sub(target, pos)) <= ball {
            reached = true;
            break;
        }
        let g = surface_gradient(net, mesh, encoder, &mut enc_grads, tri, &v2)?;
        let gn = norm(g);
        if gn < 1e-14 {
            break; // flat prediction, nowhere to go
        }
        let mut dir = [-g[0] / gn, -g[1] / gn, -g[2] / gn];
        let mut remaining = step;

        // walk `remaining` within the surface, crossing edges as needed
        for _ in 0..64 {
            let tri_v = mesh.triangle(tri);
            let p = [
                mesh.vertex(tri_v[0]),
                mesh.vertex(tri_v[1]),
                mesh.vertex(tri_v[2]),
            ];
            let (_, _, n_now) = mesh.triangle_geometry(tri);
            // keep numerical drift out of the plane
            let d_n = dot(dir, n_now);
            dir = [
                dir[0] - d_n * n_now[0],
                dir[1] - d_n * n_now[1],
                dir[2] - d_n * n_now[2],
            ];
            let dn = norm(dir);
            if dn < 1e-14 {
                break 'outer;
            }
            dir = [dir[0] / dn, dir[1] / dn, dir[2] / dn];

            // first edge crossed along `dir`: solve for the smallest
            // positive s where the in-plane edge normal is hit
            let mut s_exit = f64::INFINITY;
            let mut exit_edge = None;
            for k in 0..3 {
                let (a, b) = (p[k], p[(k + 1) % 3]);
                let e = sub(b, a);
                // inward normal of the edge in the triangle plane
                let mut m = cross(n_now, e);
                let other = p[(k + 2) % 3];
                if dot(m, sub(other, a)) < 0.0 {
                    m = [-m[0], -m[1], -m[2]];
                }
                let denom = dot(dir, m);
                if denom >= -1e-14 {
                    continue; // moving parallel or inward
                }
                let dist_to_edge = dot(sub(pos, a), m) / -denom;
                if dist_to_edge < s_exit {
                    s_exit = dist_to_edge;
                    exit_edge = Some((tri_v[k], tri_v[(k + 1) % 3]));
                }
            }

            if s_exit >= remaining || exit_edge.is_none() {
                pos = [
                    pos[0] + remaining * dir[0],
                    pos[1] + remaining * dir[1],
                    pos[2] + remaining * dir[2],
                ];
                points.push(pos);
                break;
            }
            // advance to the edge and cross
            let s_adv = s_exit.max(0.0);
            pos = [
                pos[0] + s_adv * dir[0],
                pos[1] + s_adv * dir[1],
                pos[2] + s_adv * dir[2],
            ];
            points.push(pos);
            remaining -= s_adv;
            let (ea, eb) = exit_edge.unwrap();
            let key = crate::mesh::ordered(ea, eb);
            let next = edge_tris
                .get(&key)
                .and_then(|ts| ts.iter().copied().find(|&t| t != tri));
            match next {
                Some(t_next) => {
                    let (_, _, n_next) = mesh.triangle_geometry(t_next);
                    dir = rotate_between_planes(dir, n_now, n_next);
                    tri = t_next;
                }
                None => break 'outer, // boundary edge: stop
            }
            if remaining <= 1e-14 {
                break;
            }
        }
    }

    if !reached && norm(sub(target, pos)) <= ball {
        reached = true;
    }
    if reached {
        points.push(target);
    }
    Ok(GeodesicPath { points, reached })
}
