//! Parametric mesh generators. All lengths are millimeters.

use super::{BoundaryTag, TriMesh};
use crate::{DpinnError, Result};

/// Helical tube parameters. Defaults reproduce a coil of 30 mm helix
/// diameter, 12 mm pitch, 4 revolutions and 5 mm tube radius at a
/// resolution of roughly 1.5k vertices / 3k triangles.
#[derive(Debug, Clone)]
pub struct CoilSpec {
    pub helix_diameter: f64,
    pub pitch: f64,
    pub revolutions: f64,
    pub tube_radius: f64,
    /// Total axial segments along the helix.
    pub n_axial: usize,
    /// Segments around the tube cross-section.
    pub n_circ: usize,
}

impl Default for CoilSpec {
    fn default() -> Self {
        Self {
            helix_diameter: 30.0,
            pitch: 12.0,
            revolutions: 4.0,
            tube_radius: 5.0,
            n_axial: 128,
            n_circ: 12,
        }
    }
}

/// Generate an open-ended helical tube (topological cylinder).
///
/// The centerline is `c(t) = (R cos t, R sin t, k t)` with `k = pitch / 2π`;
/// the cross-section circle lives in the plane spanned by the Frenet normal
/// and binormal, which are closed-form for a helix.
pub fn generate_coil(spec: &CoilSpec) -> Result<TriMesh> {
    if spec.helix_diameter <= 0.0
        || spec.pitch <= 0.0
        || spec.revolutions <= 0.0
        || spec.tube_radius <= 0.0
    {
        return Err(DpinnError::InvalidGeometry(
            "coil parameters must be positive".into(),
        ));
    }
    if spec.pitch < 2.0 * spec.tube_radius {
        return Err(DpinnError::InvalidGeometry(format!(
            "pitch {} < 2 * tube_radius {}: adjacent windings self-intersect",
            spec.pitch, spec.tube_radius
        )));
    }
    if (spec.n_axial as f64) < 8.0 * spec.revolutions {
        return Err(DpinnError::InvalidGeometry(
            "need at least 8 axial segments per revolution".into(),
        ));
    }
    if spec.n_circ < 6 {
        return Err(DpinnError::InvalidGeometry(
            "need at least 6 segments around the tube".into(),
        ));
    }

    let r_helix = 0.5 * spec.helix_diameter;
    let k = spec.pitch / (2.0 * std::f64::consts::PI);
    let t_max = 2.0 * std::f64::consts::PI * spec.revolutions;
    let (na, nc) = (spec.n_axial, spec.n_circ);

    let mut vertices = Vec::with_capacity((na + 1) * nc);
    for i in 0..=na {
        let t = t_max * i as f64 / na as f64;
        let (sin_t, cos_t) = t.sin_cos();
        let center = [r_helix * cos_t, r_helix * sin_t, k * t];
        // Frenet frame of the helix: normal points to the axis, binormal
        // completes the right-handed triple.
        let normal = [-cos_t, -sin_t, 0.0];
        let s = (r_helix * r_helix + k * k).sqrt();
        let binormal = [k * sin_t / s, -k * cos_t / s, r_helix / s];
        for j in 0..nc {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / nc as f64;
            let (sp, cp) = phi.sin_cos();
            vertices.push([
                center[0] + spec.tube_radius * (cp * normal[0] + sp * binormal[0]),
                center[1] + spec.tube_radius * (cp * normal[1] + sp * binormal[1]),
                center[2] + spec.tube_radius * (cp * normal[2] + sp * binormal[2]),
            ]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * na * nc);
    for i in 0..na {
        for j in 0..nc {
            let jn = (j + 1) % nc;
            let a = i * nc + j;
            let b = (i + 1) * nc + j;
            let c = (i + 1) * nc + jn;
            let d = i * nc + jn;
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    TriMesh::new(vertices, triangles, 3)
}

/// Structured triangulation of the square [-1, 1]^2.
///
/// Returns the mesh and a `dirichlet` tag holding every boundary vertex.
pub fn generate_square(element_size: f64) -> Result<(TriMesh, BoundaryTag)> {
    if !(element_size > 0.0 && element_size <= 1.0) {
        return Err(DpinnError::InvalidGeometry(format!(
            "element_size must be in (0, 1], got {element_size}"
        )));
    }
    let n = (2.0 / element_size).ceil() as usize; // cells per side
    let nv = n + 1;
    let mut vertices = Vec::with_capacity(nv * nv);
    for iy in 0..nv {
        for ix in 0..nv {
            let x = -1.0 + 2.0 * ix as f64 / n as f64;
            let y = -1.0 + 2.0 * iy as f64 / n as f64;
            vertices.push([x, y, 0.0]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for iy in 0..n {
        for ix in 0..n {
            let a = iy * nv + ix;
            let b = iy * nv + ix + 1;
            let c = (iy + 1) * nv + ix + 1;
            let d = (iy + 1) * nv + ix;
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mesh = TriMesh::new(vertices, triangles, 2)?;
    let mut tag = BoundaryTag::new();
    tag.insert("dirichlet", mesh.boundary_vertices());
    Ok((mesh, tag))
}

/// Comb-shaped heat-sink cross-section: a rectangular base with alternating
/// narrow/wide fins on top. All dimensions are snapped to the element grid.
#[derive(Debug, Clone)]
pub struct HeatsinkSpec {
    pub base_height: f64,
    pub fin_height: f64,
    /// Fin widths from left to right.
    pub fin_widths: Vec<f64>,
    /// Gap between fins, also used before the first and after the last fin.
    pub gap: f64,
}

impl Default for HeatsinkSpec {
    fn default() -> Self {
        Self {
            base_height: 6.4,
            fin_height: 19.2,
            fin_widths: vec![1.6, 4.8, 1.6, 4.8, 1.6, 4.8],
            gap: 4.0,
        }
    }
}

/// Generate the heat-sink mesh with boundary tags `dirichlet` (base bottom),
/// `neumann` (base sides) and `robin` (fin and top surfaces).
pub fn generate_heatsink(spec: &HeatsinkSpec, element_size: f64) -> Result<(TriMesh, BoundaryTag)> {
    let h = element_size;
    if h <= 0.0 {
        return Err(DpinnError::InvalidGeometry("element_size must be positive".into()));
    }
    let cells = |len: f64| -> Result<usize> {
        let c = (len / h).round() as i64;
        if c < 1 {
            return Err(DpinnError::InvalidGeometry(format!(
                "dimension {len} is below one element of size {h}"
            )));
        }
        Ok(c as usize)
    };
    if spec.fin_widths.is_empty() {
        return Err(DpinnError::InvalidGeometry("need at least one fin".into()));
    }
    let base_c = cells(spec.base_height)?;
    let fin_c = cells(spec.fin_height)?;
    let gap_c = cells(spec.gap)?;
    let fin_cs: Vec<usize> = spec
        .fin_widths
        .iter()
        .map(|&w| cells(w))
        .collect::<Result<_>>()?;
    // Fin spans in cell coordinates; gaps on both flanks.
    let mut fin_spans = Vec::new();
    let mut x = gap_c;
    for &w in &fin_cs {
        fin_spans.push((x, x + w));
        x += w + gap_c;
    }
    let nx = x; // total width in cells
    let ny = base_c + fin_c;
    for win in fin_spans.windows(2) {
        if win[0].1 >= win[1].0 {
            return Err(DpinnError::InvalidGeometry("fins overlap".into()));
        }
    }

    let in_domain = |ix: usize, iy: usize| -> bool {
        if iy < base_c {
            true
        } else {
            fin_spans.iter().any(|&(a, b)| ix >= a && ix < b)
        }
    };

    // Compact grid vertices that touch at least one included cell.
    let gw = nx + 1;
    let mut index = vec![usize::MAX; gw * (ny + 1)];
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let vid = |ix: usize, iy: usize, index: &mut Vec<usize>, vertices: &mut Vec<[f64; 3]>| {
        let slot = iy * gw + ix;
        if index[slot] == usize::MAX {
            index[slot] = vertices.len();
            vertices.push([ix as f64 * h, iy as f64 * h, 0.0]);
        }
        index[slot]
    };
    for iy in 0..ny {
        for ix in 0..nx {
            if !in_domain(ix, iy) {
                continue;
            }
            let a = vid(ix, iy, &mut index, &mut vertices);
            let b = vid(ix + 1, iy, &mut index, &mut vertices);
            let c = vid(ix + 1, iy + 1, &mut index, &mut vertices);
            let d = vid(ix, iy + 1, &mut index, &mut vertices);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let mesh = TriMesh::new(vertices, triangles, 2)?;

    let tol = 0.5 * h;
    let width = nx as f64 * h;
    let base_top = base_c as f64 * h;
    let mut dirichlet = Vec::new();
    let mut neumann = Vec::new();
    let mut robin = Vec::new();
    for v in mesh.boundary_vertices() {
        let [x, y, _] = mesh.vertex(v);
        if y < tol {
            dirichlet.push(v);
        }
        if (x < tol || x > width - tol) && y < base_top + tol {
            neumann.push(v);
        }
        if y > base_top - tol {
            robin.push(v);
        }
    }
    let mut tag = BoundaryTag::new();
    tag.insert("dirichlet", dirichlet);
    tag.insert("neumann", neumann);
    tag.insert("robin", robin);
    Ok((mesh, tag))
}

/// Closed UV sphere: `n_lat` latitude rings between two pole vertices.
pub fn generate_sphere(radius: f64, n_lat: usize, n_lon: usize) -> Result<TriMesh> {
    if radius <= 0.0 || n_lat < 2 || n_lon < 3 {
        return Err(DpinnError::InvalidGeometry(
            "sphere needs radius > 0, n_lat >= 2, n_lon >= 3".into(),
        ));
    }
    use std::f64::consts::PI;
    let mut vertices = Vec::with_capacity(n_lat * n_lon + 2);
    vertices.push([0.0, 0.0, radius]); // north pole = 0
    for i in 0..n_lat {
        let theta = PI * (i + 1) as f64 / (n_lat + 1) as f64;
        let (st, ct) = theta.sin_cos();
        for j in 0..n_lon {
            let phi = 2.0 * PI * j as f64 / n_lon as f64;
            let (sp, cp) = phi.sin_cos();
            vertices.push([radius * st * cp, radius * st * sp, radius * ct]);
        }
    }
    let south = vertices.len();
    vertices.push([0.0, 0.0, -radius]);

    let ring = |i: usize, j: usize| 1 + i * n_lon + (j % n_lon);
    let mut triangles = Vec::new();
    for j in 0..n_lon {
        triangles.push([0, ring(0, j), ring(0, j + 1)]);
    }
    for i in 0..n_lat - 1 {
        for j in 0..n_lon {
            let a = ring(i, j);
            let b = ring(i + 1, j);
            let c = ring(i + 1, j + 1);
            let d = ring(i, j + 1);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    for j in 0..n_lon {
        triangles.push([south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)]);
    }
    TriMesh::new(vertices, triangles, 3)
}
