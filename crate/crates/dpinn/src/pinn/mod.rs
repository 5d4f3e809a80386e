//! Loss terms and training for encoded physics-informed networks.
//!
//! Three input encodings share one trainer: Laplace–Beltrami eigenfunction
//! values (the method under study), the closed-form square eigenfunctions,
//! and raw Cartesian coordinates (the traditional-PINN baseline). PDE
//! residuals for the encoded arms are discretized with the FEM operators
//! (element gradients, stiffness rows); the Cartesian arm differentiates
//! the network itself via the forward-gradient/Laplacian propagations, so
//! the comparison matches how each method is actually used.
//!
//! Observed values are z-scored per run (the network learns the normalized
//! target; predictions are mapped back), while PDE and boundary residuals
//! stay in physical units through the stored output scale.

mod train;

pub use train::{train, LossRecord, TrainConfig};

use crate::fem::{element_gradient, SparseSym};
use crate::mesh::TriMesh;
use crate::nn::{Mlp, MlpVars, Tape, Var};
use crate::spectral::{AnalyticSquareBasis, EigenBasis};
use crate::{DpinnError, NodalField, Result};
use nalgebra::DMatrix;

/// Observed values and optional Neumann fluxes at mesh vertices.
#[derive(Debug, Clone, Default)]
pub struct DataSet {
    /// (vertex, observed physical value)
    pub observations: Vec<(usize, f64)>,
    /// (boundary vertex, outward flux)
    pub neumann: Vec<(usize, f64)>,
}

impl DataSet {
    pub fn from_field(vertices: &[usize], field: &NodalField) -> Self {
        Self {
            observations: vertices.iter().map(|&v| (v, field[v])).collect(),
            neumann: Vec::new(),
        }
    }

    fn validate(&self, n_vertices: usize) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for &(v, _) in &self.observations {
            if v >= n_vertices {
                return Err(DpinnError::InvalidArgument(format!(
                    "observation vertex {v} out of range"
                )));
            }
            if !seen.insert(v) {
                return Err(DpinnError::InvalidArgument(format!(
                    "duplicate observation vertex {v}"
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for &(v, _) in &self.neumann {
            if v >= n_vertices || !seen.insert(v) {
                return Err(DpinnError::InvalidArgument(format!(
                    "bad Neumann vertex {v}"
                )));
            }
        }
        Ok(())
    }
}

/// PDE residual kind and its evaluation sites.
#[derive(Debug, Clone)]
pub enum ResidualSpec<'a> {
    /// `(|grad u| - 1)^2` over triangle elements.
    Eikonal { elements: &'a [usize] },
    /// `(sum_j A_ij u_j)^2` over interior vertices (FEM arms) or
    /// `(lap u(x_i))^2` (Cartesian arm).
    Laplace {
        stiffness: &'a SparseSym,
        vertices: &'a [usize],
    },
    /// Same with a source: FEM arms use the consistent `load` (= -M f),
    /// the Cartesian arm uses the raw nodal `f`.
    Poisson {
        stiffness: &'a SparseSym,
        vertices: &'a [usize],
        load: &'a NodalField,
        f_raw: &'a NodalField,
    },
    /// No physics (pure regression arm).
    None,
}

/// How observed values are mapped to network targets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetNorm {
    /// center and scale by the train-data standard deviation
    #[default]
    ZScore,
    /// scale by the largest train-data magnitude (keeps zero at zero)
    MaxAbs,
    /// no normalization
    Identity,
}

/// Weights of the loss terms; the defaults mirror an unweighted sum.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    pub data: f64,
    pub pde: f64,
    pub boundary: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            data: 1.0,
            pde: 1.0,
            boundary: 1.0,
        }
    }
}

/// Which inputs the network sees.
#[derive(Clone, Copy)]
pub enum InputEncoding<'a> {
    Spectral(&'a EigenBasis),
    AnalyticSquare(&'a AnalyticSquareBasis),
    Cartesian,
}

/// Precomputed, normalized per-vertex network inputs for one mesh.
pub struct VertexEncoder {
    /// in_dim x n_vertices, normalization applied
    inputs: DMatrix<f64>,
    /// Cartesian data for residual paths; None for encoded arms.
    cartesian: Option<CartesianFrame>,
}

struct CartesianFrame {
    center: [f64; 3],
    /// uniform physical-to-normalized scale: x_norm = (x - c) / s
    scale: f64,
    dim: usize,
}

impl VertexEncoder {
    pub fn build(encoding: InputEncoding, mesh: &TriMesh) -> Result<Self> {
        let n = mesh.vertex_count();
        match encoding {
            InputEncoding::Spectral(basis) => {
                if basis.n_vertices() != n {
                    return Err(DpinnError::DimensionMismatch(
                        "eigenbasis does not match mesh".into(),
                    ));
                }
                let k = basis.n_modes();
                let mut m = DMatrix::zeros(k, n);
                for r in 0..k {
                    let v = basis.eigenvector(r);
                    for c in 0..n {
                        m[(r, c)] = v[c];
                    }
                }
                normalize_rows_uniform(&mut m);
                Ok(Self {
                    inputs: m,
                    cartesian: None,
                })
            }
            InputEncoding::AnalyticSquare(basis) => {
                let k = basis.n_modes();
                let mut m = DMatrix::zeros(k, n);
                for c in 0..n {
                    let v = mesh.vertex(c);
                    for (r, val) in basis.encode(v[0], v[1]).into_iter().enumerate() {
                        m[(r, c)] = val;
                    }
                }
                normalize_rows_uniform(&mut m);
                Ok(Self {
                    inputs: m,
                    cartesian: None,
                })
            }
            InputEncoding::Cartesian => {
                let dim = mesh.dimension();
                let (lo, hi) = mesh.bounding_box();
                let center = [
                    0.5 * (lo[0] + hi[0]),
                    0.5 * (lo[1] + hi[1]),
                    0.5 * (lo[2] + hi[2]),
                ];
                let mut scale = 0.0f64;
                for d in 0..dim {
                    scale = scale.max(0.5 * (hi[d] - lo[d]));
                }
                let scale = if scale > 0.0 { scale } else { 1.0 };
                let mut m = DMatrix::zeros(dim, n);
                for c in 0..n {
                    let v = mesh.vertex(c);
                    for d in 0..dim {
                        m[(d, c)] = (v[d] - center[d]) / scale;
                    }
                }
                Ok(Self {
                    inputs: m,
                    cartesian: Some(CartesianFrame { center, scale, dim }),
                })
            }
        }
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn n_vertices(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn is_cartesian(&self) -> bool {
        self.cartesian.is_some()
    }

    /// Normalized input of one vertex.
    pub fn vertex_input(&self, i: usize) -> Vec<f64> {
        self.inputs.column(i).iter().copied().collect()
    }

    /// Input matrix of a vertex subset (columns in the given order).
    pub fn gather(&self, vertices: &[usize]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.input_dim(), vertices.len());
        for (c, &v) in vertices.iter().enumerate() {
            m.column_mut(c).copy_from(&self.inputs.column(v));
        }
        m
    }

    /// Normalized input of an arbitrary point (Cartesian arm only).
    fn encode_position(&self, p: [f64; 3]) -> Option<Vec<f64>> {
        self.cartesian.as_ref().map(|f| {
            (0..f.dim)
                .map(|d| (p[d] - f.center[d]) / f.scale)
                .collect()
        })
    }
}

/// Scale all rows by one common factor 1/rms so tanh layers see O(1)
/// inputs regardless of mesh area; uniform across modes to preserve the
/// raw shape of the encoding.
fn normalize_rows_uniform(m: &mut DMatrix<f64>) {
    let rms = (m.iter().map(|v| v * v).sum::<f64>() / m.len() as f64).sqrt();
    if rms > 0.0 {
        *m /= rms;
    }
}

/// Trained network plus its target normalization: physical prediction =
/// out_sigma * net(input) + out_mu.
#[derive(Debug, Clone)]
pub struct PinnModel {
    pub mlp: Mlp,
    pub out_mu: f64,
    pub out_sigma: f64,
}

impl PinnModel {
    pub fn raw(mlp: Mlp) -> Self {
        Self {
            mlp,
            out_mu: 0.0,
            out_sigma: 1.0,
        }
    }

    /// Target normalization constants from the training observations.
    pub fn fit_output_scale(mut self, data: &DataSet, norm: TargetNorm) -> Self {
        let vals: Vec<f64> = data.observations.iter().map(|&(_, u)| u).collect();
        if !vals.is_empty() {
            match norm {
                TargetNorm::ZScore => {
                    let mu = vals.iter().sum::<f64>() / vals.len() as f64;
                    let var =
                        vals.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / vals.len() as f64;
                    self.out_mu = mu;
                    self.out_sigma = var.sqrt().max(1e-12);
                }
                TargetNorm::MaxAbs => {
                    self.out_mu = 0.0;
                    self.out_sigma = vals.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
                }
                TargetNorm::Identity => {
                    self.out_mu = 0.0;
                    self.out_sigma = 1.0;
                }
            }
        }
        self
    }

    /// Physical prediction at every vertex.
    pub fn predict_field(&self, encoder: &VertexEncoder) -> NodalField {
        let out = self.mlp.forward(&encoder.inputs);
        out.row(0)
            .iter()
            .map(|&v| self.out_sigma * v + self.out_mu)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Loss terms. Each has a tape builder (used by training) and a plain
// evaluator built on the same graph without gradients.
// ---------------------------------------------------------------------------

/// Mean squared error of the network against z-scored observations.
pub fn mse_data(model: &PinnModel, encoder: &VertexEncoder, data: &DataSet) -> Result<f64> {
    if data.observations.is_empty() {
        return Err(DpinnError::InvalidArgument("empty data set".into()));
    }
    data.validate(encoder.n_vertices())?;
    let mut tape = Tape::new();
    let vars = model.mlp.constants_on(&mut tape);
    let idx: Vec<usize> = data.observations.iter().map(|&(v, _)| v).collect();
    let vals: Vec<f64> = data.observations.iter().map(|&(_, u)| u).collect();
    let root = build_data_term(&mut tape, &vars, model, encoder, &idx, &vals);
    Ok(tape.scalar(root))
}

pub(crate) fn build_data_term(
    tape: &mut Tape,
    vars: &MlpVars,
    model: &PinnModel,
    encoder: &VertexEncoder,
    vertices: &[usize],
    values: &[f64],
) -> Var {
    let x = tape.constant(encoder.gather(vertices));
    let trace = vars.forward(tape, x);
    let targets: Vec<f64> = values
        .iter()
        .map(|u| (u - model.out_mu) / model.out_sigma)
        .collect();
    let t = tape.constant(DMatrix::from_row_slice(1, targets.len(), &targets));
    let d = tape.sub(trace.output, t);
    let sq = tape.hadamard(d, d);
    tape.mean_all(sq)
}

/// Mean Eikonal residual `(|grad u_phys| - 1)^2` of a nodal field over the
/// given elements (gradients via the per-element FEM operator).
pub fn eikonal_residual_of_field(mesh: &TriMesh, field: &NodalField, elements: &[usize]) -> f64 {
    let mut sum = 0.0;
    for &t in elements {
        let [i, j, k] = mesh.triangle(t);
        let g = element_gradient(mesh, t).apply([field[i], field[j], field[k]]);
        let gn = crate::mesh::dot(g, g).sqrt();
        sum += (gn - 1.0) * (gn - 1.0);
    }
    sum / elements.len() as f64
}

/// Mean Eikonal residual of the model over elements: FEM gradients of the
/// vertex predictions for encoded arms, network autodiff at centroids for
/// the Cartesian arm.
pub fn eikonal_residual(
    model: &PinnModel,
    encoder: &VertexEncoder,
    mesh: &TriMesh,
    elements: &[usize],
) -> Result<f64> {
    let mut tape = Tape::new();
    let vars = model.mlp.constants_on(&mut tape);
    let root = build_eikonal_term(&mut tape, &vars, model, encoder, mesh, elements)?;
    Ok(tape.scalar(root))
}

pub(crate) fn build_eikonal_term(
    tape: &mut Tape,
    vars: &MlpVars,
    model: &PinnModel,
    encoder: &VertexEncoder,
    mesh: &TriMesh,
    elements: &[usize],
) -> Result<Var> {
    if elements.is_empty() {
        return Err(DpinnError::InvalidArgument("empty element batch".into()));
    }
    let b = elements.len();
    let grad = if let Some(frame) = &encoder.cartesian {
        // Autodiff of the network at element centroids, physical scale.
        let dim = frame.dim;
        let mut x = DMatrix::zeros(dim, b);
        for (c, &t) in elements.iter().enumerate() {
            let (_, centroid, _) = mesh.triangle_geometry(t);
            let enc = encoder.encode_position(centroid).unwrap();
            for d in 0..dim {
                x[(d, c)] = enc[d];
            }
        }
        let x = tape.constant(x);
        let mut j0 = DMatrix::zeros(dim, b * dim);
        for s in 0..b {
            for d in 0..dim {
                j0[(d, s * dim + d)] = 1.0 / frame.scale;
            }
        }
        let j0 = tape.constant(j0);
        let (_, j) = vars.forward_with_jacobian(tape, x, j0, dim);
        tape.reshape(j, dim, b)
    } else {
        // FEM gradients of vertex predictions: one constant operator maps
        // the batched outputs to all element gradients.
        let mut unique: Vec<usize> = elements
            .iter()
            .flat_map(|&t| mesh.triangle(t))
            .collect();
        unique.sort_unstable();
        unique.dedup();
        let slot: std::collections::HashMap<usize, usize> =
            unique.iter().enumerate().map(|(s, &v)| (v, s)).collect();
        let x = tape.constant(encoder.gather(&unique));
        let trace = vars.forward(tape, x);
        let mut p = DMatrix::zeros(unique.len(), 3 * b);
        for (e, &t) in elements.iter().enumerate() {
            let tri = mesh.triangle(t);
            let ge = element_gradient(mesh, t);
            for (c, &v) in tri.iter().enumerate() {
                for d in 0..3 {
                    p[(slot[&v], e * 3 + d)] += ge.b[d][c];
                }
            }
        }
        let p = tape.constant(p);
        let flat = tape.matmul(trace.output, p);
        tape.reshape(flat, 3, b)
    };
    let phys = tape.scale(grad, model.out_sigma);
    let sq = tape.hadamard(phys, phys);
    let norms2 = tape.col_sum(sq);
    let norms = tape.sqrt(norms2);
    let res = tape.shift(norms, -1.0);
    let sq = tape.hadamard(res, res);
    Ok(tape.mean_all(sq))
}

/// Mean squared discrete-Laplacian residual of a nodal field at vertices,
/// minus an optional load.
pub fn laplace_residual_of_field(
    stiffness: &SparseSym,
    field: &NodalField,
    vertices: &[usize],
    load: Option<&NodalField>,
) -> Result<f64> {
    let mut sum = 0.0;
    for &i in vertices {
        let r = crate::fem::nodal_laplacian(stiffness, field, i)?
            - load.map_or(0.0, |l| l[i]);
        sum += r * r;
    }
    Ok(sum / vertices.len() as f64)
}

/// Mean PDE residual of the model at interior vertices: stiffness rows on
/// vertex predictions for encoded arms, network Laplacian for Cartesian.
pub fn laplace_residual(
    model: &PinnModel,
    encoder: &VertexEncoder,
    spec: &ResidualSpec,
) -> Result<f64> {
    let mut tape = Tape::new();
    let vars = model.mlp.constants_on(&mut tape);
    let root = build_laplace_term(&mut tape, &vars, model, encoder, spec)?;
    Ok(tape.scalar(root))
}

pub(crate) fn build_laplace_term(
    tape: &mut Tape,
    vars: &MlpVars,
    model: &PinnModel,
    encoder: &VertexEncoder,
    spec: &ResidualSpec,
) -> Result<Var> {
    let (stiffness, vertices, load, f_raw): (&SparseSym, &[usize], Option<&NodalField>, Option<&NodalField>) =
        match spec {
            ResidualSpec::Laplace {
                stiffness,
                vertices,
            } => (stiffness, vertices, None, None),
            ResidualSpec::Poisson {
                stiffness,
                vertices,
                load,
                f_raw,
            } => (stiffness, vertices, Some(load), Some(f_raw)),
            _ => {
                return Err(DpinnError::InvalidArgument(
                    "laplace term needs a Laplace or Poisson residual spec".into(),
                ))
            }
        };
    if vertices.is_empty() {
        return Err(DpinnError::InvalidArgument("empty vertex batch".into()));
    }
    let b = vertices.len();
    if let Some(frame) = &encoder.cartesian {
        let dim = frame.dim;
        let x = tape.constant(encoder.gather(vertices));
        let mut j0 = DMatrix::zeros(dim, b * dim);
        for s in 0..b {
            for d in 0..dim {
                j0[(d, s * dim + d)] = 1.0 / frame.scale;
            }
        }
        let j0 = tape.constant(j0);
        let (_, _, lap) = vars.forward_with_laplacian(tape, x, j0, dim);
        let phys = tape.scale(lap, model.out_sigma);
        let rhs: Vec<f64> = vertices
            .iter()
            .map(|&i| f_raw.map_or(0.0, |f| f[i]))
            .collect();
        let rhs = tape.constant(DMatrix::from_row_slice(1, b, &rhs));
        let d = tape.sub(phys, rhs);
        let sq = tape.hadamard(d, d);
        Ok(tape.mean_all(sq))
    } else {
        // One row of the stiffness matrix per batched vertex.
        let mut unique: Vec<usize> = vertices
            .iter()
            .flat_map(|&i| stiffness.row(i).0.iter().copied())
            .collect();
        unique.sort_unstable();
        unique.dedup();
        let slot: std::collections::HashMap<usize, usize> =
            unique.iter().enumerate().map(|(s, &v)| (v, s)).collect();
        let x = tape.constant(encoder.gather(&unique));
        let trace = vars.forward(tape, x);
        let mut w = DMatrix::zeros(unique.len(), b);
        for (c, &i) in vertices.iter().enumerate() {
            let (cols, vals) = stiffness.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                w[(slot[&j], c)] = v;
            }
        }
        let w = tape.constant(w);
        let rows = tape.matmul(trace.output, w);
        let phys = tape.scale(rows, model.out_sigma);
        let rhs: Vec<f64> = vertices
            .iter()
            .map(|&i| load.map_or(0.0, |l| l[i]))
            .collect();
        let rhs = tape.constant(DMatrix::from_row_slice(1, b, &rhs));
        let d = tape.sub(phys, rhs);
        let sq = tape.hadamard(d, d);
        Ok(tape.mean_all(sq))
    }
}

/// Outward in-plane normal at a boundary vertex (mean of the adjacent
/// boundary-edge normals).
fn boundary_normal(
    mesh: &TriMesh,
    boundary_edges: &std::collections::HashSet<(usize, usize)>,
    vertex: usize,
) -> Option<[f64; 3]> {
    use crate::mesh::{cross, norm, sub};
    let mut acc = [0.0f64; 3];
    let mut hits = 0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for k in 0..3 {
            let (a, b2) = (tri[k], tri[(k + 1) % 3]);
            if a != vertex && b2 != vertex {
                continue;
            }
            if !boundary_edges.contains(&crate::mesh::ordered(a, b2)) {
                continue;
            }
            let (_, _, n) = mesh.triangle_geometry(t);
            let ev = sub(mesh.vertex(b2), mesh.vertex(a));
            // in-plane normal of the edge, oriented away from the triangle
            let mut m = cross(ev, n);
            let third = tri[(k + 2) % 3];
            let inward = sub(mesh.vertex(third), mesh.vertex(a));
            if crate::mesh::dot(m, inward) > 0.0 {
                m = [-m[0], -m[1], -m[2]];
            }
            let l = norm(m);
            for d in 0..3 {
                acc[d] += m[d] / l;
            }
            hits += 1;
        }
    }
    if hits == 0 {
        return None;
    }
    let l = crate::mesh::norm(acc);
    Some([acc[0] / l, acc[1] / l, acc[2] / l])
}

/// Mean squared Neumann mismatch `(grad u . n - g)^2` at boundary vertices,
/// with the gradient taken as the mean of adjacent-element FEM gradients.
pub fn neumann_residual(
    model: &PinnModel,
    encoder: &VertexEncoder,
    mesh: &TriMesh,
    boundary: &[(usize, f64)],
) -> Result<f64> {
    let mut tape = Tape::new();
    let vars = model.mlp.constants_on(&mut tape);
    let root = build_neumann_term(&mut tape, &vars, model, encoder, mesh, boundary)?;
    Ok(tape.scalar(root))
}

pub(crate) fn build_neumann_term(
    tape: &mut Tape,
    vars: &MlpVars,
    model: &PinnModel,
    encoder: &VertexEncoder,
    mesh: &TriMesh,
    boundary: &[(usize, f64)],
) -> Result<Var> {
    if boundary.is_empty() {
        return Err(DpinnError::InvalidArgument("empty boundary batch".into()));
    }
    let incident = mesh.vertex_triangles();
    let b = boundary.len();
    let mut unique: Vec<usize> = boundary
        .iter()
        .flat_map(|&(v, _)| incident[v].iter().flat_map(|&t| mesh.triangle(t)))
        .collect();
    unique.sort_unstable();
    unique.dedup();
    let slot: std::collections::HashMap<usize, usize> =
        unique.iter().enumerate().map(|(s, &v)| (v, s)).collect();
    let x = tape.constant(encoder.gather(&unique));
    let trace = vars.forward(tape, x);

    // one linear functional per boundary vertex: mean over adjacent
    // elements of n . B^e, acting on the element's vertex predictions
    let edge_set: std::collections::HashSet<(usize, usize)> =
        mesh.boundary_edges().into_iter().collect();
    let mut q = DMatrix::zeros(unique.len(), b);
    for (c, &(v, _)) in boundary.iter().enumerate() {
        let n = boundary_normal(mesh, &edge_set, v).ok_or_else(|| {
            DpinnError::InvalidArgument(format!("vertex {v} is not on the boundary"))
        })?;
        let tris = &incident[v];
        for &t in tris {
            let tri = mesh.triangle(t);
            let ge = element_gradient(mesh, t);
            for (lc, &u) in tri.iter().enumerate() {
                let dirdot = n[0] * ge.b[0][lc] + n[1] * ge.b[1][lc] + n[2] * ge.b[2][lc];
                q[(slot[&u], c)] += dirdot / tris.len() as f64;
            }
        }
    }
    let q = tape.constant(q);
    let grads = tape.matmul(trace.output, q);
    let phys = tape.scale(grads, model.out_sigma);
    let targets: Vec<f64> = boundary.iter().map(|&(_, g)| g).collect();
    let g = tape.constant(DMatrix::from_row_slice(1, b, &targets));
    let d = tape.sub(phys, g);
    let sq = tape.hadamard(d, d);
    Ok(tape.mean_all(sq))
}

/// Normalized mean squared error: `sum (pred - truth)^2 / sum (truth - mean)^2`.
///
/// Predicting the truth's mean scores exactly 1.
pub fn nmse(pred: &NodalField, truth: &NodalField) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(DpinnError::DimensionMismatch(format!(
            "prediction has {} entries, truth {}",
            pred.len(),
            truth.len()
        )));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let denom: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if denom <= 0.0 {
        return Err(DpinnError::InvalidArgument(
            "constant truth field has zero variance".into(),
        ));
    }
    let num: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(num / denom)
}

/// Plain mean squared error over two nodal fields.
pub fn mse(pred: &NodalField, truth: &NodalField) -> f64 {
    pred.iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64
}

#[cfg(test)]
mod tests;
