//! Operator network for pairwise geodesic distance: a trunk net encodes the
//! query point, a branch net encodes the source point, and their latent dot
//! product is symmetrized and gated by the encoding misalignment
//!
//! ```text
//! dbar(v1, v2) = trunk(v1) . branch(v2)
//! dhat(v1, v2) = 1/2 (1 - cos(v1, v2)) (dbar(v1, v2) + dbar(v2, v1))
//! ```
//!
//! so zero distance on the diagonal and argument symmetry hold for any
//! parameters. The misalignment factor is evaluated as a half squared
//! distance of normalized encodings, `1/4 |v1/|v1| - v2/|v2||^2`, which is
//! the same quantity but exactly zero (not merely tiny) when `v1 == v2`.
//!
//! Physics enters through the Eikonal residual of the surface gradient of
//! `dhat` in its first argument: the network part comes from reverse-mode
//! input gradients, the geometry part from the per-element FEM gradients of
//! the eigenfunction encodings.

mod trace;

pub use trace::{trace_geodesic, GeodesicPath};

use crate::fem::element_gradient;
use crate::mesh::TriMesh;
use crate::nn::{adam_step, AdamState, LrSchedule, Mlp, MlpGrads, MlpVars, Tape, Var};
use crate::oracle::PairSample;
use crate::pinn::{InputEncoding, LossRecord, VertexEncoder};
use crate::spectral::EigenBasis;
use crate::{DpinnError, Result};
use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Trunk/branch operator network with a fixed output scale for physical
/// distances (scale-only so the zero diagonal survives denormalization).
#[derive(Debug, Clone)]
pub struct GeodesicNet {
    pub trunk: Mlp,
    pub branch: Mlp,
    /// physical distance = out_scale * network output
    pub out_scale: f64,
}

impl GeodesicNet {
    pub fn init(
        input_dim: usize,
        hidden: &[usize],
        latent: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(latent);
        Ok(Self {
            trunk: Mlp::init(&sizes, seed)?,
            branch: Mlp::init(&sizes, seed.wrapping_add(0x5117))?,
            out_scale: 1.0,
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.trunk.output_dim()
    }
}

/// Misalignment gate `1/2 (1 - cos)` in the exact-zero form, plus its
/// gradient with respect to the first encoding.
fn gate_and_gradient(v1: &[f64], v2: &[f64]) -> (f64, Vec<f64>) {
    let n1 = v1.iter().map(|x| x * x).sum::<f64>().sqrt();
    let n2 = v2.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(n1 > 0.0 && n2 > 0.0, "zero-norm encoding");
    let mut w = 0.0;
    let mut cos = 0.0;
    for (a, b) in v1.iter().zip(v2) {
        let (ua, ub) = (a / n1, b / n2);
        let d = ua - ub;
        w += d * d;
        cos += ua * ub;
    }
    let w = 0.25 * w;
    // d w / d v1 = (cos * u1 - u2) / (2 |v1|)
    let grad = v1
        .iter()
        .zip(v2)
        .map(|(a, b)| (cos * (a / n1) - b / n2) / (2.0 * n1))
        .collect();
    (w, grad)
}

fn gate(v1: &[f64], v2: &[f64]) -> f64 {
    gate_and_gradient(v1, v2).0
}

/// Physical distance prediction for a pair of encodings.
pub fn predict_distance(net: &GeodesicNet, v1: &[f64], v2: &[f64]) -> Result<f64> {
    if v1.len() != v2.len() || v1.len() != net.trunk.input_dim() {
        return Err(DpinnError::DimensionMismatch(
            "encoding length does not match the network input".into(),
        ));
    }
    let x1 = DMatrix::from_column_slice(v1.len(), 1, v1);
    let x2 = DMatrix::from_column_slice(v2.len(), 1, v2);
    let t1 = net.trunk.forward(&x1);
    let t2 = net.trunk.forward(&x2);
    let b1 = net.branch.forward(&x1);
    let b2 = net.branch.forward(&x2);
    let d12: f64 = t1.iter().zip(b2.iter()).map(|(a, b)| a * b).sum();
    let d21: f64 = t2.iter().zip(b1.iter()).map(|(a, b)| a * b).sum();
    // adding +0.0 canonicalizes the -0.0 that the zero gate times a
    // negative sum would otherwise produce on the diagonal
    Ok(net.out_scale * gate(v1, v2) * (d12 + d21) + 0.0)
}

/// Per-element gradients of every encoding component: row k holds
/// `grad v_k` on triangle `t` (constant over the element).
pub struct EncodingGradients {
    grads: Vec<Option<DMatrix<f64>>>,
}

impl EncodingGradients {
    pub fn new(mesh: &TriMesh) -> Self {
        Self {
            grads: (0..mesh.triangle_count()).map(|_| None).collect(),
        }
    }

    /// N x 3 gradient matrix of the (scaled) encodings on triangle `t`.
    pub fn get(&mut self, mesh: &TriMesh, encoder: &VertexEncoder, t: usize) -> &DMatrix<f64> {
        if self.grads[t].is_none() {
            let [i, j, k] = mesh.triangle(t);
            let ge = element_gradient(mesh, t);
            let (ei, ej, ek) = (
                encoder.vertex_input(i),
                encoder.vertex_input(j),
                encoder.vertex_input(k),
            );
            let n = ei.len();
            let mut g = DMatrix::zeros(n, 3);
            for r in 0..n {
                let vals = [ei[r], ej[r], ek[r]];
                let gr = ge.apply(vals);
                for d in 0..3 {
                    g[(r, d)] = gr[d];
                }
            }
            self.grads[t] = Some(g);
        }
        self.grads[t].as_ref().unwrap()
    }
}

/// Centroid encoding of a triangle (mean of its vertex encodings).
pub fn centroid_encoding(mesh: &TriMesh, encoder: &VertexEncoder, t: usize) -> Vec<f64> {
    let [i, j, k] = mesh.triangle(t);
    let (ei, ej, ek) = (
        encoder.vertex_input(i),
        encoder.vertex_input(j),
        encoder.vertex_input(k),
    );
    ei.iter()
        .zip(&ej)
        .zip(&ek)
        .map(|((a, b), c)| (a + b + c) / 3.0)
        .collect()
}

/// Surface gradient of the predicted distance in its first argument,
/// evaluated at the centroid of triangle `t` with the source encoded as
/// `v2`. Tangent to the element by construction.
pub fn surface_gradient(
    net: &GeodesicNet,
    mesh: &TriMesh,
    encoder: &VertexEncoder,
    grads: &mut EncodingGradients,
    t: usize,
    v2: &[f64],
) -> Result<[f64; 3]> {
    let v1 = centroid_encoding(mesh, encoder, t);
    let n = v1.len();
    let x1 = DMatrix::from_column_slice(n, 1, &v1);
    let x2 = DMatrix::from_column_slice(n, 1, v2);
    let t1 = net.trunk.forward(&x1);
    let t2 = net.trunk.forward(&x2);
    let b1 = net.branch.forward(&x1);
    let b2 = net.branch.forward(&x2);
    let d12: f64 = t1.iter().zip(b2.iter()).map(|(a, b)| a * b).sum();
    let d21: f64 = t2.iter().zip(b1.iter()).map(|(a, b)| a * b).sum();
    let s = d12 + d21;
    let (w, dw) = gate_and_gradient(&v1, v2);

    // network sensitivities: J_trunk(v1)^T b2 + J_branch(v1)^T t2
    let jt = net.trunk.input_jacobian(&nalgebra::DVector::from_column_slice(&v1));
    let jb = net.branch.input_jacobian(&nalgebra::DVector::from_column_slice(&v1));
    let mut dv = vec![0.0f64; n];
    for r in 0..n {
        let mut acc = dw[r] * s;
        for p in 0..net.latent_dim() {
            acc += w * (jt[(p, r)] * b2[(p, 0)] + jb[(p, r)] * t2[(p, 0)]);
        }
        dv[r] = acc;
    }

    let g = grads.get(mesh, encoder, t);
    let mut out = [0.0f64; 3];
    for d in 0..3 {
        let mut acc = 0.0;
        for r in 0..n {
            acc += dv[r] * g[(r, d)];
        }
        out[d] = net.out_scale * acc;
    }
    Ok(out)
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GeodesicTrainConfig {
    pub hidden: Vec<usize>,
    pub latent: usize,
    pub iterations: usize,
    /// shared batch size for the data and residual terms
    pub batch: usize,
    pub seed: u64,
    pub schedule: LrSchedule,
    pub pde_weight: f64,
}

impl Default for GeodesicTrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![200; 10],
            latent: 200,
            iterations: 50_000,
            batch: 10,
            seed: 0,
            schedule: LrSchedule::exp_decay_default(),
            pde_weight: 1.0,
        }
    }
}

/// Normalized dhat for a batch of encoding pairs, as a (1 x batch) node.
fn build_pair_prediction(
    tape: &mut Tape,
    trunk: &MlpVars,
    branch: &MlpVars,
    enc1: &DMatrix<f64>,
    enc2: &DMatrix<f64>,
) -> Var {
    let x1 = tape.constant(enc1.clone());
    let x2 = tape.constant(enc2.clone());
    let t1 = trunk.forward(tape, x1);
    let t2 = trunk.forward(tape, x2);
    let b1 = branch.forward(tape, x1);
    let b2 = branch.forward(tape, x2);
    let h12 = tape.hadamard(t1.output, b2.output);
    let d12 = tape.col_sum(h12);
    let h21 = tape.hadamard(t2.output, b1.output);
    let d21 = tape.col_sum(h21);
    let s = tape.add(d12, d21);
    let mut w_row = DMatrix::zeros(1, enc1.ncols());
    for c in 0..enc1.ncols() {
        let v1: Vec<f64> = enc1.column(c).iter().copied().collect();
        let v2: Vec<f64> = enc2.column(c).iter().copied().collect();
        w_row[(0, c)] = gate(&v1, &v2);
    }
    let w = tape.constant(w_row);
    tape.hadamard(w, s)
}

/// Train the operator network on sampled pair distances with the Eikonal
/// residual at element centroids; deterministic per seed.
pub fn train_geodesic(
    config: &GeodesicTrainConfig,
    mesh: &TriMesh,
    basis: &EigenBasis,
    pairs: &[PairSample],
) -> Result<(GeodesicNet, Vec<LossRecord>)> {
    if pairs.is_empty() {
        return Err(DpinnError::InvalidArgument("no training pairs".into()));
    }
    if config.batch == 0 || config.batch > pairs.len() {
        return Err(DpinnError::Config(format!(
            "batch {} out of range 1..={}",
            config.batch,
            pairs.len()
        )));
    }
    let encoder = VertexEncoder::build(InputEncoding::Spectral(basis), mesh)?;
    let n = encoder.input_dim();
    let mut net = GeodesicNet::init(n, &config.hidden, config.latent, config.seed)?;
    // scale-only normalization keeps the exact zero diagonal
    let rms = (pairs.iter().map(|p| p.distance * p.distance).sum::<f64>() / pairs.len() as f64)
        .sqrt()
        .max(1e-12);
    net.out_scale = rms;

    let mut state_t = AdamState::new(&net.trunk, config.schedule);
    let mut state_b = AdamState::new(&net.branch, config.schedule);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x0de0_11e7_0e51_c0de);
    let mut history = Vec::with_capacity(config.iterations);

    // per-element encoding gradients are model independent; fill lazily
    let mut enc_grads = EncodingGradients::new(mesh);
    let n_tri = mesh.triangle_count();
    let n_vert = mesh.vertex_count();

    for iteration in 0..config.iterations {
        // data batch
        let pick = rand::seq::index::sample(&mut rng, pairs.len(), config.batch);
        let mut enc1 = DMatrix::zeros(n, config.batch);
        let mut enc2 = DMatrix::zeros(n, config.batch);
        let mut targets = DMatrix::zeros(1, config.batch);
        for (c, k) in pick.iter().enumerate() {
            let p = pairs[k];
            let (vi, vj) = (encoder.vertex_input(p.i), encoder.vertex_input(p.j));
            for r in 0..n {
                enc1[(r, c)] = vi[r];
                enc2[(r, c)] = vj[r];
            }
            targets[(0, c)] = p.distance / net.out_scale;
        }

        // residual batch: (element, target vertex) pairs
        let use_pde = config.pde_weight != 0.0;
        let (res_elems, res_targets): (Vec<usize>, Vec<usize>) = if use_pde {
            (
                (0..config.batch).map(|_| rng.gen_range(0..n_tri)).collect(),
                (0..config.batch)
                    .map(|_| rng.gen_range(0..n_vert))
                    .collect(),
            )
        } else {
            (Vec::new(), Vec::new())
        };

        let mut tape = Tape::new();
        let trunk_vars = net.trunk.vars_on(&mut tape);
        let branch_vars = net.branch.vars_on(&mut tape);

        // data term
        let dhat = build_pair_prediction(&mut tape, &trunk_vars, &branch_vars, &enc1, &enc2);
        let tgt = tape.constant(targets);
        let diff = tape.sub(dhat, tgt);
        let sq = tape.hadamard(diff, diff);
        let data_term = tape.mean_all(sq);

        // eikonal term
        let pde_term = if use_pde {
            let mut e1 = DMatrix::zeros(n, config.batch);
            let mut e2 = DMatrix::zeros(n, config.batch);
            let mut w_row = DMatrix::zeros(1, config.batch);
            let mut dw_cols = DMatrix::zeros(n, config.batch);
            let mut blockdiag = DMatrix::zeros(n * config.batch, 3 * config.batch);
            for c in 0..config.batch {
                let v1 = centroid_encoding(mesh, &encoder, res_elems[c]);
                let v2 = encoder.vertex_input(res_targets[c]);
                let (w, dw) = gate_and_gradient(&v1, &v2);
                for r in 0..n {
                    e1[(r, c)] = v1[r];
                    e2[(r, c)] = v2[r];
                    dw_cols[(r, c)] = dw[r];
                }
                w_row[(0, c)] = w;
                let g = enc_grads.get(mesh, &encoder, res_elems[c]);
                for r in 0..n {
                    for d in 0..3 {
                        blockdiag[(c * n + r, c * 3 + d)] = g[(r, d)];
                    }
                }
            }
            let x1 = tape.constant(e1);
            let x2 = tape.constant(e2);
            let t1 = trunk_vars.forward(&mut tape, x1);
            let t2 = trunk_vars.forward(&mut tape, x2);
            let b1 = branch_vars.forward(&mut tape, x1);
            let b2 = branch_vars.forward(&mut tape, x2);
            let h12 = tape.hadamard(t1.output, b2.output);
            let d12 = tape.col_sum(h12);
            let h21 = tape.hadamard(t2.output, b1.output);
            let d21 = tape.col_sum(h21);
            let s = tape.add(d12, d21);

            // dw * s: broadcast the (1 x B) sum over rows, times constants
            let ones_n = tape.constant(DMatrix::from_element(n, 1, 1.0));
            let s_rows = tape.matmul(ones_n, s);
            let dwc = tape.constant(dw_cols);
            let gate_grad = tape.hadamard(dwc, s_rows);

            // w * (J_t^T b2 + J_b^T t2) via unrolled VJPs
            let ones_p = tape.constant(DMatrix::from_element(net.latent_dim(), 1, 1.0));
            let wc = tape.constant(w_row);
            let w_rows = tape.matmul(ones_p, wc);
            let seed_t = tape.hadamard(b2.output, w_rows);
            let vjp_t = trunk_vars.input_vjp(&mut tape, &t1, seed_t);
            let seed_b = tape.hadamard(t2.output, w_rows);
            let vjp_b = branch_vars.input_vjp(&mut tape, &b1, seed_b);

            let sum1 = tape.add(gate_grad, vjp_t);
            let dv = tape.add(sum1, vjp_b); // (n x B)

            let flat = tape.reshape(dv, n * config.batch, 1);
            let bd = tape.constant(blockdiag);
            let contracted = tape.tr_mul(bd, flat); // (3B x 1)
            let g3 = tape.reshape(contracted, 3, config.batch);
            let phys = tape.scale(g3, net.out_scale);
            let sq = tape.hadamard(phys, phys);
            let norms2 = tape.col_sum(sq);
            let norms = tape.sqrt(norms2);
            let r = tape.shift(norms, -1.0);
            let rsq = tape.hadamard(r, r);
            Some(tape.mean_all(rsq))
        } else {
            None
        };

        let data_val = tape.scalar(data_term);
        let pde_val = pde_term.map_or(0.0, |t| tape.scalar(t));
        let mut root = data_term;
        if let Some(t) = pde_term {
            let w = tape.scale(t, config.pde_weight);
            root = tape.add(root, w);
        }
        let total = tape.scalar(root);
        if !total.is_finite() {
            return Err(DpinnError::NonFiniteLoss {
                iteration,
                data: data_val,
                pde: pde_val,
                boundary: 0.0,
            });
        }
        let mut grads = tape.backward(root);
        let g_t = MlpGrads::from_tape(&net.trunk, &trunk_vars, &mut grads);
        let g_b = MlpGrads::from_tape(&net.branch, &branch_vars, &mut grads);
        adam_step(&mut net.trunk, &mut state_t, &g_t)?;
        adam_step(&mut net.branch, &mut state_b, &g_b)?;

        history.push(LossRecord {
            iteration,
            data: data_val,
            pde: pde_val,
            boundary: 0.0,
            total,
        });
    }

    Ok((net, history))
}

#[cfg(test)]
mod tests;
