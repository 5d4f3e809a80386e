//! Dense multilayer perceptron: tanh hidden layers, identity output, exact
//! reverse-mode gradients for parameters and inputs, ADAM updates.
//!
//! Batches are stored column-wise (one sample per column). Training code
//! replays the network onto a fresh [`Tape`] each step; the same building
//! blocks expose manually unrolled input-gradient and Laplacian
//! propagations so PDE residuals of both kinds stay differentiable with
//! respect to the parameters.

mod adam;
mod tape;

pub use adam::{adam_step, AdamState, LrSchedule};
pub use tape::{Gradients, Tape, Var};

use crate::{DpinnError, Result};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Fully-connected network parameters.
#[derive(Debug, Clone)]
pub struct Mlp {
    /// `weights[l]` is (fan_out x fan_in)
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases; bit-reproducible per seed.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(DpinnError::InvalidArgument(
                "need at least input and output layer sizes".into(),
            ));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(DpinnError::InvalidArgument("zero-width layer".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(DMatrix::from_fn(fan_out, fan_in, |_, _| {
                rng.gen::<f64>() * 2.0 * limit - limit
            }));
            biases.push(DVector::zeros(fan_out));
        }
        Ok(Self { weights, biases })
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.weights[0].ncols()];
        s.extend(self.weights.iter().map(|w| w.nrows()));
        s
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().unwrap().nrows()
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn param_count(&self) -> usize {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.len() + b.len())
            .sum()
    }

    /// Forward pass; samples are columns of `x`.
    pub fn forward(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.input_dim(), "input width mismatch");
        let last = self.n_layers() - 1;
        let mut a = x.clone();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w * a;
            for mut col in z.column_iter_mut() {
                col += b;
            }
            a = if l < last { z.map(f64::tanh) } else { z };
        }
        a
    }

    /// Exact Jacobian of outputs w.r.t. a single input sample (out x in).
    pub fn input_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let last = self.n_layers() - 1;
        let mut a = x.clone();
        let mut j = DMatrix::identity(self.input_dim(), self.input_dim());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let z = w * &a + b;
            j = w * j;
            if l < last {
                a = z.map(f64::tanh);
                for (r, mut row) in j.row_iter_mut().enumerate() {
                    let t = a[r];
                    row *= 1.0 - t * t;
                }
            } else {
                a = z;
            }
        }
        j
    }

    /// Put parameters on a tape as differentiable leaves.
    pub fn vars_on(&self, tape: &mut Tape) -> MlpVars {
        let weights = self.weights.iter().map(|w| tape.leaf(w.clone())).collect();
        let biases = self
            .biases
            .iter()
            .map(|b| {
                let m = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
                tape.leaf(m)
            })
            .collect();
        MlpVars { weights, biases }
    }

    /// Put parameters on a tape as constants (frozen evaluation).
    pub fn constants_on(&self, tape: &mut Tape) -> MlpVars {
        let weights = self
            .weights
            .iter()
            .map(|w| tape.constant(w.clone()))
            .collect();
        let biases = self
            .biases
            .iter()
            .map(|b| {
                let m = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
                tape.constant(m)
            })
            .collect();
        MlpVars { weights, biases }
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Tape handles of one network's parameters.
#[derive(Debug, Clone)]
pub struct MlpVars {
    pub weights: Vec<Var>,
    pub biases: Vec<Var>,
}

/// Intermediate handles of a forward pass needed by backward-style graphs.
pub struct ForwardTrace {
    /// pre-activations of hidden layers
    pub hidden_z: Vec<Var>,
    pub output: Var,
}

impl MlpVars {
    fn n_layers(&self) -> usize {
        self.weights.len()
    }

    /// Forward pass on the tape; `x` has samples as columns.
    pub fn forward(&self, tape: &mut Tape, x: Var) -> ForwardTrace {
        let last = self.n_layers() - 1;
        let mut a = x;
        let mut hidden_z = Vec::with_capacity(last);
        for l in 0..self.n_layers() {
            let wa = tape.matmul(self.weights[l], a);
            let z = tape.add_col(wa, self.biases[l]);
            if l < last {
                hidden_z.push(z);
                a = tape.tanh(z);
            } else {
                a = z;
            }
        }
        ForwardTrace {
            hidden_z,
            output: a,
        }
    }

    /// Vector-Jacobian product w.r.t. the *network input*, unrolled on the
    /// tape so it stays differentiable w.r.t. the parameters (and the seed).
    ///
    /// `seed` is (out_dim x batch); the result is (in_dim x batch), column b
    /// holding `J_b^T seed_b`.
    pub fn input_vjp(&self, tape: &mut Tape, trace: &ForwardTrace, seed: Var) -> Var {
        let last = self.n_layers() - 1;
        let mut delta = tape.tr_mul(self.weights[last], seed);
        for l in (0..last).rev() {
            let d = tape.tanh_d(trace.hidden_z[l]);
            let e = tape.hadamard(delta, d);
            delta = tape.tr_mul(self.weights[l], e);
        }
        delta
    }

    /// Forward pass carrying first derivatives w.r.t. `dim` input directions.
    ///
    /// `j0` is (in_dim x batch*dim): per sample, the columns are the seed
    /// directions (usually the identity scaled by input normalization).
    /// Returns (output, output jacobian as (out_dim x batch*dim)).
    pub fn forward_with_jacobian(&self, tape: &mut Tape, x: Var, j0: Var, dim: usize) -> (Var, Var) {
        let last = self.n_layers() - 1;
        let mut a = x;
        let mut j = j0;
        for l in 0..self.n_layers() {
            let wa = tape.matmul(self.weights[l], a);
            let z = tape.add_col(wa, self.biases[l]);
            let jz = tape.matmul(self.weights[l], j);
            if l < last {
                a = tape.tanh(z);
                let d = tape.tanh_d(z);
                let dr = tape.repeat_cols(d, dim);
                j = tape.hadamard(dr, jz);
            } else {
                a = z;
                j = jz;
            }
        }
        (a, j)
    }

    /// Forward pass carrying first and second derivatives: returns
    /// (output, jacobian (out x batch*dim), laplacian (out x batch)), where
    /// the laplacian is the trace of the input Hessian per sample, seeded by
    /// orthonormal `j0` directions (times the input scale).
    pub fn forward_with_laplacian(
        &self,
        tape: &mut Tape,
        x: Var,
        j0: Var,
        dim: usize,
    ) -> (Var, Var, Var) {
        let last = self.n_layers() - 1;
        let batch = tape.value(x).ncols();
        let in_dim = tape.value(x).nrows();
        let mut a = x;
        let mut j = j0;
        let mut lap = tape.constant(DMatrix::zeros(in_dim, batch));
        for l in 0..self.n_layers() {
            let wa = tape.matmul(self.weights[l], a);
            let z = tape.add_col(wa, self.biases[l]);
            let jz = tape.matmul(self.weights[l], j);
            let lz = tape.matmul(self.weights[l], lap);
            if l < last {
                a = tape.tanh(z);
                let d1 = tape.tanh_d(z);
                let d2 = tape.tanh_d2(z);
                let jz2 = tape.hadamard(jz, jz);
                let s = tape.sum_col_groups(jz2, dim);
                let t1 = tape.hadamard(d2, s);
                let t2 = tape.hadamard(d1, lz);
                lap = tape.add(t1, t2);
                let dr = tape.repeat_cols(d1, dim);
                j = tape.hadamard(dr, jz);
            } else {
                a = z;
                j = jz;
                lap = lz;
            }
        }
        (a, j, lap)
    }
}

/// Parameter gradients matching [`Mlp`] shapes.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl MlpGrads {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            weights: mlp
                .weights
                .iter()
                .map(|w| DMatrix::zeros(w.nrows(), w.ncols()))
                .collect(),
            biases: mlp.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
        }
    }

    /// Extract this network's gradients from a finished backward sweep.
    pub fn from_tape(mlp: &Mlp, vars: &MlpVars, grads: &mut Gradients) -> Self {
        let weights = vars
            .weights
            .iter()
            .zip(&mlp.weights)
            .map(|(&v, w)| {
                grads
                    .take(v)
                    .unwrap_or_else(|| DMatrix::zeros(w.nrows(), w.ncols()))
            })
            .collect();
        let biases = vars
            .biases
            .iter()
            .zip(&mlp.biases)
            .map(|(&v, b)| match grads.take(v) {
                Some(g) => DVector::from_column_slice(g.as_slice()),
                None => DVector::zeros(b.len()),
            })
            .collect();
        Self { weights, biases }
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Gradients of a scalar loss built by `loss` on a fresh tape.
///
/// Returns the loss value and exact parameter gradients.
pub fn param_gradients(
    mlp: &Mlp,
    loss: impl FnOnce(&mut Tape, &MlpVars) -> Var,
) -> Result<(f64, MlpGrads)> {
    let mut tape = Tape::new();
    let vars = mlp.vars_on(&mut tape);
    let root = loss(&mut tape, &vars);
    let value = tape.scalar(root);
    if !value.is_finite() {
        return Err(DpinnError::InvalidArgument(format!(
            "non-finite loss value {value}"
        )));
    }
    let mut grads = tape.backward(root);
    Ok((value, MlpGrads::from_tape(mlp, &vars, &mut grads)))
}

/// Versioned JSON checkpoint of the raw parameters.
#[derive(serde::Serialize, serde::Deserialize)]
pub struct MlpCheckpoint {
    pub version: u32,
    pub layer_sizes: Vec<usize>,
    /// weights then bias per layer, column-major
    pub params: Vec<f64>,
}

impl Mlp {
    pub fn to_checkpoint(&self) -> MlpCheckpoint {
        let mut params = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            params.extend_from_slice(w.as_slice());
            params.extend_from_slice(b.as_slice());
        }
        MlpCheckpoint {
            version: 1,
            layer_sizes: self.layer_sizes(),
            params,
        }
    }

    pub fn from_checkpoint(ck: &MlpCheckpoint) -> Result<Self> {
        if ck.version != 1 {
            return Err(DpinnError::InvalidArgument(format!(
                "unsupported checkpoint version {}",
                ck.version
            )));
        }
        let mut mlp = Mlp::init(&ck.layer_sizes, 0)?;
        let mut off = 0;
        for (w, b) in mlp.weights.iter_mut().zip(&mut mlp.biases) {
            let wl = w.len();
            w.as_mut_slice().copy_from_slice(&ck.params[off..off + wl]);
            off += wl;
            let bl = b.len();
            b.as_mut_slice().copy_from_slice(&ck.params[off..off + bl]);
            off += bl;
        }
        if off != ck.params.len() {
            return Err(DpinnError::InvalidArgument(
                "checkpoint parameter count mismatch".into(),
            ));
        }
        Ok(mlp)
    }
}

#[cfg(test)]
mod tests;
