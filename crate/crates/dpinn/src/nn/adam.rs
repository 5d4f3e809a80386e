//! ADAM optimizer with the standard defaults and an optional exponential
//! learning-rate decay.

use super::{Mlp, MlpGrads};
use crate::{DpinnError, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LrSchedule {
    Constant { lr: f64 },
    /// lr * gamma^(step / decay_steps)
    ExpDecay { lr: f64, gamma: f64, decay_steps: f64 },
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule::Constant { lr: 1e-3 }
    }
}

impl LrSchedule {
    pub fn exp_decay_default() -> Self {
        LrSchedule::ExpDecay {
            lr: 1e-3,
            gamma: 0.9,
            decay_steps: 2000.0,
        }
    }

    pub fn at(&self, step: usize) -> f64 {
        match *self {
            LrSchedule::Constant { lr } => lr,
            LrSchedule::ExpDecay {
                lr,
                gamma,
                decay_steps,
            } => lr * gamma.powf(step as f64 / decay_steps),
        }
    }
}

/// First/second moment accumulators matching the parameter shapes.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub schedule: LrSchedule,
    pub step: usize,
    m: MlpGrads,
    v: MlpGrads,
}

impl AdamState {
    pub fn new(mlp: &Mlp, schedule: LrSchedule) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            schedule,
            step: 0,
            m: MlpGrads::zeros_like(mlp),
            v: MlpGrads::zeros_like(mlp),
        }
    }
}

/// One ADAM update in place. Rejects non-finite gradients and leaves the
/// parameters finite (checked).
pub fn adam_step(mlp: &mut Mlp, state: &mut AdamState, grads: &MlpGrads) -> Result<()> {
    if !grads.all_finite() {
        return Err(DpinnError::InvalidArgument(
            "non-finite gradients in ADAM step".into(),
        ));
    }
    state.step += 1;
    let t = state.step;
    let lr = state.schedule.at(t - 1);
    let bc1 = 1.0 - state.beta1.powi(t as i32);
    let bc2 = 1.0 - state.beta2.powi(t as i32);
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);

    let update_mat = |p: &mut DMatrix<f64>, m: &mut DMatrix<f64>, v: &mut DMatrix<f64>, g: &DMatrix<f64>| {
        for ((p, m), (v, g)) in p
            .iter_mut()
            .zip(m.iter_mut())
            .zip(v.iter_mut().zip(g.iter()))
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let mh = *m / bc1;
            let vh = *v / bc2;
            *p -= lr * mh / (vh.sqrt() + eps);
        }
    };
    let update_vec = |p: &mut DVector<f64>, m: &mut DVector<f64>, v: &mut DVector<f64>, g: &DVector<f64>| {
        for ((p, m), (v, g)) in p
            .iter_mut()
            .zip(m.iter_mut())
            .zip(v.iter_mut().zip(g.iter()))
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let mh = *m / bc1;
            let vh = *v / bc2;
            *p -= lr * mh / (vh.sqrt() + eps);
        }
    };

    for l in 0..mlp.weights.len() {
        update_mat(
            &mut mlp.weights[l],
            &mut state.m.weights[l],
            &mut state.v.weights[l],
            &grads.weights[l],
        );
        update_vec(
            &mut mlp.biases[l],
            &mut state.m.biases[l],
            &mut state.v.biases[l],
            &grads.biases[l],
        );
    }
    debug_assert!(mlp.all_finite());
    Ok(())
}
