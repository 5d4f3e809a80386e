//! Mini-batch ADAM training over the composed loss.

use super::{
    build_data_term, build_eikonal_term, build_laplace_term, build_neumann_term, DataSet,
    InputEncoding, LossWeights, PinnModel, ResidualSpec, VertexEncoder,
};
use crate::mesh::TriMesh;
use crate::nn::{adam_step, AdamState, LrSchedule, Mlp, MlpGrads, Tape};
use crate::{DpinnError, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    /// hidden layer widths (input/output sizes are inferred)
    pub hidden: Vec<usize>,
    pub iterations: usize,
    pub batch_data: usize,
    pub batch_pde: usize,
    pub seed: u64,
    pub schedule: LrSchedule,
    pub weights: LossWeights,
    pub target_norm: super::TargetNorm,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![100],
            iterations: 10_000,
            batch_data: 10,
            batch_pde: 10,
            seed: 0,
            schedule: LrSchedule::default(),
            weights: LossWeights::default(),
            target_norm: super::TargetNorm::default(),
        }
    }
}

/// Loss terms of one iteration. The recorded total is exactly
/// `(w_data * data + w_pde * pde) + w_boundary * boundary`.
#[derive(Debug, Clone, Copy)]
pub struct LossRecord {
    pub iteration: usize,
    pub data: f64,
    pub pde: f64,
    pub boundary: f64,
    pub total: f64,
}

/// Train a network on the given encoding, observations, and PDE residual.
///
/// Output normalization constants come from the observations; mini-batches
/// are drawn without replacement each iteration from a seeded generator, so
/// runs are bit-reproducible.
pub fn train(
    config: &TrainConfig,
    mesh: &TriMesh,
    encoding: InputEncoding,
    data: &DataSet,
    residual: &ResidualSpec,
) -> Result<(PinnModel, Vec<LossRecord>)> {
    let encoder = VertexEncoder::build(encoding, mesh)?;
    train_with_encoder(config, mesh, &encoder, data, residual)
}

pub(crate) fn train_with_encoder(
    config: &TrainConfig,
    mesh: &TriMesh,
    encoder: &VertexEncoder,
    data: &DataSet,
    residual: &ResidualSpec,
) -> Result<(PinnModel, Vec<LossRecord>)> {
    data.validate(mesh.vertex_count())?;
    if data.observations.is_empty() {
        return Err(DpinnError::InvalidArgument(
            "training needs at least one observation".into(),
        ));
    }
    if config.iterations == 0 {
        return Err(DpinnError::Config("iterations must be positive".into()));
    }
    let n_data = data.observations.len();
    if config.batch_data == 0 || config.batch_data > n_data {
        return Err(DpinnError::Config(format!(
            "data batch size {} out of range 1..={n_data}",
            config.batch_data
        )));
    }
    let pde_population = match residual {
        ResidualSpec::Eikonal { elements } => elements.len(),
        ResidualSpec::Laplace { vertices, .. } => vertices.len(),
        ResidualSpec::Poisson { vertices, .. } => vertices.len(),
        ResidualSpec::None => 0,
    };
    let use_pde = config.weights.pde != 0.0 && pde_population > 0;
    if use_pde && config.batch_pde > pde_population {
        return Err(DpinnError::Config(format!(
            "pde batch size {} exceeds population {pde_population}",
            config.batch_pde
        )));
    }
    let use_boundary = config.weights.boundary != 0.0 && !data.neumann.is_empty();

    let mut sizes = vec![encoder.input_dim()];
    sizes.extend_from_slice(&config.hidden);
    sizes.push(1);
    let mlp = Mlp::init(&sizes, config.seed)?;
    let mut model = PinnModel::raw(mlp).fit_output_scale(data, config.target_norm);

    let mut state = AdamState::new(&model.mlp, config.schedule);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut history = Vec::with_capacity(config.iterations);

    for iteration in 0..config.iterations {
        let data_pick = rand::seq::index::sample(&mut rng, n_data, config.batch_data);
        let batch_vertices: Vec<usize> = data_pick
            .iter()
            .map(|k| data.observations[k].0)
            .collect();
        let batch_values: Vec<f64> = data_pick
            .iter()
            .map(|k| data.observations[k].1)
            .collect();

        let pde_pick: Vec<usize> = if use_pde {
            rand::seq::index::sample(&mut rng, pde_population, config.batch_pde).into_vec()
        } else {
            Vec::new()
        };
        let boundary_batch: Vec<(usize, f64)> = if use_boundary {
            let b = config.batch_data.min(data.neumann.len());
            rand::seq::index::sample(&mut rng, data.neumann.len(), b)
                .iter()
                .map(|k| data.neumann[k])
                .collect()
        } else {
            Vec::new()
        };

        // build the loss graph
        let mut tape = Tape::new();
        let vars = model.mlp.vars_on(&mut tape);
        let data_term = build_data_term(
            &mut tape,
            &vars,
            &model,
            encoder,
            &batch_vertices,
            &batch_values,
        );
        let pde_term = if use_pde {
            Some(match residual {
                ResidualSpec::Eikonal { elements } => {
                    let batch: Vec<usize> = pde_pick.iter().map(|&k| elements[k]).collect();
                    build_eikonal_term(&mut tape, &vars, &model, encoder, mesh, &batch)?
                }
                ResidualSpec::Laplace {
                    stiffness,
                    vertices,
                } => {
                    let batch: Vec<usize> = pde_pick.iter().map(|&k| vertices[k]).collect();
                    let spec = ResidualSpec::Laplace {
                        stiffness,
                        vertices: &batch,
                    };
                    build_laplace_term(&mut tape, &vars, &model, encoder, &spec)?
                }
                ResidualSpec::Poisson {
                    stiffness,
                    vertices,
                    load,
                    f_raw,
                } => {
                    let batch: Vec<usize> = pde_pick.iter().map(|&k| vertices[k]).collect();
                    let spec = ResidualSpec::Poisson {
                        stiffness,
                        vertices: &batch,
                        load,
                        f_raw,
                    };
                    build_laplace_term(&mut tape, &vars, &model, encoder, &spec)?
                }
                ResidualSpec::None => unreachable!(),
            })
        } else {
            None
        };
        let boundary_term = if use_boundary {
            Some(build_neumann_term(
                &mut tape,
                &vars,
                &model,
                encoder,
                mesh,
                &boundary_batch,
            )?)
        } else {
            None
        };

        let data_val = tape.scalar(data_term);
        let pde_val = pde_term.map_or(0.0, |t| tape.scalar(t));
        let boundary_val = boundary_term.map_or(0.0, |t| tape.scalar(t));

        let mut root = tape.scale(data_term, config.weights.data);
        if let Some(t) = pde_term {
            let w = tape.scale(t, config.weights.pde);
            root = tape.add(root, w);
        }
        if let Some(t) = boundary_term {
            let w = tape.scale(t, config.weights.boundary);
            root = tape.add(root, w);
        }
        let total = tape.scalar(root);
        if !total.is_finite() {
            return Err(DpinnError::NonFiniteLoss {
                iteration,
                data: data_val,
                pde: pde_val,
                boundary: boundary_val,
            });
        }

        let mut grads = tape.backward(root);
        let grads = MlpGrads::from_tape(&model.mlp, &vars, &mut grads);
        adam_step(&mut model.mlp, &mut state, &grads)?;

        history.push(LossRecord {
            iteration,
            data: data_val,
            pde: pde_val,
            boundary: boundary_val,
            total,
        });
    }

    Ok((model, history))
}
