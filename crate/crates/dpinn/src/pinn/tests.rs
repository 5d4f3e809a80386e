use super::*;
use crate::fem::{assemble_mass, assemble_stiffness};
use crate::mesh::{generate_coil, generate_square, CoilSpec};
use crate::nn::LrSchedule;
use crate::oracle::geodesic_field;
use crate::spectral::{EigenBasis, EigenSolveOpts};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn zero_model(input_dim: usize, bias: f64) -> PinnModel {
    let mut mlp = Mlp::init(&[input_dim, 4, 1], 0).unwrap();
    for w in &mut mlp.weights {
        w.fill(0.0);
    }
    mlp.biases[1][0] = bias;
    PinnModel::raw(mlp)
}

/// Linear model u(x) = a . x_phys + c on a Cartesian encoder.
fn affine_cartesian_model(encoder: &VertexEncoder, a: [f64; 3], c: f64) -> PinnModel {
    let frame = encoder.cartesian.as_ref().unwrap();
    let dim = frame.dim;
    let mut mlp = Mlp {
        weights: vec![DMatrix::zeros(1, dim)],
        biases: vec![nalgebra::DVector::zeros(1)],
    };
    // u = a . (s * x_norm + center) + c
    let mut bias = c;
    for d in 0..dim {
        mlp.weights[0][(0, d)] = a[d] * frame.scale;
        bias += a[d] * frame.center[d];
    }
    mlp.biases[0][0] = bias;
    PinnModel::raw(mlp)
}

#[test]
fn mse_data_basics() {
    let (mesh, _) = generate_square(0.5).unwrap();
    let encoder = VertexEncoder::build(InputEncoding::Cartesian, &mesh).unwrap();

    // constant-zero model against data of all ones
    let model = zero_model(2, 0.0);
    let data = DataSet {
        observations: (0..5).map(|v| (v, 1.0)).collect(),
        neumann: vec![],
    };
    assert!((mse_data(&model, &encoder, &data).unwrap() - 1.0).abs() < 1e-14);

    // model matching the observations exactly
    let model = zero_model(2, 0.7);
    let data = DataSet {
        observations: (0..5).map(|v| (v, 0.7)).collect(),
        neumann: vec![],
    };
    assert!(mse_data(&model, &encoder, &data).unwrap() < 1e-28);

    // empty data rejected
    assert!(mse_data(&model, &encoder, &DataSet::default()).is_err());
}

#[test]
fn mse_data_matches_naive_loop() {
    let (mesh, _) = generate_square(0.25).unwrap();
    let encoder = VertexEncoder::build(InputEncoding::Cartesian, &mesh).unwrap();
    let mlp = Mlp::init(&[2, 9, 1], 3).unwrap();
    let model = PinnModel {
        mlp,
        out_mu: 0.3,
        out_sigma: 2.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = DataSet {
        observations: (0..20)
            .map(|_| (rng.gen_range(0..mesh.vertex_count()), rng.gen::<f64>()))
            .collect::<std::collections::HashMap<_, _>>()
            .into_iter()
            .collect(),
        neumann: vec![],
    };
    let got = mse_data(&model, &encoder, &data).unwrap();
    let mut expect = 0.0;
    for &(v, u) in &data.observations {
        let x = DMatrix::from_column_slice(2, 1, &encoder.vertex_input(v));
        let out = model.mlp.forward(&x)[(0, 0)];
        let target = (u - model.out_mu) / model.out_sigma;
        expect += (out - target) * (out - target);
    }
    expect /= data.observations.len() as f64;
    assert!((got - expect).abs() < 1e-14 * expect.max(1.0));
}

#[test]
fn eikonal_residual_unit_slope_field() {
    // Exact affine distance field u = x on a flat patch: residual 0.
    let (mesh, _) = generate_square(0.25).unwrap();
    let encoder = VertexEncoder::build(InputEncoding::Cartesian, &mesh).unwrap();
    let model = affine_cartesian_model(&encoder, [1.0, 0.0, 0.0], 3.0);
    let elements: Vec<usize> = (0..mesh.triangle_count()).collect();
    let r = eikonal_residual(&model, &encoder, &mesh, &elements).unwrap();
    assert!(r < 1e-12, "residual {r:.3e}");

    // constant model: residual exactly 1
    let model = zero_model(2, 5.0);
    let r = eikonal_residual(&model, &encoder, &mesh, &elements).unwrap();
    assert!((r - 1.0).abs() < 1e-14);
}

#[test]
fn eikonal_residual_fem_equals_field_route() {
    // For encoded arms the model residual must equal the residual of its
    // predicted nodal field.
    let (mesh, _) = generate_square(0.2).unwrap();
    let a = assemble_stiffness(&mesh);
    let m = assemble_mass(&mesh, false);
    let basis = EigenBasis::solve(&a, &m, 6, &EigenSolveOpts::default()).unwrap();
    let encoder = VertexEncoder::build(InputEncoding::Spectral(&basis), &mesh).unwrap();
    let model = PinnModel {
        mlp: Mlp::init(&[6, 11, 1], 5).unwrap(),
        out_mu: 0.1,
        out_sigma: 1.7,
    };
    let elements: Vec<usize> = (0..mesh.triangle_count()).step_by(3).collect();
    let via_model = eikonal_residual(&model, &encoder, &mesh, &elements).unwrap();
    let field = model.predict_field(&encoder);
    let via_field = eikonal_residual_of_field(&mesh, &field, &elements);
    assert!(
        (via_model - via_field).abs() < 1e-12 * via_field.max(1.0),
        "{via_model} vs {via_field}"
    );
}

#[test]
fn coil_oracle_residual_anchor() {
    // Eikonal residual of the fast-marching oracle over all coil elements
    // sits near the low-percent range reported for exact geodesics.
    let mesh = generate_coil(&CoilSpec::default()).unwrap();
    let field = geodesic_field(&mesh, 77).unwrap();
    let elements: Vec<usize> = (0..mesh.triangle_count()).collect();
    let r = eikonal_residual_of_field(&mesh, &field.distances, &elements);
    assert!(
        (5e-3..6e-2).contains(&r),
        "oracle residual {r:.3e} outside anchor window"
    );
}

#[test]
fn laplace_residual_affine_field() {
    let (mesh, tag) = generate_square(0.25).unwrap();
    let a = assemble_stiffness(&mesh);
    let encoder = VertexEncoder::build(InputEncoding::Cartesian, &mesh).unwrap();
    let boundary = tag.part("dirichlet");
    let interior: Vec<usize> = (0..mesh.vertex_count())
        .filter(|i| boundary.binary_search(i).is_err())
        .collect();

    // FEM route needs an encoded arm; use the field evaluator for the
    // affine check and the model route for consistency.
    let model = affine_cartesian_model(&encoder, [2.0, -1.0, 0.0], 0.3);
    let field = model.predict_field(&encoder);
    let r = laplace_residual_of_field(&a, &field, &interior, None).unwrap();
    assert!(r < 1e-20, "affine laplace residual {r:.3e}");

    // constant field: exactly zero everywhere (row sums vanish)
    let constant = vec![4.2; mesh.vertex_count()];
    let r = laplace_residual_of_field(&a, &constant, &interior, None).unwrap();
    assert!(r == 0.0 || r < 1e-30);

    // Cartesian arm: the network Laplacian of an affine model is zero.
    let spec = ResidualSpec::Laplace {
        stiffness: &a,
        vertices: &interior,
    };
    let r = laplace_residual(&model, &encoder, &spec).unwrap();
    assert!(r < 1e-24, "cartesian affine residual {r:.3e}");
}

#[test]
fn laplace_residual_fem_route_matches_field() {
    let (mesh, tag) = generate_square(0.2).unwrap();
    let a = assemble_stiffness(&mesh);
    let m = assemble_mass(&mesh, false);
    let basis = EigenBasis::solve(&a, &m, 5, &EigenSolveOpts::default()).unwrap();
    let encoder = VertexEncoder::build(InputEncoding::Spectral(&basis), &mesh).unwrap();
    let model = PinnModel {
        mlp: Mlp::init(&[5, 8, 1], 6).unwrap(),
        out_mu: -0.2,
        out_sigma: 0.9,
    };
    let boundary = tag.part("dirichlet");
    let interior: Vec<usize> = (0..mesh.vertex_count())
        .filter(|i| boundary.binary_search(i).is_err())
        .collect();
    let spec = ResidualSpec::Laplace {
        stiffness: &a,
        vertices: &interior,
    };
    let via_model = laplace_residual(&model, &encoder, &spec).unwrap();
    let field = model.predict_field(&encoder);
    let via_field = laplace_residual_of_field(&a, &field, &interior, None).unwrap();
    assert!((via_model - via_field).abs() < 1e-12 * via_field.max(1e-12));
}

#[test]
fn neumann_residual_cases() {
    let (mesh, _) = generate_square(0.25).unwrap();
    let encoder = VertexEncoder::build(InputEncoding::Cartesian, &mesh).unwrap();
    let boundary = mesh.boundary_vertices();

    // constant field, zero flux
    let model = zero_model(2, 2.0);
    let set: Vec<(usize, f64)> = boundary.iter().map(|&v| (v, 0.0)).collect();
    let r = neumann_residual(&model, &encoder, &mesh, &set).unwrap();
    assert!(r < 1e-24);

    // affine field u = 3x: flux +3 on the right edge, -3 on the left
    let model = affine_cartesian_model(&encoder, [3.0, 0.0, 0.0], 0.0);
    let right: Vec<(usize, f64)> = boundary
        .iter()
        .filter(|&&v| mesh.vertex(v)[0] == 1.0 && mesh.vertex(v)[1].abs() < 1.0)
        .map(|&v| (v, 3.0))
        .collect();
    let r = neumann_residual(&model, &encoder, &mesh, &right).unwrap();
    assert!(r < 1e-20, "affine neumann residual {r:.3e}");

    // flux offset by a constant c scores c^2
    let off: Vec<(usize, f64)> = right.iter().map(|&(v, g)| (v, g + 0.5)).collect();
    let r = neumann_residual(&model, &encoder, &mesh, &off).unwrap();
    assert!((r - 0.25).abs() < 1e-10);

    // interior vertex rejected
    let interior = (0..mesh.vertex_count())
        .find(|i| boundary.binary_search(i).is_err())
        .unwrap();
    assert!(neumann_residual(&model, &encoder, &mesh, &[(interior, 0.0)]).is_err());
}

#[test]
fn nmse_conventions() {
    let truth = vec![1.0, 2.0, 3.0, 4.0];
    assert_eq!(nmse(&truth.clone(), &truth).unwrap(), 0.0);
    let mean = vec![2.5; 4];
    assert!((nmse(&mean, &truth).unwrap() - 1.0).abs() < 1e-14);
    assert!(nmse(&vec![0.0; 3], &truth).is_err());
    assert!(nmse(&vec![1.0; 4], &vec![5.0; 4]).is_err());
}

#[test]
fn predict_field_matches_pointwise_forward() {
    let (mesh, _) = generate_square(0.5).unwrap();
    let encoder = VertexEncoder::build(InputEncoding::Cartesian, &mesh).unwrap();
    let model = PinnModel {
        mlp: Mlp::init(&[2, 6, 1], 8).unwrap(),
        out_mu: 1.0,
        out_sigma: 3.0,
    };
    let field = model.predict_field(&encoder);
    assert_eq!(field.len(), mesh.vertex_count());
    for i in 0..mesh.vertex_count() {
        let x = DMatrix::from_column_slice(2, 1, &encoder.vertex_input(i));
        let expect = 3.0 * model.mlp.forward(&x)[(0, 0)] + 1.0;
        assert!((field[i] - expect).abs() < 1e-14);
    }

    let constant = zero_model(2, 0.5);
    let field = constant.predict_field(&encoder);
    assert!(field.iter().all(|&v| (v - 0.5).abs() < 1e-15));
}

#[test]
fn minibatch_residual_is_unbiased() {
    // Averaging the batched Eikonal residual over many random batches
    // approaches the full-mesh value.
    let (mesh, _) = generate_square(0.2).unwrap();
    let a = assemble_stiffness(&mesh);
    let m = assemble_mass(&mesh, false);
    let basis = EigenBasis::solve(&a, &m, 8, &EigenSolveOpts::default()).unwrap();
    let encoder = VertexEncoder::build(InputEncoding::Spectral(&basis), &mesh).unwrap();
    let model = PinnModel {
        mlp: Mlp::init(&[8, 12, 1], 17).unwrap(),
        out_mu: 0.0,
        out_sigma: 1.0,
    };
    let all: Vec<usize> = (0..mesh.triangle_count()).collect();
    let full = eikonal_residual(&model, &encoder, &mesh, &all).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let batches = 3000;
    let mut acc = 0.0;
    for _ in 0..batches {
        let pick: Vec<usize> = rand::seq::index::sample(&mut rng, all.len(), 10)
            .iter()
            .collect();
        acc += eikonal_residual(&model, &encoder, &mesh, &pick).unwrap();
    }
    let mean = acc / batches as f64;
    let rel = (mean - full).abs() / full;
    assert!(rel < 0.02, "batched mean {mean:.5} vs full {full:.5} ({rel:.3})");
}

#[test]
fn train_smoke_and_loss_bookkeeping() {
    let (mesh, _) = generate_square(0.25).unwrap();
    let a = assemble_stiffness(&mesh);
    let m = assemble_mass(&mesh, false);
    let basis = EigenBasis::solve(&a, &m, 9, &EigenSolveOpts::default()).unwrap();
    let boundary = mesh.boundary_vertices();
    let interior: Vec<usize> = (0..mesh.vertex_count())
        .filter(|i| boundary.binary_search(i).is_err())
        .collect();
    let truth: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|v| (v[0] * 1.1).sin() + v[1])
        .collect();
    let data = DataSet::from_field(&boundary, &truth);
    let spec = ResidualSpec::Laplace {
        stiffness: &a,
        vertices: &interior,
    };
    let config = TrainConfig {
        hidden: vec![16],
        iterations: 300,
        batch_data: 8,
        batch_pde: 8,
        seed: 3,
        schedule: LrSchedule::Constant { lr: 1e-3 },
        weights: LossWeights::default(),
        target_norm: TargetNorm::default(),
    };
    let (model, history) = train(&config, &mesh, InputEncoding::Spectral(&basis), &data, &spec).unwrap();
    assert_eq!(history.len(), 300);
    for rec in &history {
        let expect = (config.weights.data * rec.data + config.weights.pde * rec.pde)
            + config.weights.boundary * rec.boundary;
        assert_eq!(rec.total.to_bits(), expect.to_bits(), "bookkeeping at {}", rec.iteration);
    }
    assert!(history.last().unwrap().total < history[0].total);
    assert!(model.mlp.all_finite());

    // determinism
    let (model2, history2) = train(&config, &mesh, InputEncoding::Spectral(&basis), &data, &spec).unwrap();
    assert_eq!(
        history.last().unwrap().total.to_bits(),
        history2.last().unwrap().total.to_bits()
    );
    for (w1, w2) in model.mlp.weights.iter().zip(&model2.mlp.weights) {
        assert_eq!(w1.as_slice(), w2.as_slice());
    }
}

#[test]
fn pde_weight_zero_overfits_training_data() {
    // Pure-regression arm drives the training MSE to (near) zero.
    let (mesh, _) = generate_square(0.2).unwrap();
    let a = assemble_stiffness(&mesh);
    let m = assemble_mass(&mesh, false);
    let basis = EigenBasis::solve(&a, &m, 16, &EigenSolveOpts::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let vertices: Vec<usize> = rand::seq::index::sample(&mut rng, mesh.vertex_count(), 25).into_vec();
    let truth: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|v| (2.0 * v[0]).sin() * (1.5 * v[1]).cos())
        .collect();
    let data = DataSet::from_field(&vertices, &truth);
    let config = TrainConfig {
        hidden: vec![100],
        iterations: 4000,
        batch_data: 25,
        batch_pde: 1,
        seed: 0,
        schedule: LrSchedule::Constant { lr: 1e-3 },
        weights: LossWeights {
            data: 1.0,
            pde: 0.0,
            boundary: 1.0,
        },
        target_norm: TargetNorm::default(),
    };
    let (model, _) = train(&config, &mesh, InputEncoding::Spectral(&basis), &data, &ResidualSpec::None).unwrap();
    let encoder = VertexEncoder::build(InputEncoding::Spectral(&basis), &mesh).unwrap();
    let pred = model.predict_field(&encoder);
    let mut train_mse = 0.0;
    for &v in &vertices {
        train_mse += (pred[v] - truth[v]).powi(2);
    }
    train_mse /= vertices.len() as f64;
    // normalized by target variance to match the data term's units
    let var = {
        let vals: Vec<f64> = vertices.iter().map(|&v| truth[v]).collect();
        let mu = vals.iter().sum::<f64>() / vals.len() as f64;
        vals.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / vals.len() as f64
    };
    assert!(
        train_mse / var < 1e-4,
        "normalized training MSE {:.3e}",
        train_mse / var
    );
}

#[test]
fn train_rejects_bad_batch_sizes() {
    let (mesh, _) = generate_square(0.5).unwrap();
    let truth: Vec<f64> = mesh.vertices().iter().map(|v| v[0]).collect();
    let data = DataSet::from_field(&[0, 1, 2], &truth);
    let config = TrainConfig {
        batch_data: 10, // > 3 observations
        iterations: 5,
        ..TrainConfig::default()
    };
    assert!(matches!(
        train(&config, &mesh, InputEncoding::Cartesian, &data, &ResidualSpec::None),
        Err(DpinnError::Config(_))
    ));
}

use nalgebra::DMatrix;

