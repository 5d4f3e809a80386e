use super::*;
use crate::fem::{assemble_mass, assemble_stiffness};
use crate::mesh::generate_sphere;
use crate::spectral::EigenSolveOpts;
use rand_chacha::ChaCha8Rng;

fn random_encoding(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    // constant-mode-like first entry keeps norms bounded away from zero
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    v[0] = 1.0 + rng.gen::<f64>();
    v
}

#[test]
fn wrapper_identities_hold_for_random_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for draw in 0..200 {
        let net = GeodesicNet {
            trunk: Mlp::init(&[6, 9, 5], draw).unwrap(),
            branch: Mlp::init(&[6, 9, 5], draw + 10_000).unwrap(),
            out_scale: 1.0 + draw as f64 * 0.01,
        };
        let v1 = random_encoding(6, &mut rng);
        let v2 = random_encoding(6, &mut rng);
        // exact zero on the diagonal
        let dvv = predict_distance(&net, &v1, &v1).unwrap();
        assert_eq!(dvv.to_bits(), 0.0f64.to_bits(), "draw {draw}");
        // bit-exact symmetry
        let d12 = predict_distance(&net, &v1, &v2).unwrap();
        let d21 = predict_distance(&net, &v2, &v1).unwrap();
        assert_eq!(d12.to_bits(), d21.to_bits(), "draw {draw}");
    }
}

#[test]
fn predict_matches_direct_formula_transcription() {
    // Independent evaluation: cosine form of the gate and explicit loops
    // over the latent dot products.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let net = GeodesicNet {
        trunk: Mlp::init(&[5, 8, 4], 1).unwrap(),
        branch: Mlp::init(&[5, 8, 4], 2).unwrap(),
        out_scale: 2.5,
    };
    for _ in 0..50 {
        let v1 = random_encoding(5, &mut rng);
        let v2 = random_encoding(5, &mut rng);
        let got = predict_distance(&net, &v1, &v2).unwrap();

        let fwd = |mlp: &Mlp, v: &[f64]| -> Vec<f64> {
            let x = nalgebra::DMatrix::from_column_slice(v.len(), 1, v);
            mlp.forward(&x).column(0).iter().copied().collect()
        };
        let t1 = fwd(&net.trunk, &v1);
        let t2 = fwd(&net.trunk, &v2);
        let b1 = fwd(&net.branch, &v1);
        let b2 = fwd(&net.branch, &v2);
        let dbar12: f64 = t1.iter().zip(&b2).map(|(a, b)| a * b).sum();
        let dbar21: f64 = t2.iter().zip(&b1).map(|(a, b)| a * b).sum();
        let dot: f64 = v1.iter().zip(&v2).map(|(a, b)| a * b).sum();
        let n1: f64 = v1.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n2: f64 = v2.iter().map(|x| x * x).sum::<f64>().sqrt();
        let w = 0.5 * (1.0 - dot / (n1 * n2));
        let expect = net.out_scale * w * (dbar12 + dbar21);
        assert!(
            (got - expect).abs() <= 1e-12 * expect.abs().max(1.0),
            "{got} vs {expect}"
        );
    }
}

fn sphere_setup(modes: usize) -> (crate::mesh::TriMesh, VertexEncoder) {
    let mesh = generate_sphere(1.0, 10, 12).unwrap();
    let a = assemble_stiffness(&mesh);
    let m = assemble_mass(&mesh, false);
    let basis = crate::spectral::EigenBasis::solve(&a, &m, modes, &EigenSolveOpts::default()).unwrap();
    let encoder = VertexEncoder::build(InputEncoding::Spectral(&basis), &mesh).unwrap();
    (mesh, encoder)
}

#[test]
fn surface_gradient_matches_finite_differences_and_is_tangent() {
    let (mesh, encoder) = sphere_setup(8);
    let net = GeodesicNet {
        trunk: Mlp::init(&[8, 12, 6], 3).unwrap(),
        branch: Mlp::init(&[8, 12, 6], 4).unwrap(),
        out_scale: 1.3,
    };
    let mut grads = EncodingGradients::new(&mesh);
    let v2 = encoder.vertex_input(17);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let t = rng.gen_range(0..mesh.triangle_count());
        let g = surface_gradient(&net, &mesh, &encoder, &mut grads, t, &v2).unwrap();
        let (_, _, normal) = mesh.triangle_geometry(t);

        // tangency by construction
        let gn = crate::mesh::norm(g);
        assert!(crate::mesh::dot(g, normal).abs() <= 1e-10 * gn.max(1e-12));

        // finite differences along two in-plane directions: the encoding is
        // linear over the element, v(x + h u) = v(x) + h G u.
        let [i, j, _] = mesh.triangle(t);
        let u1 = {
            let e = crate::mesh::sub(mesh.vertex(j), mesh.vertex(i));
            let n = crate::mesh::norm(e);
            [e[0] / n, e[1] / n, e[2] / n]
        };
        let u2 = crate::mesh::cross(normal, u1);
        let gmat = grads.get(&mesh, &encoder, t).clone();
        let v1 = centroid_encoding(&mesh, &encoder, t);
        let h = 1e-6;
        for u in [u1, u2] {
            let shift: Vec<f64> = (0..v1.len())
                .map(|r| gmat[(r, 0)] * u[0] + gmat[(r, 1)] * u[1] + gmat[(r, 2)] * u[2])
                .collect();
            let vp: Vec<f64> = v1.iter().zip(&shift).map(|(a, s)| a + h * s).collect();
            let vm: Vec<f64> = v1.iter().zip(&shift).map(|(a, s)| a - h * s).collect();
            let fd = (predict_distance(&net, &vp, &v2).unwrap()
                - predict_distance(&net, &vm, &v2).unwrap())
                / (2.0 * h);
            let directional = crate::mesh::dot(g, u);
            assert!(
                (fd - directional).abs() <= 1e-5 * fd.abs().max(directional.abs()).max(1e-8),
                "triangle {t}: fd {fd} vs {directional}"
            );
        }
    }
}

#[test]
fn surface_gradient_reduces_to_gate_term_for_constant_nets() {
    // Zero-weight trunk/branch output only biases, so the network Jacobian
    // part vanishes and the gradient is the gate derivative alone.
    let (mesh, encoder) = sphere_setup(6);
    let mut net = GeodesicNet {
        trunk: Mlp::init(&[6, 5, 3], 8).unwrap(),
        branch: Mlp::init(&[6, 5, 3], 9).unwrap(),
        out_scale: 1.0,
    };
    for w in net.trunk.weights.iter_mut().chain(net.branch.weights.iter_mut()) {
        w.fill(0.0);
    }
    net.trunk.biases[1].fill(0.4);
    net.branch.biases[1].fill(-0.9);
    let s = 2.0 * 3.0 * 0.4 * -0.9; // dbar12 + dbar21, both constant

    let mut grads = EncodingGradients::new(&mesh);
    let v2 = encoder.vertex_input(3);
    let t = 12;
    let g = surface_gradient(&net, &mesh, &encoder, &mut grads, t, &v2).unwrap();
    let v1 = centroid_encoding(&mesh, &encoder, t);
    let (_, dw) = super::gate_and_gradient(&v1, &v2);
    let gmat = grads.get(&mesh, &encoder, t).clone();
    for d in 0..3 {
        let expect: f64 = (0..v1.len()).map(|r| dw[r] * s * gmat[(r, d)]).sum();
        assert!((g[d] - expect).abs() < 1e-12 * expect.abs().max(1.0));
    }
}

#[test]
fn train_geodesic_smoke_and_determinism() {
    let mesh = generate_sphere(1.0, 8, 10).unwrap();
    let a = assemble_stiffness(&mesh);
    let m = assemble_mass(&mesh, false);
    let basis = crate::spectral::EigenBasis::solve(&a, &m, 10, &EigenSolveOpts::default()).unwrap();
    let pairs = crate::oracle::sample_pairs(&mesh, 150, 3).unwrap();
    let config = GeodesicTrainConfig {
        hidden: vec![24, 24],
        latent: 16,
        iterations: 250,
        batch: 8,
        seed: 1,
        schedule: LrSchedule::Constant { lr: 1e-3 },
        pde_weight: 1.0,
    };
    let (net, hist) = train_geodesic(&config, &mesh, &basis, &pairs).unwrap();
    assert_eq!(hist.len(), 250);
    assert!(hist.last().unwrap().total < hist[0].total);
    assert!(net.trunk.all_finite() && net.branch.all_finite());
    for rec in &hist {
        let expect = rec.data + config.pde_weight * rec.pde;
        assert_eq!(rec.total.to_bits(), expect.to_bits());
    }

    let (net2, hist2) = train_geodesic(&config, &mesh, &basis, &pairs).unwrap();
    assert_eq!(
        hist.last().unwrap().total.to_bits(),
        hist2.last().unwrap().total.to_bits()
    );
    for (w1, w2) in net.trunk.weights.iter().zip(&net2.trunk.weights) {
        assert_eq!(w1.as_slice(), w2.as_slice());
    }
}

#[test]
fn trace_trivial_and_smoke() {
    let (mesh, encoder) = sphere_setup(8);
    let net = GeodesicNet {
        trunk: Mlp::init(&[8, 16, 8], 21).unwrap(),
        branch: Mlp::init(&[8, 16, 8], 22).unwrap(),
        out_scale: 1.0,
    };
    // identical endpoints: single-point path
    let path = trace_geodesic(&net, &mesh, &encoder, 5, 5, 0.05, 100).unwrap();
    assert_eq!(path.points.len(), 1);
    assert!(path.reached);

    // untrained net: walk must stay on the surface and terminate
    let path = trace_geodesic(&net, &mesh, &encoder, 2, 60, 0.05, 400).unwrap();
    for p in &path.points {
        let r = crate::mesh::norm(*p);
        assert!(r < 1.02 + 0.05, "point left the surface: radius {r}");
    }
    assert!(path.points.len() <= 2 + 400 * 65);
}
