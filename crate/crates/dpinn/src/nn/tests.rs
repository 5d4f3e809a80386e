use super::*;
use rand_chacha::ChaCha8Rng;

fn rand_vec(n: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen::<f64>() * 2.0 - 1.0)
}

#[test]
fn init_is_deterministic_and_shaped() {
    let a = Mlp::init(&[50, 100, 1], 0).unwrap();
    let b = Mlp::init(&[50, 100, 1], 0).unwrap();
    for (wa, wb) in a.weights.iter().zip(&b.weights) {
        assert_eq!(wa.as_slice(), wb.as_slice());
    }
    let c = Mlp::init(&[50, 100, 1], 1).unwrap();
    assert_ne!(a.weights[0].as_slice(), c.weights[0].as_slice());

    // architectures used by the experiments
    let deep = Mlp::init(&[50, 100, 100, 100, 1], 7).unwrap();
    assert_eq!(deep.layer_sizes(), vec![50, 100, 100, 100, 1]);
    let trunk = Mlp::init(&[50, 200, 200, 200, 200, 200, 200, 200, 200, 200, 200, 200], 7).unwrap();
    assert_eq!(trunk.n_layers(), 11);
    assert!(Mlp::init(&[10], 0).is_err());
    assert!(Mlp::init(&[], 0).is_err());
}

#[test]
fn zero_weight_model_outputs_bias() {
    let mut mlp = Mlp::init(&[3, 4, 2], 0).unwrap();
    for w in &mut mlp.weights {
        w.fill(0.0);
    }
    mlp.biases[1][0] = 1.25;
    mlp.biases[1][1] = -0.5;
    let x = DMatrix::from_fn(3, 5, |r, c| (r + c) as f64);
    let y = mlp.forward(&x);
    for c in 0..5 {
        assert_eq!(y[(0, c)], 1.25);
        assert_eq!(y[(1, c)], -0.5);
    }
}

#[test]
fn batched_forward_equals_per_sample() {
    let mlp = Mlp::init(&[4, 7, 3], 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let batch = DMatrix::from_fn(4, 6, |_, _| rng.gen::<f64>() - 0.5);
    let all = mlp.forward(&batch);
    for c in 0..6 {
        let col = DMatrix::from_column_slice(4, 1, batch.column(c).as_slice());
        let single = mlp.forward(&col);
        for r in 0..3 {
            assert_eq!(all[(r, c)], single[(r, 0)]);
        }
    }
}

#[test]
fn forward_matches_naive_oracle() {
    // Straightforward per-layer loop with explicit indexing.
    let mlp = Mlp::init(&[5, 8, 8, 2], 11).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x = rand_vec(5, &mut rng);
    let out = mlp.forward(&DMatrix::from_column_slice(5, 1, x.as_slice()));

    let mut a: Vec<f64> = x.iter().copied().collect();
    for l in 0..mlp.n_layers() {
        let w = &mlp.weights[l];
        let mut z = vec![0.0; w.nrows()];
        for r in 0..w.nrows() {
            let mut acc = mlp.biases[l][r];
            for c in 0..w.ncols() {
                acc += w[(r, c)] * a[c];
            }
            z[r] = acc;
        }
        a = if l + 1 < mlp.n_layers() {
            z.iter().map(|v| v.tanh()).collect()
        } else {
            z
        };
    }
    for r in 0..2 {
        assert!((out[(r, 0)] - a[r]).abs() < 1e-14);
    }
}

#[test]
fn hand_backprop_2_2_1() {
    // loss = 0.5 * out^2 on one sample; gradients worked out by hand.
    let mut mlp = Mlp::init(&[2, 2, 1], 0).unwrap();
    mlp.weights[0] = DMatrix::from_row_slice(2, 2, &[0.3, -0.2, 0.5, 0.7]);
    mlp.biases[0] = DVector::from_column_slice(&[0.1, -0.3]);
    mlp.weights[1] = DMatrix::from_row_slice(1, 2, &[0.9, -1.1]);
    mlp.biases[1] = DVector::from_column_slice(&[0.25]);
    let x = [0.4, -0.6];

    let z1: [f64; 2] = [
        0.3 * x[0] - 0.2 * x[1] + 0.1,
        0.5 * x[0] + 0.7 * x[1] - 0.3,
    ];
    let a1 = [z1[0].tanh(), z1[1].tanh()];
    let out = 0.9 * a1[0] - 1.1 * a1[1] + 0.25;
    let dout = out; // d(0.5 out^2)/d out
    let dw2 = [dout * a1[0], dout * a1[1]];
    let db2 = dout;
    let delta = [
        dout * 0.9 * (1.0 - a1[0] * a1[0]),
        dout * -1.1 * (1.0 - a1[1] * a1[1]),
    ];
    let dw1 = [
        [delta[0] * x[0], delta[0] * x[1]],
        [delta[1] * x[0], delta[1] * x[1]],
    ];

    let (loss, grads) = param_gradients(&mlp, |tape, vars| {
        let xc = tape.constant(DMatrix::from_column_slice(2, 1, &x));
        let trace = vars.forward(tape, xc);
        let sq = tape.hadamard(trace.output, trace.output);
        let s = tape.sum_all(sq);
        tape.scale(s, 0.5)
    })
    .unwrap();

    assert!((loss - 0.5 * out * out).abs() < 1e-14);
    assert!((grads.weights[1][(0, 0)] - dw2[0]).abs() < 1e-13);
    assert!((grads.weights[1][(0, 1)] - dw2[1]).abs() < 1e-13);
    assert!((grads.biases[1][0] - db2).abs() < 1e-13);
    for r in 0..2 {
        for c in 0..2 {
            assert!((grads.weights[0][(r, c)] - dw1[r][c]).abs() < 1e-13);
        }
        assert!((grads.biases[0][r] - delta[r]).abs() < 1e-13);
    }
}

#[test]
fn gradient_at_optimum_is_zero() {
    // Constant-target MSE with the model already matching the target.
    let mut mlp = Mlp::init(&[3, 4, 1], 0).unwrap();
    for w in &mut mlp.weights {
        w.fill(0.0);
    }
    mlp.biases[1][0] = 2.0;
    let (_, grads) = param_gradients(&mlp, |tape, vars| {
        let x = tape.constant(DMatrix::from_element(3, 8, 0.7));
        let trace = vars.forward(tape, x);
        let t = tape.constant(DMatrix::from_element(1, 8, 2.0));
        let d = tape.sub(trace.output, t);
        let sq = tape.hadamard(d, d);
        tape.mean_all(sq)
    })
    .unwrap();
    for w in &grads.weights {
        assert!(w.iter().all(|v| v.abs() < 1e-14));
    }
}

/// Central-difference check of parameter gradients for a squared-output
/// loss over a small batch. `count` parameters sampled per architecture.
fn fd_param_check(sizes: &[usize], seed: u64, count: usize) {
    let mlp = Mlp::init(sizes, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let batch = DMatrix::from_fn(sizes[0], 4, |_, _| rng.gen::<f64>() * 2.0 - 1.0);

    let loss_of = |m: &Mlp| -> f64 {
        let out = m.forward(&batch);
        out.map(|v| v * v).sum() / out.ncols() as f64
    };
    let (_, grads) = param_gradients(&mlp, |tape, vars| {
        let x = tape.constant(batch.clone());
        let trace = vars.forward(tape, x);
        let sq = tape.hadamard(trace.output, trace.output);
        let s = tape.sum_all(sq);
        tape.scale(s, 1.0 / batch.ncols() as f64)
    })
    .unwrap();

    let h = 1e-6;
    for _ in 0..count {
        let l = rng.gen_range(0..mlp.n_layers());
        let into_weights = rng.gen_bool(0.8);
        let (r, c) = if into_weights {
            let w = &mlp.weights[l];
            (rng.gen_range(0..w.nrows()), rng.gen_range(0..w.ncols()))
        } else {
            (rng.gen_range(0..mlp.biases[l].len()), 0)
        };
        let mut plus = mlp.clone();
        let mut minus = mlp.clone();
        if into_weights {
            plus.weights[l][(r, c)] += h;
            minus.weights[l][(r, c)] -= h;
        } else {
            plus.biases[l][r] += h;
            minus.biases[l][r] -= h;
        }
        let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
        let an = if into_weights {
            grads.weights[l][(r, c)]
        } else {
            grads.biases[l][r]
        };
        let scale = fd.abs().max(an.abs()).max(1e-8);
        assert!(
            (fd - an).abs() / scale <= 1e-5,
            "{sizes:?} layer {l} ({r},{c}): analytic {an} vs fd {fd}"
        );
    }
}

#[test]
fn param_gradients_match_finite_differences() {
    fd_param_check(&[5, 20, 1], 1, 100);
    fd_param_check(&[3, 10, 10, 1], 2, 100);
    fd_param_check(&[8, 16, 16, 16, 2], 3, 100);
}

#[test]
fn input_jacobian_linear_model_is_weight_product() {
    let mut mlp = Mlp::init(&[3, 3, 2], 0).unwrap();
    // Saturating tanh near zero is identity-like only for tiny weights, so
    // check the exact composition instead: J = W2 diag(tanh') W1 at x.
    let x = rand_vec(3, &mut ChaCha8Rng::seed_from_u64(2));
    let j = mlp.input_jacobian(&x);
    let z1 = &mlp.weights[0] * &x + &mlp.biases[0];
    let mut d = DMatrix::zeros(3, 3);
    for r in 0..3 {
        let t = z1[r].tanh();
        d[(r, r)] = 1.0 - t * t;
    }
    let expect = &mlp.weights[1] * d * &mlp.weights[0];
    assert!((j - &expect).abs().max() < 1e-13);

    // Pure linear stack (single layer): exactly the weight matrix.
    mlp.weights.truncate(1);
    mlp.biases.truncate(1);
    let j = mlp.input_jacobian(&x);
    assert_eq!(j.nrows(), 3);
    assert!((j - &mlp.weights[0]).abs().max() < 1e-15);
}

#[test]
fn input_jacobian_matches_finite_differences() {
    let mlp = Mlp::init(&[6, 14, 14, 2], 21).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let x = rand_vec(6, &mut rng);
        let j = mlp.input_jacobian(&x);
        let h = 1e-6;
        for c in 0..6 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            let fp = mlp.forward(&DMatrix::from_column_slice(6, 1, xp.as_slice()));
            let fm = mlp.forward(&DMatrix::from_column_slice(6, 1, xm.as_slice()));
            for r in 0..2 {
                let fd = (fp[(r, 0)] - fm[(r, 0)]) / (2.0 * h);
                let scale = fd.abs().max(j[(r, c)].abs()).max(1e-8);
                assert!((fd - j[(r, c)]).abs() / scale <= 1e-5);
            }
        }
    }
}

#[test]
fn input_jacobian_saturates_to_zero() {
    let mlp = Mlp::init(&[2, 8, 1], 4).unwrap();
    let x = DVector::from_column_slice(&[1e4, -1e4]);
    let j = mlp.input_jacobian(&x);
    assert!(j.abs().max() < 1e-12);
}

#[test]
fn tape_jacobian_propagation_matches_direct() {
    let mlp = Mlp::init(&[4, 9, 9, 1], 31).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let batch = DMatrix::from_fn(4, 3, |_, _| rng.gen::<f64>() - 0.5);

    let mut tape = Tape::new();
    let vars = mlp.constants_on(&mut tape);
    let x = tape.constant(batch.clone());
    // identity seeds per sample
    let mut j0 = DMatrix::zeros(4, 3 * 4);
    for b in 0..3 {
        for d in 0..4 {
            j0[(d, b * 4 + d)] = 1.0;
        }
    }
    let j0 = tape.constant(j0);
    let (_, j) = vars.forward_with_jacobian(&mut tape, x, j0, 4);
    let jv = tape.value(j).clone();

    for b in 0..3 {
        let direct = mlp.input_jacobian(&batch.column(b).into_owned());
        for d in 0..4 {
            assert!((jv[(0, b * 4 + d)] - direct[(0, d)]).abs() < 1e-13);
        }
    }
}

#[test]
fn tape_vjp_matches_jacobian_transpose() {
    let mlp = Mlp::init(&[5, 12, 3], 41).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let batch = DMatrix::from_fn(5, 4, |_, _| rng.gen::<f64>() - 0.5);
    let seed = DMatrix::from_fn(3, 4, |_, _| rng.gen::<f64>() - 0.5);

    let mut tape = Tape::new();
    let vars = mlp.constants_on(&mut tape);
    let x = tape.constant(batch.clone());
    let trace = vars.forward(&mut tape, x);
    let s = tape.constant(seed.clone());
    let vjp = vars.input_vjp(&mut tape, &trace, s);
    let got = tape.value(vjp).clone();

    for b in 0..4 {
        let j = mlp.input_jacobian(&batch.column(b).into_owned());
        let expect = j.transpose() * seed.column(b);
        for d in 0..5 {
            assert!((got[(d, b)] - expect[d]).abs() < 1e-12);
        }
    }
}

#[test]
fn tape_laplacian_matches_finite_differences() {
    let mlp = Mlp::init(&[2, 10, 10, 1], 51).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let batch = DMatrix::from_fn(2, 5, |_, _| rng.gen::<f64>() - 0.5);

    let mut tape = Tape::new();
    let vars = mlp.constants_on(&mut tape);
    let x = tape.constant(batch.clone());
    let mut j0 = DMatrix::zeros(2, 5 * 2);
    for b in 0..5 {
        j0[(0, b * 2)] = 1.0;
        j0[(1, b * 2 + 1)] = 1.0;
    }
    let j0 = tape.constant(j0);
    let (_, _, lap) = vars.forward_with_laplacian(&mut tape, x, j0, 2);
    let got = tape.value(lap).clone();

    let f = |x0: f64, x1: f64| {
        mlp.forward(&DMatrix::from_column_slice(2, 1, &[x0, x1]))[(0, 0)]
    };
    let h = 1e-4;
    for b in 0..5 {
        let (x0, x1) = (batch[(0, b)], batch[(1, b)]);
        let lap_fd = (f(x0 + h, x1) + f(x0 - h, x1) + f(x0, x1 + h) + f(x0, x1 - h)
            - 4.0 * f(x0, x1))
            / (h * h);
        assert!(
            (got[(0, b)] - lap_fd).abs() < 1e-5 * (lap_fd.abs() + 1.0),
            "sample {b}: {} vs {lap_fd}",
            got[(0, b)]
        );
    }
}

#[test]
fn laplacian_loss_param_gradient_matches_fd() {
    // Second-order path: gradient w.r.t. parameters of a loss containing the
    // network Laplacian, checked against finite differences of the whole loss.
    let mlp = Mlp::init(&[2, 8, 8, 1], 61).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    let batch = DMatrix::from_fn(2, 4, |_, _| rng.gen::<f64>() - 0.5);

    let build = |tape: &mut Tape, vars: &MlpVars, batch: &DMatrix<f64>| {
        let x = tape.constant(batch.clone());
        let mut j0 = DMatrix::zeros(2, batch.ncols() * 2);
        for b in 0..batch.ncols() {
            j0[(0, b * 2)] = 1.0;
            j0[(1, b * 2 + 1)] = 1.0;
        }
        let j0 = tape.constant(j0);
        let (_, _, lap) = vars.forward_with_laplacian(tape, x, j0, 2);
        let sq = tape.hadamard(lap, lap);
        tape.mean_all(sq)
    };

    let (_, grads) = param_gradients(&mlp, |tape, vars| build(tape, vars, &batch)).unwrap();

    let loss_of = |m: &Mlp| -> f64 {
        let mut tape = Tape::new();
        let vars = m.constants_on(&mut tape);
        let root = build(&mut tape, &vars, &batch);
        tape.scalar(root)
    };
    let h = 1e-6;
    for _ in 0..40 {
        let l = rng.gen_range(0..mlp.n_layers());
        let w = &mlp.weights[l];
        let (r, c) = (rng.gen_range(0..w.nrows()), rng.gen_range(0..w.ncols()));
        let mut plus = mlp.clone();
        let mut minus = mlp.clone();
        plus.weights[l][(r, c)] += h;
        minus.weights[l][(r, c)] -= h;
        let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
        let an = grads.weights[l][(r, c)];
        let scale = fd.abs().max(an.abs()).max(1e-6);
        assert!(
            (fd - an).abs() / scale <= 2e-5,
            "layer {l} ({r},{c}): {an} vs fd {fd}"
        );
    }
}

#[test]
fn adam_zero_gradients_keep_parameters() {
    let mut mlp = Mlp::init(&[3, 5, 1], 0).unwrap();
    let before = mlp.clone();
    let mut state = AdamState::new(&mlp, LrSchedule::default());
    let grads = MlpGrads::zeros_like(&mlp);
    adam_step(&mut mlp, &mut state, &grads).unwrap();
    for (a, b) in mlp.weights.iter().zip(&before.weights) {
        assert_eq!(a.as_slice(), b.as_slice());
    }
    assert_eq!(state.step, 1);
}

#[test]
fn adam_minimizes_scalar_quadratic() {
    // Single parameter: loss = 0.5 (w - 3)^2 via a 1x1 "network".
    let mut mlp = Mlp::init(&[1, 1], 0).unwrap();
    mlp.weights[0][(0, 0)] = -1.0;
    let mut state = AdamState::new(&mlp, LrSchedule::Constant { lr: 0.05 });
    for _ in 0..500 {
        let w = mlp.weights[0][(0, 0)];
        let mut grads = MlpGrads::zeros_like(&mlp);
        grads.weights[0][(0, 0)] = w - 3.0;
        adam_step(&mut mlp, &mut state, &grads).unwrap();
    }
    assert!((mlp.weights[0][(0, 0)] - 3.0).abs() < 1e-6);
}

#[test]
fn adam_trajectories_are_bit_identical() {
    let run = || {
        let mut mlp = Mlp::init(&[2, 6, 1], 9).unwrap();
        let mut state = AdamState::new(&mlp, LrSchedule::exp_decay_default());
        let batch = DMatrix::from_fn(2, 4, |r, c| ((r + 2 * c) as f64 * 0.37).sin());
        for _ in 0..50 {
            let (_, grads) = param_gradients(&mlp, |tape, vars| {
                let x = tape.constant(batch.clone());
                let trace = vars.forward(tape, x);
                let sq = tape.hadamard(trace.output, trace.output);
                tape.mean_all(sq)
            })
            .unwrap();
            adam_step(&mut mlp, &mut state, &grads).unwrap();
        }
        mlp
    };
    let (a, b) = (run(), run());
    for (wa, wb) in a.weights.iter().zip(&b.weights) {
        for (x, y) in wa.iter().zip(wb.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn adam_rejects_non_finite_gradients() {
    let mut mlp = Mlp::init(&[2, 2, 1], 0).unwrap();
    let mut state = AdamState::new(&mlp, LrSchedule::default());
    let mut grads = MlpGrads::zeros_like(&mlp);
    grads.weights[0][(0, 0)] = f64::NAN;
    assert!(adam_step(&mut mlp, &mut state, &grads).is_err());
}

#[test]
fn lr_schedule_values() {
    let c = LrSchedule::Constant { lr: 1e-3 };
    assert_eq!(c.at(0), 1e-3);
    assert_eq!(c.at(10_000), 1e-3);
    let e = LrSchedule::ExpDecay {
        lr: 1e-3,
        gamma: 0.9,
        decay_steps: 2000.0,
    };
    assert_eq!(e.at(0), 1e-3);
    assert!((e.at(2000) - 0.9e-3).abs() < 1e-12);
    assert!(e.at(4000) < e.at(2000));
}

#[test]
fn checkpoint_roundtrip() {
    let mlp = Mlp::init(&[4, 6, 2], 77).unwrap();
    let ck = mlp.to_checkpoint();
    let json = serde_json::to_string(&ck).unwrap();
    let back: MlpCheckpoint = serde_json::from_str(&json).unwrap();
    let restored = Mlp::from_checkpoint(&back).unwrap();
    for (a, b) in mlp.weights.iter().zip(&restored.weights) {
        assert_eq!(a.as_slice(), b.as_slice());
    }
    for (a, b) in mlp.biases.iter().zip(&restored.biases) {
        assert_eq!(a.as_slice(), b.as_slice());
    }
}
