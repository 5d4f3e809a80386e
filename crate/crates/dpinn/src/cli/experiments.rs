//! Experiment implementations behind the CLI subcommands. Each run writes a
//! manifest, loss histories, field exports, and a summary CSV into the
//! configured output directory, and returns its summary for callers that
//! want the numbers directly (the acceptance suite uses the same paths).

use super::config::{Arm, ExperimentConfig, ExperimentKind};
use super::output;
use crate::deeponet::{predict_distance, trace_geodesic, train_geodesic, GeodesicTrainConfig};
use crate::fem::{assemble_mass, assemble_stiffness};
use crate::gp::{delta_nn_regression, gp_fit_predict, regression_target, MaternGpConfig};
use crate::mesh::TriMesh;
use crate::oracle::{
    discrete_poisson_load, geodesic_field, sample_pairs, solve_heat_bvp, ManufacturedPoisson,
};
use crate::pinn::{
    eikonal_residual_of_field, nmse, train, DataSet, InputEncoding, ResidualSpec, TrainConfig,
    VertexEncoder,
};
use crate::spectral::{AnalyticSquareBasis, EigenBasis, EigenSolveOpts};
use crate::{DpinnError, NodalField, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fs;

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}

fn train_params_to_config(cfg: &ExperimentConfig, seed: u64) -> TrainConfig {
    TrainConfig {
        hidden: cfg.train.hidden.clone(),
        iterations: cfg.train.iterations,
        batch_data: cfg.train.batch_data,
        batch_pde: cfg.train.batch_pde,
        seed,
        schedule: cfg.train.schedule,
        weights: cfg.train.weights,
        target_norm: cfg.train.target_norm,
    }
}

fn solve_basis(mesh: &TriMesh, n_modes: usize) -> Result<EigenBasis> {
    let a = assemble_stiffness(mesh);
    let m = assemble_mass(mesh, false);
    EigenBasis::solve(&a, &m, n_modes, &EigenSolveOpts::default())
}

/// Run a handful of independent cells on up to `parallel` worker threads,
/// preserving input order in the output.
fn run_cells<T: Send, F: Fn(usize) -> T + Sync>(count: usize, parallel: usize, f: F) -> Vec<T> {
    let workers = parallel
        .min(count.max(1))
        .min(
            std::env::var("DPINN_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(usize::MAX),
        )
        .max(1);
    if workers == 1 {
        return (0..count).map(f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    let slots_ref = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= count {
                    break;
                }
                let value = f(i);
                let mut guard = slots_ref.lock().unwrap();
                guard[i] = Some(value);
            });
        }
    });
    slots.into_iter().map(Option::unwrap).collect()
}

// ---------------------------------------------------------------------------
// coil-eikonal
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ArmResult {
    pub arm: Arm,
    pub per_seed_nmse: Vec<f64>,
    pub median_nmse: f64,
}

#[derive(Debug, Clone)]
pub struct CoilSummary {
    pub oracle_residual: f64,
    pub arms: Vec<ArmResult>,
}

pub fn run_coil_eikonal(cfg: &ExperimentConfig, parallel: usize) -> Result<CoilSummary> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let (mesh, _) = cfg.mesh.build()?;
    output::write_manifest(dir, cfg, &mesh)?;

    let basis = solve_basis(&mesh, cfg.train.eigenfunctions)?;

    // oracle field and training points
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let source = rng.gen_range(0..mesh.vertex_count());
    let truth = geodesic_field(&mesh, source)?.distances;
    let n_points = cfg.data_points.unwrap_or(40);
    let points: Vec<usize> =
        rand::seq::index::sample(&mut rng, mesh.vertex_count(), n_points).into_vec();
    let data = DataSet::from_field(&points, &truth);
    let elements: Vec<usize> = (0..mesh.triangle_count()).collect();

    let oracle_residual = eikonal_residual_of_field(&mesh, &truth, &elements);
    output::write_field_csv(dir.join("oracle.csv"), &mesh, &[("distance", &truth)])?;
    output::write_vtk_fields(dir.join("oracle.vtk"), &mesh, &[("distance", &truth)])?;

    let arms = cfg.arms_or_default();
    let reps = cfg.train.repetitions;
    let jobs: Vec<(Arm, u64)> = arms
        .iter()
        .flat_map(|&arm| (0..reps).map(move |r| (arm, cfg.train.seed + r as u64)))
        .collect();

    let results = run_cells(jobs.len(), parallel, |j| -> Result<(Arm, u64, f64, Vec<crate::pinn::LossRecord>, NodalField)> {
        let (arm, seed) = jobs[j];
        let mut tc = train_params_to_config(cfg, seed);
        if arm == Arm::DeltaNophysics {
            tc.weights.pde = 0.0;
        }
        let encoding = match arm {
            Arm::Pinn => InputEncoding::Cartesian,
            _ => InputEncoding::Spectral(&basis),
        };
        let spec = ResidualSpec::Eikonal {
            elements: &elements,
        };
        let (model, history) = train(&tc, &mesh, encoding, &data, &spec)?;
        let encoder = VertexEncoder::build(encoding, &mesh)?;
        let pred = model.predict_field(&encoder);
        let e = nmse(&pred, &truth)?;
        Ok((arm, seed, e, history, pred))
    });

    let mut summary = String::from("arm,seed,nmse\n");
    let mut arm_results = Vec::new();
    for &arm in &arms {
        let mut per_seed = Vec::new();
        for r in &results {
            let (a, seed, e, history, pred) = r.as_ref().map_err(clone_err)?;
            if *a == arm {
                per_seed.push(*e);
                summary.push_str(&format!("{},{},{}\n", arm.name(), seed, e));
                output::write_loss_history(
                    dir.join(format!("loss_{}_{}.csv", arm.name(), seed)),
                    history,
                )?;
                if per_seed.len() == 1 {
                    output::write_field_csv(
                        dir.join(format!("pred_{}.csv", arm.name())),
                        &mesh,
                        &[("prediction", pred), ("truth", &truth)],
                    )?;
                    output::write_vtk_fields(
                        dir.join(format!("pred_{}.vtk", arm.name())),
                        &mesh,
                        &[("prediction", pred)],
                    )?;
                }
            }
        }
        let median_nmse = median(&mut per_seed.clone());
        summary.push_str(&format!("{},median,{}\n", arm.name(), median_nmse));
        arm_results.push(ArmResult {
            arm,
            per_seed_nmse: per_seed,
            median_nmse,
        });
    }
    summary.push_str(&format!("oracle-residual,,{oracle_residual}\n"));
    fs::write(dir.join("summary.csv"), summary)?;

    Ok(CoilSummary {
        oracle_residual,
        arms: arm_results,
    })
}

fn clone_err(e: &DpinnError) -> DpinnError {
    DpinnError::Config(e.to_string())
}

// ---------------------------------------------------------------------------
// heatsink
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct HeatsinkSummary {
    pub arms: Vec<ArmResult>,
    pub solver_residual: f64,
}

pub fn run_heatsink(cfg: &ExperimentConfig, parallel: usize) -> Result<HeatsinkSummary> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let (mesh, tags) = cfg.mesh.build()?;
    let tags = tags.ok_or_else(|| {
        DpinnError::Config("heatsink experiment needs a tagged mesh source".into())
    })?;
    output::write_manifest(dir, cfg, &mesh)?;

    let robin = cfg.robin_coeff.unwrap_or(0.1);
    let solution = solve_heat_bvp(&mesh, &tags, robin)?;
    let truth = solution.temperature.clone();
    output::write_field_csv(dir.join("oracle.csv"), &mesh, &[("temperature", &truth)])?;
    output::write_vtk_fields(dir.join("oracle.vtk"), &mesh, &[("temperature", &truth)])?;

    let basis = solve_basis(&mesh, cfg.train.eigenfunctions)?;
    let a = assemble_stiffness(&mesh);

    // boundary-only observations
    let boundary = mesh.boundary_vertices();
    let n_obs = cfg.boundary_points.unwrap_or(361).min(boundary.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let obs_idx: Vec<usize> = rand::seq::index::sample(&mut rng, boundary.len(), n_obs)
        .iter()
        .map(|k| boundary[k])
        .collect();
    let data = DataSet::from_field(&obs_idx, &truth);

    // strictly interior collocation vertices
    let interior: Vec<usize> = (0..mesh.vertex_count())
        .filter(|i| boundary.binary_search(i).is_err())
        .collect();

    let arms = cfg.arms_or_default();
    let reps = cfg.train.repetitions;
    let jobs: Vec<(Arm, u64)> = arms
        .iter()
        .flat_map(|&arm| (0..reps).map(move |r| (arm, cfg.train.seed + r as u64)))
        .collect();

    let results = run_cells(jobs.len(), parallel, |j| -> Result<(Arm, u64, f64, Vec<crate::pinn::LossRecord>, NodalField)> {
        let (arm, seed) = jobs[j];
        let mut tc = train_params_to_config(cfg, seed);
        if arm == Arm::DeltaNophysics {
            tc.weights.pde = 0.0;
        }
        let encoding = match arm {
            Arm::Pinn => InputEncoding::Cartesian,
            _ => InputEncoding::Spectral(&basis),
        };
        let spec = ResidualSpec::Laplace {
            stiffness: &a,
            vertices: &interior,
        };
        let (model, history) = train(&tc, &mesh, encoding, &data, &spec)?;
        let encoder = VertexEncoder::build(encoding, &mesh)?;
        let pred = model.predict_field(&encoder);
        let e = nmse(&pred, &truth)?;
        Ok((arm, seed, e, history, pred))
    });

    let mut summary = String::from("arm,seed,nmse\n");
    let mut arm_results = Vec::new();
    for &arm in &arms {
        let mut per_seed = Vec::new();
        for r in &results {
            let (aa, seed, e, history, pred) = r.as_ref().map_err(clone_err)?;
            if *aa == arm {
                per_seed.push(*e);
                summary.push_str(&format!("{},{},{}\n", arm.name(), seed, e));
                output::write_loss_history(
                    dir.join(format!("loss_{}_{}.csv", arm.name(), seed)),
                    history,
                )?;
                if per_seed.len() == 1 {
                    output::write_vtk_fields(
                        dir.join(format!("pred_{}.vtk", arm.name())),
                        &mesh,
                        &[("temperature", pred)],
                    )?;
                }
            }
        }
        let median_nmse = median(&mut per_seed.clone());
        summary.push_str(&format!("{},median,{}\n", arm.name(), median_nmse));
        arm_results.push(ArmResult {
            arm,
            per_seed_nmse: per_seed,
            median_nmse,
        });
    }
    fs::write(dir.join("summary.csv"), summary)?;

    Ok(HeatsinkSummary {
        arms: arm_results,
        solver_residual: solution.residual,
    })
}

// ---------------------------------------------------------------------------
// poisson-sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum SweepCell {
    Analytic { n_modes: usize, h: f64 },
    Numeric { n_modes: usize, h: f64 },
    Pinn { h: f64 },
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub cell: SweepCell,
    /// plain MSE against the manufactured solution; None when the cell is
    /// infeasible (more modes than mesh vertices)
    pub mse: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PoissonSummary {
    pub results: Vec<SweepResult>,
    pub gaussian_width: f64,
}

pub fn run_poisson_sweep(cfg: &ExperimentConfig, parallel: usize) -> Result<PoissonSummary> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let l = cfg.gaussian_width.unwrap_or(0.5);
    let mp = ManufacturedPoisson::new(l);
    let modes = cfg
        .mode_grid
        .clone()
        .unwrap_or_else(|| vec![9, 25, 49, 100, 225, 400]);
    let sizes = cfg
        .element_sizes
        .clone()
        .unwrap_or_else(|| vec![0.02, 0.033, 0.05, 0.066, 0.1, 0.2]);
    // manifest against the default-size mesh
    {
        let (mesh, _) = cfg.mesh.build()?;
        output::write_manifest(dir, cfg, &mesh)?;
    }

    let mut cells = Vec::new();
    for &h in &sizes {
        for &n in &modes {
            cells.push(SweepCell::Analytic { n_modes: n, h });
            cells.push(SweepCell::Numeric { n_modes: n, h });
        }
    }
    // one traditional-PINN arm on the default mesh size
    let pinn_h = if sizes.contains(&0.066) { 0.066 } else { sizes[0] };
    cells.push(SweepCell::Pinn { h: pinn_h });

    let results: Vec<Result<SweepResult>> = run_cells(cells.len(), parallel, |ci| {
        let cell = cells[ci].clone();
        let mse = run_poisson_cell(cfg, &mp, &cell)?;
        Ok(SweepResult { cell, mse })
    });
    let results: Vec<SweepResult> = results
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut csv = String::from("basis,n_modes,h,mse\n");
    for r in &results {
        match &r.cell {
            SweepCell::Analytic { n_modes, h } => {
                csv.push_str(&format!("analytic,{n_modes},{h},{}\n", fmt_opt(r.mse)))
            }
            SweepCell::Numeric { n_modes, h } => {
                csv.push_str(&format!("numeric,{n_modes},{h},{}\n", fmt_opt(r.mse)))
            }
            SweepCell::Pinn { h } => csv.push_str(&format!("pinn,,{h},{}\n", fmt_opt(r.mse))),
        }
    }
    fs::write(dir.join("summary.csv"), csv)?;

    Ok(PoissonSummary {
        results,
        gaussian_width: l,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "skipped".into())
}

fn run_poisson_cell(
    cfg: &ExperimentConfig,
    mp: &ManufacturedPoisson,
    cell: &SweepCell,
) -> Result<Option<f64>> {
    let h = match cell {
        SweepCell::Analytic { h, .. } | SweepCell::Numeric { h, .. } | SweepCell::Pinn { h } => *h,
    };
    let (mesh, tag) = crate::mesh::generate_square(h)?;
    let boundary = tag.part("dirichlet").to_vec();
    let interior: Vec<usize> = (0..mesh.vertex_count())
        .filter(|i| boundary.binary_search(i).is_err())
        .collect();
    let truth = mp.u_nodal(&mesh);
    let f_raw = mp.f_nodal(&mesh);
    let a = assemble_stiffness(&mesh);
    let m = assemble_mass(&mesh, false);
    let load = discrete_poisson_load(&m, &f_raw);
    // boundary data: the manufactured solution vanishes there
    let data = DataSet::from_field(&boundary, &truth);

    let mut tc = train_params_to_config(cfg, cfg.train.seed);
    tc.batch_data = tc.batch_data.min(boundary.len());
    tc.batch_pde = tc.batch_pde.min(interior.len());

    let spec = ResidualSpec::Poisson {
        stiffness: &a,
        vertices: &interior,
        load: &load,
        f_raw: &f_raw,
    };

    let (model, encoder) = match cell {
        SweepCell::Analytic { n_modes, .. } => {
            let Ok(basis) = AnalyticSquareBasis::new(*n_modes) else {
                return Ok(None);
            };
            let enc = InputEncoding::AnalyticSquare(&basis);
            let (model, _) = train(&tc, &mesh, enc, &data, &spec)?;
            (model, VertexEncoder::build(enc, &mesh)?)
        }
        SweepCell::Numeric { n_modes, .. } => {
            if *n_modes >= mesh.vertex_count() {
                return Ok(None); // fewer nodes than requested modes
            }
            let basis = solve_basis(&mesh, *n_modes)?;
            let enc = InputEncoding::Spectral(&basis);
            let (model, _) = train(&tc, &mesh, enc, &data, &spec)?;
            (model, VertexEncoder::build(enc, &mesh)?)
        }
        SweepCell::Pinn { .. } => {
            let enc = InputEncoding::Cartesian;
            let (model, _) = train(&tc, &mesh, enc, &data, &spec)?;
            (model, VertexEncoder::build(enc, &mesh)?)
        }
    };
    let pred = model.predict_field(&encoder);
    Ok(Some(crate::pinn::mse(&pred, &truth)))
}

// ---------------------------------------------------------------------------
// bunny-deeponet
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DeeponetSummary {
    pub normalized_mae: f64,
    pub max_distance: f64,
    pub negative_fraction: f64,
    pub paths_traced: usize,
    pub paths_reached: usize,
}

pub fn run_bunny_deeponet(cfg: &ExperimentConfig, _parallel: usize) -> Result<DeeponetSummary> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let (mesh, _) = cfg.mesh.build()?;
    output::write_manifest(dir, cfg, &mesh)?;

    let basis = solve_basis(&mesh, cfg.train.eigenfunctions)?;
    let n_train = cfg.train_pairs.unwrap_or(50_000);
    let n_eval = cfg.eval_pairs.unwrap_or(10_000);
    let mut pairs = sample_pairs(&mesh, n_train + n_eval, cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7041_7273);
    pairs.shuffle(&mut rng);
    let eval = pairs.split_off(n_train);

    // pair dataset artifact
    {
        let mut csv = String::from("i,j,distance\n");
        for p in &pairs {
            csv.push_str(&format!("{},{},{}\n", p.i, p.j, p.distance));
        }
        fs::write(dir.join("train_pairs.csv"), csv)?;
    }

    let gc = GeodesicTrainConfig {
        hidden: cfg.train.hidden.clone(),
        latent: cfg.latent.unwrap_or(200),
        iterations: cfg.train.iterations,
        batch: cfg.train.batch_data,
        seed: cfg.train.seed,
        schedule: cfg.train.schedule,
        pde_weight: cfg.train.weights.pde,
    };
    let (net, history) = train_geodesic(&gc, &mesh, &basis, &pairs)?;
    output::write_loss_history(dir.join("loss_deeponet.csv"), &history)?;

    let encoder = VertexEncoder::build(InputEncoding::Spectral(&basis), &mesh)?;
    let d_max = pairs
        .iter()
        .chain(&eval)
        .map(|p| p.distance)
        .fold(0.0f64, f64::max);
    let mut abs_err = 0.0;
    let mut negative = 0usize;
    for p in &eval {
        let pred = predict_distance(&net, &encoder.vertex_input(p.i), &encoder.vertex_input(p.j))?;
        abs_err += (pred - p.distance).abs();
        if pred < 0.0 {
            negative += 1;
        }
    }
    let normalized_mae = abs_err / eval.len() as f64 / d_max;
    let negative_fraction = negative as f64 / eval.len() as f64;

    // geodesic path showcase
    let n_sources = cfg.trace_sources.unwrap_or(5);
    let n_targets = cfg.trace_targets.unwrap_or(300);
    let step = 0.75 * mesh.mean_edge_length();
    let mut paths = Vec::new();
    let mut reached = 0usize;
    for _ in 0..n_sources {
        let s = rng.gen_range(0..mesh.vertex_count());
        for _ in 0..n_targets.div_euclid(n_sources.max(1)).max(1) {
            let t = rng.gen_range(0..mesh.vertex_count());
            let path = trace_geodesic(&net, &mesh, &encoder, t, s, step, 600)?;
            if path.reached {
                reached += 1;
            }
            paths.push(path.points);
        }
    }
    output::write_vtk_polylines(dir.join("paths.vtk"), &paths)?;
    output::write_paths_csv(dir.join("paths.csv"), &paths)?;

    let summary = DeeponetSummary {
        normalized_mae,
        max_distance: d_max,
        negative_fraction,
        paths_traced: paths.len(),
        paths_reached: reached,
    };
    fs::write(
        dir.join("summary.csv"),
        format!(
            "metric,value\nnormalized_mae,{}\nmax_distance,{}\nnegative_fraction,{}\npaths_traced,{}\npaths_reached,{}\n",
            summary.normalized_mae,
            summary.max_distance,
            summary.negative_fraction,
            summary.paths_traced,
            summary.paths_reached
        ),
    )?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// regression-study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct StudyRow {
    pub train_size: usize,
    /// "gp" or the mode count for the network arm
    pub method: String,
    pub rep: usize,
    pub mse: f64,
}

#[derive(Debug, Clone)]
pub struct StudySummary {
    pub rows: Vec<StudyRow>,
}

impl StudySummary {
    pub fn median_mse(&self, train_size: usize, method: &str) -> Option<f64> {
        let mut vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.train_size == train_size && r.method == method)
            .map(|r| r.mse)
            .collect();
        if vals.is_empty() {
            None
        } else {
            Some(median(&mut vals))
        }
    }
}

pub fn run_regression_study(cfg: &ExperimentConfig, parallel: usize) -> Result<StudySummary> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let (mesh, _) = cfg.mesh.build()?;
    output::write_manifest(dir, cfg, &mesh)?;

    let kernel_modes = cfg
        .kernel_modes
        .unwrap_or(1000)
        .min(mesh.vertex_count() - 1);
    let nn_modes: Vec<usize> = cfg
        .mode_grid
        .clone()
        .unwrap_or_else(|| crate::gp::STUDY_MODE_COUNTS.to_vec());
    let basis_modes = kernel_modes.max(nn_modes.iter().copied().max().unwrap_or(0));
    let basis = solve_basis(&mesh, basis_modes)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let source = rng.gen_range(0..mesh.vertex_count());
    let target = regression_target(&mesh, source)?;
    output::write_vtk_fields(dir.join("target.vtk"), &mesh, &[("target", &target)])?;

    let sizes = cfg
        .train_sizes
        .clone()
        .unwrap_or_else(|| vec![50, 100, 500, 1000]);
    let reps = cfg.train.repetitions;

    // per (size, rep): one shared training subset used by every method
    let mut draws = Vec::new();
    for &size in &sizes {
        for rep in 0..reps {
            let idx: Vec<usize> =
                rand::seq::index::sample(&mut rng, mesh.vertex_count(), size).into_vec();
            draws.push((size, rep, idx));
        }
    }

    let gp_config = MaternGpConfig {
        n_modes: kernel_modes,
        ..MaternGpConfig::default()
    };
    let all: Vec<usize> = (0..mesh.vertex_count()).collect();

    let cells: Vec<(usize, usize, Vec<usize>, String)> = draws
        .iter()
        .flat_map(|(size, rep, idx)| {
            let mut v = vec![(*size, *rep, idx.clone(), "gp".to_string())];
            for &m in &nn_modes {
                v.push((*size, *rep, idx.clone(), format!("nn{m}")));
            }
            v
        })
        .collect();

    let rows: Vec<Result<StudyRow>> = run_cells(cells.len(), parallel, |ci| {
        let (size, rep, idx, method) = &cells[ci];
        let pred: NodalField = if method == "gp" {
            let train_set: Vec<(usize, f64)> = idx.iter().map(|&i| (i, target[i])).collect();
            gp_fit_predict(&gp_config, &basis, &mesh, &train_set, &all)?.0
        } else {
            let modes: usize = method[2..].parse().unwrap();
            let data = DataSet::from_field(idx, &target);
            delta_nn_regression(
                &basis,
                &mesh,
                modes,
                &data,
                cfg.train.iterations,
                cfg.train.seed + *rep as u64,
            )?
        };
        Ok(StudyRow {
            train_size: *size,
            method: method.clone(),
            rep: *rep,
            mse: crate::pinn::mse(&pred, &target),
        })
    });
    let rows: Vec<StudyRow> = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let mut csv = String::from("train_size,method,rep,mse\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", r.train_size, r.method, r.rep, r.mse));
    }
    fs::write(dir.join("summary.csv"), csv)?;
    Ok(StudySummary { rows })
}

// ---------------------------------------------------------------------------
// eigen-only
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EigenSummary {
    pub eigenvalues: Vec<f64>,
}

pub fn run_eigen_only(cfg: &ExperimentConfig, _parallel: usize) -> Result<EigenSummary> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let (mesh, _) = cfg.mesh.build()?;
    output::write_manifest(dir, cfg, &mesh)?;
    let basis = solve_basis(&mesh, cfg.train.eigenfunctions)?;
    output::write_eigenbasis_csv(dir, &basis)?;
    let show = basis.n_modes().min(6);
    let fields: Vec<(String, NodalField)> = (0..show)
        .map(|k| (format!("mode_{k}"), basis.eigenvector(k).to_vec()))
        .collect();
    let refs: Vec<(&str, &NodalField)> = fields.iter().map(|(n, f)| (n.as_str(), f)).collect();
    output::write_vtk_fields(dir.join("eigenfunctions.vtk"), &mesh, &refs)?;
    Ok(EigenSummary {
        eigenvalues: basis.eigenvalues().to_vec(),
    })
}

// ---------------------------------------------------------------------------
// dispatcher
// ---------------------------------------------------------------------------

/// Run any experiment; returns a one-line human summary for the CLI.
pub fn run_experiment(cfg: &ExperimentConfig, parallel: usize) -> Result<String> {
    match cfg.experiment {
        ExperimentKind::CoilEikonal => {
            let s = run_coil_eikonal(cfg, parallel)?;
            let mut line = format!("oracle residual {:.3e};", s.oracle_residual);
            for arm in &s.arms {
                line.push_str(&format!(" {} nmse {:.3e};", arm.arm.name(), arm.median_nmse));
            }
            Ok(line)
        }
        ExperimentKind::Heatsink => {
            let s = run_heatsink(cfg, parallel)?;
            let mut line = format!("solver residual {:.3e};", s.solver_residual);
            for arm in &s.arms {
                line.push_str(&format!(" {} nmse {:.3e};", arm.arm.name(), arm.median_nmse));
            }
            Ok(line)
        }
        ExperimentKind::PoissonSweep => {
            let s = run_poisson_sweep(cfg, parallel)?;
            let done = s.results.iter().filter(|r| r.mse.is_some()).count();
            Ok(format!(
                "{} of {} sweep cells computed (l = {})",
                done,
                s.results.len(),
                s.gaussian_width
            ))
        }
        ExperimentKind::BunnyDeeponet => {
            let s = run_bunny_deeponet(cfg, parallel)?;
            Ok(format!(
                "normalized MAE {:.3e}; {} of {} paths reached",
                s.normalized_mae, s.paths_reached, s.paths_traced
            ))
        }
        ExperimentKind::RegressionStudy => {
            let s = run_regression_study(cfg, parallel)?;
            Ok(format!("{} study rows written", s.rows.len()))
        }
        ExperimentKind::EigenOnly => {
            let s = run_eigen_only(cfg, parallel)?;
            Ok(format!("{} eigenpairs exported", s.eigenvalues.len()))
        }
    }
}
