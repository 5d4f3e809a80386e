//! Experiment configuration: JSON with a strict schema. Unknown keys are
//! rejected with the nearest valid key named, so a typo in a sweep cannot
//! silently fall back to a default.

use crate::mesh::{CoilSpec, HeatsinkSpec};
use crate::nn::LrSchedule;
use crate::pinn::{LossWeights, TargetNorm};
use crate::{DpinnError, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CoilEikonal,
    Heatsink,
    PoissonSweep,
    BunnyDeeponet,
    RegressionStudy,
    EigenOnly,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::CoilEikonal => "coil-eikonal",
            ExperimentKind::Heatsink => "heatsink",
            ExperimentKind::PoissonSweep => "poisson-sweep",
            ExperimentKind::BunnyDeeponet => "bunny-deeponet",
            ExperimentKind::RegressionStudy => "regression-study",
            ExperimentKind::EigenOnly => "eigen-only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arm {
    DeltaPinn,
    DeltaNophysics,
    Pinn,
}

impl Arm {
    pub fn name(&self) -> &'static str {
        match self {
            Arm::DeltaPinn => "delta-pinn",
            Arm::DeltaNophysics => "delta-nophysics",
            Arm::Pinn => "pinn",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshSource {
    Coil {
        #[serde(default = "default_coil_diameter")]
        helix_diameter: f64,
        #[serde(default = "default_coil_pitch")]
        pitch: f64,
        #[serde(default = "default_coil_revolutions")]
        revolutions: f64,
        #[serde(default = "default_coil_tube_radius")]
        tube_radius: f64,
        #[serde(default = "default_coil_n_axial")]
        n_axial: usize,
        #[serde(default = "default_coil_n_circ")]
        n_circ: usize,
    },
    Square {
        element_size: f64,
    },
    Heatsink {
        #[serde(default = "default_heatsink_element")]
        element_size: f64,
    },
    Sphere {
        #[serde(default = "default_sphere_radius")]
        radius: f64,
        #[serde(default = "default_sphere_n_lat")]
        n_lat: usize,
        #[serde(default = "default_sphere_n_lon")]
        n_lon: usize,
    },
    File {
        path: PathBuf,
    },
}

fn default_coil_diameter() -> f64 {
    30.0
}
fn default_coil_pitch() -> f64 {
    12.0
}
fn default_coil_revolutions() -> f64 {
    4.0
}
fn default_coil_tube_radius() -> f64 {
    5.0
}
fn default_coil_n_axial() -> usize {
    128
}
fn default_coil_n_circ() -> usize {
    12
}
fn default_heatsink_element() -> f64 {
    0.8
}
fn default_sphere_radius() -> f64 {
    1.0
}
fn default_sphere_n_lat() -> usize {
    30
}
fn default_sphere_n_lon() -> usize {
    34
}

impl MeshSource {
    pub fn build(&self) -> Result<(crate::mesh::TriMesh, Option<crate::mesh::BoundaryTag>)> {
        match self {
            MeshSource::Coil {
                helix_diameter,
                pitch,
                revolutions,
                tube_radius,
                n_axial,
                n_circ,
            } => {
                let spec = CoilSpec {
                    helix_diameter: *helix_diameter,
                    pitch: *pitch,
                    revolutions: *revolutions,
                    tube_radius: *tube_radius,
                    n_axial: *n_axial,
                    n_circ: *n_circ,
                };
                Ok((crate::mesh::generate_coil(&spec)?, None))
            }
            MeshSource::Square { element_size } => {
                let (m, t) = crate::mesh::generate_square(*element_size)?;
                Ok((m, Some(t)))
            }
            MeshSource::Heatsink { element_size } => {
                let (m, t) =
                    crate::mesh::generate_heatsink(&HeatsinkSpec::default(), *element_size)?;
                Ok((m, Some(t)))
            }
            MeshSource::Sphere {
                radius,
                n_lat,
                n_lon,
            } => Ok((crate::mesh::generate_sphere(*radius, *n_lat, *n_lon)?, None)),
            MeshSource::File { path } => Ok((crate::mesh::load_mesh(path)?, None)),
        }
    }
}

/// Optimizer and architecture block shared by all experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainParams {
    pub eigenfunctions: usize,
    pub hidden: Vec<usize>,
    pub iterations: usize,
    pub batch_data: usize,
    pub batch_pde: usize,
    #[serde(default)]
    pub schedule: LrSchedule,
    #[serde(default)]
    pub weights: LossWeights,
    #[serde(default)]
    pub target_norm: TargetNorm,
    /// base training seed; repetition r uses seed + r
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
}

fn default_repetitions() -> usize {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub mesh: MeshSource,
    #[serde(default)]
    pub arms: Vec<Arm>,
    pub train: TrainParams,
    /// setup seed: oracle source, data-point draws
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub output_dir: PathBuf,

    // experiment-specific knobs (validated per experiment)
    #[serde(default)]
    pub data_points: Option<usize>,
    #[serde(default)]
    pub boundary_points: Option<usize>,
    #[serde(default)]
    pub robin_coeff: Option<f64>,
    #[serde(default)]
    pub gaussian_width: Option<f64>,
    #[serde(default)]
    pub mode_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub element_sizes: Option<Vec<f64>>,
    #[serde(default)]
    pub train_pairs: Option<usize>,
    #[serde(default)]
    pub eval_pairs: Option<usize>,
    #[serde(default)]
    pub trace_sources: Option<usize>,
    #[serde(default)]
    pub trace_targets: Option<usize>,
    #[serde(default)]
    pub latent: Option<usize>,
    #[serde(default)]
    pub train_sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub kernel_modes: Option<usize>,
}

fn default_seed() -> u64 {
    1234
}

impl ExperimentConfig {
    pub fn arms_or_default(&self) -> Vec<Arm> {
        if self.arms.is_empty() {
            vec![Arm::DeltaPinn, Arm::DeltaNophysics, Arm::Pinn]
        } else {
            self.arms.clone()
        }
    }
}

/// Paper-style defaults for each experiment.
pub fn default_config(kind: ExperimentKind, output_dir: PathBuf) -> ExperimentConfig {
    let (mesh, train) = match kind {
        ExperimentKind::CoilEikonal => (
            MeshSource::Coil {
                helix_diameter: 30.0,
                pitch: 12.0,
                revolutions: 4.0,
                tube_radius: 5.0,
                n_axial: 128,
                n_circ: 12,
            },
            TrainParams {
                eigenfunctions: 50,
                hidden: vec![100],
                iterations: 10_000,
                batch_data: 10,
                batch_pde: 10,
                schedule: LrSchedule::exp_decay_default(),
                weights: LossWeights::default(),
                target_norm: TargetNorm::ZScore,
                seed: 0,
                repetitions: 3,
            },
        ),
        ExperimentKind::Heatsink => (
            MeshSource::Heatsink { element_size: 0.8 },
            TrainParams {
                eigenfunctions: 50,
                hidden: vec![100, 100, 100],
                iterations: 50_000,
                batch_data: 30,
                batch_pde: 30,
                schedule: LrSchedule::exp_decay_default(),
                weights: LossWeights::default(),
                target_norm: TargetNorm::ZScore,
                seed: 0,
                repetitions: 1,
            },
        ),
        ExperimentKind::PoissonSweep => (
            MeshSource::Square {
                element_size: 0.066,
            },
            TrainParams {
                eigenfunctions: 100,
                hidden: vec![100, 100, 100],
                iterations: 50_000,
                batch_data: 30,
                batch_pde: 30,
                schedule: LrSchedule::exp_decay_default(),
                weights: LossWeights::default(),
                target_norm: TargetNorm::Identity,
                seed: 0,
                repetitions: 1,
            },
        ),
        ExperimentKind::BunnyDeeponet => (
            MeshSource::File {
                path: PathBuf::from("bunny.off"),
            },
            TrainParams {
                eigenfunctions: 50,
                hidden: vec![200; 10],
                iterations: 50_000,
                batch_data: 10,
                batch_pde: 10,
                schedule: LrSchedule::exp_decay_default(),
                weights: LossWeights::default(),
                target_norm: TargetNorm::ZScore,
                seed: 0,
                repetitions: 1,
            },
        ),
        ExperimentKind::RegressionStudy => (
            MeshSource::Coil {
                helix_diameter: 30.0,
                pitch: 12.0,
                revolutions: 4.0,
                tube_radius: 5.0,
                n_axial: 168,
                n_circ: 16,
            },
            TrainParams {
                eigenfunctions: 1000,
                hidden: vec![100],
                iterations: 6000,
                batch_data: 32,
                batch_pde: 1,
                schedule: LrSchedule::exp_decay_default(),
                weights: LossWeights {
                    data: 1.0,
                    pde: 0.0,
                    boundary: 1.0,
                },
                target_norm: TargetNorm::ZScore,
                seed: 0,
                repetitions: 5,
            },
        ),
        ExperimentKind::EigenOnly => (
            MeshSource::Coil {
                helix_diameter: 30.0,
                pitch: 12.0,
                revolutions: 4.0,
                tube_radius: 5.0,
                n_axial: 128,
                n_circ: 12,
            },
            TrainParams {
                eigenfunctions: 50,
                hidden: vec![100],
                iterations: 1,
                batch_data: 1,
                batch_pde: 1,
                schedule: LrSchedule::default(),
                weights: LossWeights::default(),
                target_norm: TargetNorm::ZScore,
                seed: 0,
                repetitions: 1,
            },
        ),
    };
    ExperimentConfig {
        experiment: kind,
        mesh,
        arms: Vec::new(),
        train,
        seed: 1234,
        output_dir,
        data_points: None,
        boundary_points: None,
        robin_coeff: None,
        gaussian_width: None,
        mode_grid: None,
        element_sizes: None,
        train_pairs: None,
        eval_pairs: None,
        trace_sources: None,
        trace_targets: None,
        latent: None,
        train_sizes: None,
        kernel_modes: None,
    }
}

// ---------------------------------------------------------------------------
// strict parsing with nearest-key suggestions
// ---------------------------------------------------------------------------

fn levenshtein(a: &str, b: &str) -> usize {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            cur[j] = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn check_keys(value: &serde_json::Value, allowed: &[&str], context: &str) -> Result<()> {
    let Some(map) = value.as_object() else {
        return Ok(());
    };
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            let nearest = allowed
                .iter()
                .min_by_key(|cand| levenshtein(key, cand))
                .copied()
                .unwrap_or("");
            return Err(DpinnError::Config(format!(
                "unknown key `{key}` in {context}; nearest valid key is `{nearest}`"
            )));
        }
    }
    Ok(())
}

const ROOT_KEYS: &[&str] = &[
    "experiment",
    "mesh",
    "arms",
    "train",
    "seed",
    "output_dir",
    "data_points",
    "boundary_points",
    "robin_coeff",
    "gaussian_width",
    "mode_grid",
    "element_sizes",
    "train_pairs",
    "eval_pairs",
    "trace_sources",
    "trace_targets",
    "latent",
    "train_sizes",
    "kernel_modes",
];

const TRAIN_KEYS: &[&str] = &[
    "eigenfunctions",
    "hidden",
    "iterations",
    "batch_data",
    "batch_pde",
    "schedule",
    "weights",
    "target_norm",
    "seed",
    "repetitions",
];

const MESH_KEYS: &[&str] = &[
    "kind",
    "helix_diameter",
    "pitch",
    "revolutions",
    "tube_radius",
    "n_axial",
    "n_circ",
    "element_size",
    "radius",
    "n_lat",
    "n_lon",
    "path",
];

const SCHEDULE_KEYS: &[&str] = &["kind", "lr", "gamma", "decay_steps"];
const WEIGHTS_KEYS: &[&str] = &["data", "pde", "boundary"];

/// Parse and schema-check a config file; returns the effective config.
pub fn validate_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path.as_ref())?;
    validate_config_str(&text)
}

pub fn validate_config_str(text: &str) -> Result<ExperimentConfig> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| DpinnError::Config(format!("invalid JSON: {e}")))?;
    check_keys(&value, ROOT_KEYS, "the top-level config")?;
    if let Some(train) = value.get("train") {
        check_keys(train, TRAIN_KEYS, "`train`")?;
        if let Some(s) = train.get("schedule") {
            check_keys(s, SCHEDULE_KEYS, "`train.schedule`")?;
        }
        if let Some(w) = train.get("weights") {
            check_keys(w, WEIGHTS_KEYS, "`train.weights`")?;
        }
    }
    if let Some(mesh) = value.get("mesh") {
        check_keys(mesh, MESH_KEYS, "`mesh`")?;
    }
    let config: ExperimentConfig = serde_json::from_value(value)
        .map_err(|e| DpinnError::Config(format!("config does not match the schema: {e}")))?;
    // referenced files must exist before any compute
    if let MeshSource::File { path } = &config.mesh {
        if !path.exists() {
            return Err(DpinnError::Config(format!(
                "mesh file {} does not exist",
                path.display()
            )));
        }
    }
    Ok(config)
}
