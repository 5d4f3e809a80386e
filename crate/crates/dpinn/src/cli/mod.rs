//! Experiment harness: configuration schema, artifact writers, and the
//! experiment drivers behind the `dpinn` binary.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{
    default_config, validate_config, validate_config_str, Arm, ExperimentConfig, ExperimentKind,
    MeshSource, TrainParams,
};
pub use experiments::{
    run_bunny_deeponet, run_coil_eikonal, run_eigen_only, run_experiment, run_heatsink,
    run_poisson_sweep, run_regression_study,
};
