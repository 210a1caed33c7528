//! Experiment harness: configuration, procedural test objects, simulated
//! datasets, scenario sweeps, quality scoring and result files.

// Negated comparisons deliberately treat NaN as failing the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dataset;
pub mod error;
pub mod objects;
pub mod output;
pub mod pgm;
pub mod quality;
pub mod scenarios;
pub mod scene;

pub use config::{load_config, Algorithm, ExperimentConfig, Scenario};
pub use error::{HarnessError, Result};
pub use objects::ObjectSpec;
pub use output::{write_manifest, ExperimentResult, RunRecord};
pub use quality::registered_quality;
pub use scenarios::{
    run_compare_algorithms, run_custom, run_experiment, run_frames_sweep, run_loose_support, run_shift_error,
};
pub use scene::Scene;
