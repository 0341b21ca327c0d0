//! End-to-end experiment layer: synthetic scenario generation, runs across
//! ambiguity sets, and out-of-sample reliability evaluation.

mod config;
mod reliability;
mod run;
mod synth;

pub use config::{
    CaseSection, DataSection, EvaluationSection, ExperimentConfig, OutputSection,
    SolverSection, UncertaintySection,
};
pub use reliability::{
    evaluate_reliability, realize_rows, EvaluableRow, ReliabilityReport, SolutionRows,
};
pub use run::{run_experiment, write_outputs, ExperimentArtifacts, ExperimentReport, VariantResult};
pub use synth::{generate_synthetic_pool, SyntheticSpec};

use crate::dcopf::DcopfError;
use crate::master::MasterError;
use crate::uncertainty::UncertaintyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("failed to read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
    #[error(transparent)]
    Dcopf(#[from] DcopfError),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error("evaluation error: {0}")]
    Evaluation(String),
}
