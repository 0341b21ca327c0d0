//! Experiment configuration (TOML).

use super::synth::SyntheticSpec;
use super::ExperimentError;
use crate::dcopf::CaseOverrides;
use crate::uncertainty::SupportShape;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Seeds every stochastic step; identical seeds give identical reports.
    pub seed: u64,
    pub case: CaseSection,
    /// Wind plant placement and forecasts (dimension must match the
    /// synthetic spec).
    pub wind: Vec<WindSection>,
    pub uncertainty: UncertaintySection,
    pub data: DataSection,
    pub synthetic: SyntheticSpec,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseSection {
    pub path: String,
    #[serde(default)]
    pub load_scale: Option<f64>,
    #[serde(default)]
    pub line_limits: Vec<crate::dcopf::LineLimitOverride>,
    /// Reserve capacity price as a multiple of the linear energy cost.
    #[serde(default = "default_reserve_cost_factor")]
    pub reserve_cost_factor: f64,
}

fn default_reserve_cost_factor() -> f64 {
    10.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindSection {
    pub bus: usize,
    pub forecast_mw: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UncertaintySection {
    pub epsilon: f64,
    pub alpha: f64,
    /// Which sets to run: subset of {"D1", "D2", "D3", "D4", "D5"}.
    pub ambiguity_sets: Vec<String>,
    #[serde(default = "default_shape")]
    pub support_shape: SupportShape,
    /// Enforce the estimated mode support's feasibility constraints on all
    /// variants (makes costs comparable across sets).
    #[serde(default)]
    pub uniform_mode_feasibility: bool,
}

fn default_shape() -> SupportShape {
    SupportShape::Rectangle
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataSection {
    pub pool_size: usize,
    /// Samples per estimation group.
    pub n_data: usize,
    /// Number of groups, i.e. number of mode estimates for the support.
    pub n_groups: usize,
    pub n_bins: usize,
    /// Drop quantile-box outliers before histogram estimation (moments
    /// always use the full pool).
    #[serde(default)]
    pub trim_outliers: bool,
    #[serde(default = "default_trim_quantile")]
    pub trim_quantile: f64,
}

fn default_trim_quantile() -> f64 {
    0.001
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationSection {
    pub batches: usize,
    pub batch_size: usize,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self { batches: 20, batch_size: 5000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverSection {
    pub max_iter: usize,
    pub violation_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { max_iter: 50, violation_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSection {
    pub dir: String,
    /// Also write the generated scenario pool as CSV.
    #[serde(default)]
    pub write_pool: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into(), write_pool: false }
    }
}

impl ExperimentConfig {
    /// Reads a TOML config. Relative paths inside the config resolve
    /// against the config file's directory, returned alongside.
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf), ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let config: Self =
            toml::from_str(&text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        config.validate()?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok((config, base))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.wind.is_empty() {
            return Err(ExperimentError::Config("at least one wind plant required".into()));
        }
        if self.synthetic.dim() != self.wind.len() {
            return Err(ExperimentError::Config(format!(
                "synthetic spec dimension {} vs {} wind plants",
                self.synthetic.dim(),
                self.wind.len()
            )));
        }
        self.synthetic.validate()?;
        if self.uncertainty.ambiguity_sets.is_empty() {
            return Err(ExperimentError::Config("no ambiguity sets selected".into()));
        }
        for k in &self.uncertainty.ambiguity_sets {
            if !matches!(k.as_str(), "D1" | "D2" | "D3" | "D4" | "D5") {
                return Err(ExperimentError::Config(format!("unknown ambiguity set '{k}'")));
            }
        }
        if self.data.n_data > self.data.pool_size {
            return Err(ExperimentError::Config(
                "n_data cannot exceed pool_size".into(),
            ));
        }
        if self.data.n_groups == 0 || self.data.n_bins < 2 {
            return Err(ExperimentError::Config(
                "n_groups must be positive and n_bins at least 2".into(),
            ));
        }
        Ok(())
    }

    pub fn case_overrides(&self) -> CaseOverrides {
        CaseOverrides {
            load_scale: self.case.load_scale,
            line_limits: self.case.line_limits.clone(),
        }
    }
}
