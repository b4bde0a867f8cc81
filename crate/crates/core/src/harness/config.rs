use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acquisition::AcquisitionKind;
use crate::error::{Error, Result};
use crate::optim::OptimizerBudget;
use crate::problems::{problem_by_name, GroundTruth};
use crate::surrogate::{SurrogateConfig, DEFAULT_REFIT_INTERVAL};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything that determines a benchmark run.
///
/// Serialized as TOML; `schema_version` must equal [`SCHEMA_VERSION`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: String,
    pub acquisition: String,
    /// Straddle width; only meaningful for `StraddleZ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Target probability; defaults to the problem's own threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Total observations, initial design included.
    pub iterations: usize,
    #[serde(default = "defaults::initial_design")]
    pub initial_design: usize,
    #[serde(default = "defaults::reference_set_size")]
    pub reference_set_size: usize,
    #[serde(default = "defaults::test_set_size")]
    pub test_set_size: usize,
    #[serde(default = "defaults::replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Active-sampling iterations between from-scratch refits.
    #[serde(default = "defaults::refit_interval")]
    pub refit_interval: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub surrogate: SurrogateConfig,
    #[serde(default)]
    pub optimizer: OptimizerBudget,
}

mod defaults {
    pub fn initial_design() -> usize {
        10
    }
    pub fn reference_set_size() -> usize {
        500
    }
    pub fn test_set_size() -> usize {
        1000
    }
    pub fn replications() -> usize {
        20
    }
    pub fn refit_interval() -> usize {
        super::DEFAULT_REFIT_INTERVAL
    }
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(problem: &str, acquisition: &str, iterations: usize) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            problem: problem.to_string(),
            acquisition: acquisition.to_string(),
            beta: None,
            threshold: None,
            iterations,
            initial_design: defaults::initial_design(),
            reference_set_size: defaults::reference_set_size(),
            test_set_size: defaults::test_set_size(),
            replications: defaults::replications(),
            seed: 0,
            refit_interval: defaults::refit_interval(),
            output_dir: None,
            surrogate: SurrogateConfig::default(),
            optimizer: OptimizerBudget::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let problem = self.problem()?;
        self.acquisition_kind()?;
        let theta = self.threshold.unwrap_or(problem.theta());
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::config(format!("threshold {theta} outside (0, 1)")));
        }
        if self.initial_design < 2 || self.initial_design > self.iterations {
            return Err(Error::config(format!(
                "initial design size {} must be in 2..={} (total iterations)",
                self.initial_design, self.iterations
            )));
        }
        if self.reference_set_size == 0 || self.test_set_size == 0 || self.replications == 0 {
            return Err(Error::config(
                "reference set, test set and replication counts must be positive",
            ));
        }
        self.surrogate.validate()?;
        self.optimizer.validate()
    }

    pub fn problem(&self) -> Result<std::sync::Arc<dyn GroundTruth>> {
        problem_by_name(&self.problem)
    }

    pub fn acquisition_kind(&self) -> Result<AcquisitionKind> {
        AcquisitionKind::parse(&self.acquisition, self.beta).map_err(|e| Error::config(e.to_string()))
    }

    /// Target probability θ.
    pub fn theta(&self) -> Result<f64> {
        Ok(self.threshold.unwrap_or(self.problem()?.theta()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_toml_str(
            "schema_version = 1\nproblem = \"discrim_lowdim\"\nacquisition = \"GlobalMI\"\niterations = 40\n",
        )
        .unwrap();
        assert_eq!(c, ExperimentConfig::new("discrim_lowdim", "GlobalMI", 40));
        assert_eq!(c.theta().unwrap(), 0.75);
    }

    #[test]
    fn toml_round_trip() {
        let mut c = ExperimentConfig::new("hartmann6_binary", "StraddleZ", 30);
        c.beta = Some(1.0);
        c.threshold = Some(0.6);
        c.optimizer.raw_samples = 64;
        c.output_dir = Some("out/x".into());
        let text = c.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = "problem = \"discrim_lowdim\"\nacquisition = \"EAVC\"\niterations = 40\n";
        let bad = [
            format!("schema_version = 2\n{base}"),
            "schema_version = 1\nproblem = \"nope\"\nacquisition = \"EAVC\"\niterations = 40\n".to_string(),
            "schema_version = 1\nproblem = \"discrim_lowdim\"\nacquisition = \"Nope\"\niterations = 40\n".to_string(),
            format!("schema_version = 1\n{base}initial_design = 1\n"),
            format!("schema_version = 1\n{base}initial_design = 41\n"),
            format!("schema_version = 1\n{base}threshold = 1.0\n"),
            format!("schema_version = 1\n{base}beta = 2.0\n"),
            format!("schema_version = 1\n{base}unknown_key = 3\n"),
            format!("schema_version = 1\n{base}[optimizer]\nrestarts = 0\n"),
            base.to_string(),
        ];
        for text in &bad {
            assert!(
                matches!(ExperimentConfig::from_toml_str(text), Err(Error::Config(_))),
                "accepted:\n{text}"
            );
        }
    }
}
