//! Experiment configuration (TOML).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{HarnessError, Representation, TrainConfig};
use crate::model::BranchSpec;

/// Model architecture knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// Branch architecture (shared by all three branches, and by the
    /// spectrogram baseline's single branch).
    pub branch: BranchSpec,
    /// Fusion-head hidden width (three-branch model only).
    pub hidden: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { branch: BranchSpec::desk_default(), hidden: 128 }
    }
}

/// Everything one `crossval` or `train` run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Dataset root (holds `manifest.tsv`).
    pub dataset_dir: PathBuf,
    /// Input representation; also selects the model kind.
    #[serde(default)]
    pub representation: Representation,
    /// Master seed; per-fold model and shuffle seeds derive from it.
    #[serde(default = "default_master_seed")]
    pub seed: u64,
    /// Where report files go; omitted = no files written.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainConfig,
}

fn default_master_seed() -> u64 {
    1
}

impl ExperimentConfig {
    /// Config with defaults everywhere except the dataset location.
    pub fn for_dataset(dataset_dir: impl Into<PathBuf>) -> Self {
        Self {
            dataset_dir: dataset_dir.into(),
            representation: Representation::default(),
            seed: default_master_seed(),
            output_dir: None,
            model: ModelSection::default(),
            train: TrainConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.model
            .branch
            .validate()
            .map_err(|e| HarnessError::Config(format!("model.branch: {e}")))?;
        if self.model.hidden == 0 {
            return Err(HarnessError::Config("model.hidden must be >= 1".into()));
        }
        self.train.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let config = ExperimentConfig::from_toml_str("dataset_dir = \"data/run1\"").unwrap();
        assert_eq!(config.dataset_dir, PathBuf::from("data/run1"));
        assert_eq!(config.representation, Representation::Cube3d);
        assert_eq!(config.seed, 1);
        assert_eq!(config.model.hidden, 128);
        assert_eq!(config.model.branch, BranchSpec::desk_default());
        assert_eq!(config.train, TrainConfig::default());
        assert!(config.output_dir.is_none());
    }

    #[test]
    fn full_config_round_trips() {
        let text = r#"
            dataset_dir = "data/run1"
            representation = "spectrogram"
            seed = 99
            output_dir = "reports/run1"

            [model]
            hidden = 64
            [model.branch]
            stem_channels = 8
            se_reduction = 4
            [[model.branch.stages]]
            expansion = 2
            kernel = 3
            stride = 2
            out_channels = 12
            repeats = 1

            [train]
            initial_lr = 0.05
            epochs = 10
            lr_decay_every = 4
            batch_size = 8
        "#;
        let config = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(config.representation, Representation::Spectrogram);
        assert_eq!(config.seed, 99);
        assert_eq!(config.model.hidden, 64);
        assert_eq!(config.model.branch.stem_channels, 8);
        assert_eq!(config.train.initial_lr, 0.05);
        assert_eq!(config.train.epochs, 10);
        assert_eq!(config.train.batch_size, 8);
        // Unset train keys keep their defaults.
        assert_eq!(config.train.momentum, TrainConfig::default().momentum);

        let text = toml::to_string(&config).unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("").is_err(), "dataset_dir required");
        assert!(
            ExperimentConfig::from_toml_str("dataset_dir = \"d\"\ntypo_key = 1").is_err(),
            "unknown keys rejected"
        );
        assert!(
            ExperimentConfig::from_toml_str(
                "dataset_dir = \"d\"\n[train]\ninitial_lr = -1.0"
            )
            .is_err(),
            "negative learning rate rejected"
        );
        assert!(
            ExperimentConfig::from_toml_str("dataset_dir = \"d\"\n[model]\nhidden = 0").is_err(),
            "zero hidden width rejected"
        );
        assert!(
            ExperimentConfig::from_toml_str(
                "dataset_dir = \"d\"\n[model.branch]\nstem_channels = 0"
            )
            .is_err(),
            "invalid branch spec rejected"
        );
    }
}
