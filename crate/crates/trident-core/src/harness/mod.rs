//! Experiment harness: dataset persistence, leave-one-antenna-out
//! cross-validation, the SGD training loop, metrics, and report files.
//!
//! The harness is deliberately file-centric: datasets are directories of
//! checksummed binary records plus a tab-separated manifest, and experiment
//! results are tab-separated reports, so every stage can be inspected,
//! diffed, and reproduced byte for byte.

mod config;
mod crossval;
mod data;
mod file_io;
mod manifest;
mod metrics;
mod split;
mod train;

pub use config::{ExperimentConfig, ModelSection};
pub use crossval::{
    build_model, run_cross_validation, run_cross_validation_on, run_fold, CvReport, FoldReport,
};
pub use data::{PreparedDataset, Representation};
pub use file_io::{read_cube, read_raw_signal, write_cube, write_raw_signal, FormatError};
pub use manifest::{DatasetManifest, ManifestError, ManifestRecord, MANIFEST_HEADER};
pub use metrics::{evaluate, Metrics};
pub use split::split_leave_one_antenna_out;
pub use train::{default_decay_every, train, EpochStats, TrainConfig, TrainOutcome};

use thiserror::Error;

use crate::model::{ModelError, ModelIoError};
use crate::nn::NnError;
use crate::projection::ProjectionError;

/// Any failure while preparing data, training, evaluating or reporting.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Toml(#[from] Box<toml::de::Error>),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    ModelIo(#[from] ModelIoError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("the dataset holds {found} records but the model consumes {expected}")]
    RepresentationMismatch { expected: &'static str, found: &'static str },
    #[error("antenna {requested} not present; dataset has antennas {available:?}")]
    UnknownAntenna { requested: usize, available: Vec<usize> },
    #[error("holding out antenna {antenna} leaves an empty {side} set")]
    EmptySplit { antenna: usize, side: &'static str },
    #[error("empty record set for {context}")]
    EmptyIndices { context: &'static str },
    #[error("class label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error(
        "non-finite loss ({loss}) at epoch {epoch}, batch {batch}; \
         the learning rate is likely too high for this batch size"
    )]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64 },
    #[error("cross-validation needs at least 2 antennas, dataset has {0}")]
    TooFewAntennas(usize),
    #[error("fold {fold} (held-out antenna {antenna}) failed: {source}")]
    FoldFailed {
        fold: usize,
        antenna: usize,
        #[source]
        source: Box<HarnessError>,
    },
}

impl From<toml::de::Error> for HarnessError {
    fn from(err: toml::de::Error) -> Self {
        HarnessError::Toml(Box::new(err))
    }
}
