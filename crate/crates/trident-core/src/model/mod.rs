//! Activity classifiers over projected radar representations.
//!
//! The three-branch model runs one EfficientNet-style feature extractor per
//! projected plane (range-Doppler, time-Doppler, time-range), concatenates
//! the three pooled feature vectors in that fixed order, and classifies the
//! fused vector with a one-hidden-layer MLP. The single-branch baseline
//! applies the same layer vocabulary to a Doppler spectrogram and a plain
//! dense head, standing in for a conventional 2D classifier.

pub mod baseline;
pub mod branch;
pub mod io;
pub mod open3d;

pub use baseline::Baseline2dModel;
pub use branch::Branch;
pub use io::{load_model, AnyModel, ModelIoError};
pub use open3d::{end_to_end_gradcheck, Open3dModel};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::NnError;

/// One stage of mobile inverted-bottleneck blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSpec {
    /// Channel expansion ratio of the bottleneck (1 keeps the width).
    pub expansion: usize,
    /// Depthwise kernel size (odd; padding is `kernel / 2`).
    pub kernel: usize,
    /// Stride of the first block in the stage; the rest use stride 1.
    pub stride: usize,
    /// Output channels of every block in the stage.
    pub out_channels: usize,
    /// Number of blocks in the stage.
    pub repeats: usize,
}

/// Architecture of one feature-extraction branch. Fields omitted in
/// configuration files fall back to the desk-scale default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchSpec {
    /// Channels produced by the stride-2 stem convolution.
    #[serde(default = "default_stem_channels")]
    pub stem_channels: usize,
    #[serde(default = "default_stages")]
    pub stages: Vec<StageSpec>,
    /// Squeeze-excitation bottleneck ratio, applied to expanded channels.
    #[serde(default = "default_se_reduction")]
    pub se_reduction: usize,
}

fn default_stem_channels() -> usize {
    16
}

fn default_stages() -> Vec<StageSpec> {
    vec![
        StageSpec { expansion: 1, kernel: 3, stride: 1, out_channels: 16, repeats: 1 },
        StageSpec { expansion: 4, kernel: 3, stride: 2, out_channels: 24, repeats: 2 },
        StageSpec { expansion: 4, kernel: 5, stride: 2, out_channels: 40, repeats: 2 },
    ]
}

fn default_se_reduction() -> usize {
    4
}

impl BranchSpec {
    /// Desk-scale default used throughout: three stages ending at 40
    /// channels, ~60k parameters per branch.
    pub fn desk_default() -> Self {
        Self {
            stem_channels: default_stem_channels(),
            stages: default_stages(),
            se_reduction: default_se_reduction(),
        }
    }

    /// Smallest useful configuration, for finite-difference tests.
    pub fn tiny() -> Self {
        Self {
            stem_channels: 4,
            stages: vec![StageSpec {
                expansion: 2,
                kernel: 3,
                stride: 2,
                out_channels: 6,
                repeats: 1,
            }],
            se_reduction: 4,
        }
    }

    /// Feature-vector width after global average pooling.
    pub fn output_width(&self) -> usize {
        self.stages.last().map_or(self.stem_channels, |s| s.out_channels)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.stem_channels == 0 {
            return Err(ModelError::BadSpec("stem channels must be positive".into()));
        }
        if self.se_reduction == 0 {
            return Err(ModelError::BadSpec("se reduction must be positive".into()));
        }
        for (i, st) in self.stages.iter().enumerate() {
            if st.stride != 1 && st.stride != 2 {
                return Err(ModelError::BadSpec(format!("stage {i}: stride must be 1 or 2")));
            }
            if st.repeats == 0 {
                return Err(ModelError::BadSpec(format!("stage {i}: repeats must be >= 1")));
            }
            if st.kernel == 0 || st.kernel % 2 == 0 {
                return Err(ModelError::BadSpec(format!("stage {i}: kernel must be odd")));
            }
            if st.expansion == 0 || st.out_channels == 0 {
                return Err(ModelError::BadSpec(format!(
                    "stage {i}: expansion and channels must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// Errors from model construction or application.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid branch spec: {0}")]
    BadSpec(String),
    #[error("{context}: spatial dims reduced to {h}x{w}")]
    SpatialUnderflow { context: String, h: usize, w: usize },
    #[error("input plane is {got_rows}x{got_cols}, model expects {rows}x{cols}")]
    InputDims { rows: usize, cols: usize, got_rows: usize, got_cols: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_default_ends_at_forty_features() {
        let spec = BranchSpec::desk_default();
        spec.validate().unwrap();
        assert_eq!(spec.output_width(), 40);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = BranchSpec::desk_default();
        spec.stages[1].stride = 3;
        assert!(spec.validate().is_err());

        let mut spec = BranchSpec::desk_default();
        spec.stages[0].kernel = 4;
        assert!(spec.validate().is_err());

        let mut spec = BranchSpec::desk_default();
        spec.stages[2].repeats = 0;
        assert!(spec.validate().is_err());
    }
}
