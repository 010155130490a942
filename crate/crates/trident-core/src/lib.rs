//! Radar human-activity-recognition toolkit.
//!
//! The crate implements the full pipeline from simulated FMCW baseband
//! signals to activity predictions:
//!
//! ```text
//!   scene ──▶ beat signal ──▶ range-Doppler cube ──▶ three planes ──▶ classifier
//!   (sim)        (sim)            (rdp)              (projection)    (model + nn)
//! ```
//!
//! * [`sim`] builds parametric point-scatterer motion scenes and renders them
//!   into dechirped multi-antenna baseband recordings; it also generates whole
//!   labelled datasets on disk.
//! * [`rdp`] turns raw recordings into 3D time-range-Doppler cubes via a dual
//!   FFT pipeline, and into 2D Doppler spectrograms for the baseline model.
//! * [`projection`] collapses cubes onto the range-Doppler, time-Doppler and
//!   time-range planes by exact axis means, and standardizes them.
//! * [`nn`] is a small differentiable-layer toolkit (convolutions, batch
//!   norm, SiLU, squeeze-and-excitation, dense, softmax cross-entropy, SGD)
//!   with finite-difference gradient verification.
//! * [`model`] assembles the three-branch classifier with an MLP fusion head,
//!   and the single-branch spectrogram baseline, including binary
//!   serialization of trained parameters.
//! * [`harness`] holds dataset persistence, leave-one-antenna-out
//!   cross-validation, the training loop, metrics and report writing.
//!
//! Everything is deterministic: given one master seed, scene construction,
//! noise, weight initialization and shuffling all flow through the salted
//! derivation scheme in [`seed`], so repeated runs reproduce results exactly.

pub mod fft;
pub mod harness;
pub mod model;
pub mod nn;
pub mod plane;
pub mod projection;
pub mod rdp;
pub mod seed;
pub mod sim;

pub use fft::{fft, ifft, FftError, FftPlan};
pub use harness::{
    read_cube, write_cube, CvReport, DatasetManifest, ExperimentConfig, ManifestRecord, Metrics,
    PreparedDataset, Representation, TrainConfig,
};
pub use model::{AnyModel, Baseline2dModel, BranchSpec, Open3dModel, StageSpec};
pub use nn::Tensor4;
pub use plane::Plane;
pub use projection::{NormStats, ProjectionTriple};
pub use rdp::{Spectrogram, TrdCube};
pub use sim::{DatasetRecipe, RadarParams, RawSignal, Scatterer, Scene, SceneConfig};

/// Speed of light in vacuum (m/s), shared by the simulator and the analytic
/// range/Doppler bin predictions so the two always agree.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
