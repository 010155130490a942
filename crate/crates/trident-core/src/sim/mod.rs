//! Synthetic FMCW radar scenes, baseband synthesis, and dataset generation.
//!
//! A [`Scene`] is a small set of point scatterers approximating a moving
//! human: one torso plus a few oscillating limbs. [`synthesize_beat_signal`]
//! renders a scene into the dechirped baseband samples a stretch-processed
//! FMCW receiver would produce, per antenna. [`generate_dataset`] drives the
//! whole front half of the pipeline to write a labelled cube dataset to disk.

mod dataset;
mod scene;
mod signal;

pub use dataset::{
    desk_classes, generate_dataset, plan_records, range_contrast_classes, DatasetRecipe,
    DatasetSection, GeneratedDataset, PlannedRecord, RecipeError, SpectrogramSection,
};
pub use scene::{build_scene, ClassMotionSpec, Scatterer, Scene, SceneConfig, SceneError};
pub use signal::{synthesize_beat_signal, RadarParams, RawSignal, SignalError};
