//! Deterministic fixtures for the hot-path benchmarks.
//!
//! Everything is seeded so repeated `cargo bench` runs measure the same
//! inputs: a desk-scale recording (16 frames of 32 chirps, 64 samples per
//! chirp), its processed time-range-Doppler cube, the three orthogonal
//! projections, and a desk-scale three-branch model.

use trident_core::model::BranchSpec;
use trident_core::projection::orthogonal_project;
use trident_core::rdp::{range_doppler_process, RdpOptions};
use trident_core::sim::{build_scene, desk_classes, synthesize_beat_signal, SceneConfig};
use trident_core::{Open3dModel, ProjectionTriple, RadarParams, RawSignal, TrdCube};

/// Desk-scale waveform used by every fixture.
pub fn params() -> RadarParams {
    RadarParams::desk()
}

/// One antenna's recording of a seeded walking scene.
pub fn raw_signal() -> RawSignal {
    let config = SceneConfig::with_classes(desk_classes());
    let scene = build_scene(1, 7, &config).expect("fixture scene");
    synthesize_beat_signal(&scene, &params(), 0, 7).expect("fixture signal")
}

/// The 16x64x32 time-range-Doppler cube of [`raw_signal`].
pub fn cube() -> TrdCube {
    range_doppler_process(&raw_signal(), &RdpOptions::default()).expect("fixture cube")
}

/// `n` copies of the fixture cube's projections (forward cost does not
/// depend on the values, so clones make a fine batch).
pub fn triples(n: usize) -> Vec<ProjectionTriple> {
    let triple = orthogonal_project(&cube());
    vec![triple; n]
}

/// Desk-scale three-branch classifier for 6 classes.
pub fn model() -> Open3dModel {
    let cube = cube();
    Open3dModel::new(BranchSpec::desk_default(), (cube.t, cube.m, cube.n), 6, 128, 1)
        .expect("fixture model")
}
