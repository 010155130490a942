//! Dataset generation: recipes, record planning, and the simulate pipeline
//! (scene -> beat signal -> cube -> crops -> files).
//!
//! A recipe fixes the radar waveform, the per-class motion bands, the crop
//! policy and a master seed. Every output is a pure function of the recipe:
//! the scene of test `i` is drawn from `derive(master_seed, i)`, and each
//! antenna's noise stream is derived from that per-test seed plus the
//! antenna id, so regeneration is bitwise reproducible record by record.
//!
//! Output layout under the chosen root directory:
//!
//! ```text
//!   manifest.tsv                     record catalog (tab-separated, header)
//!   cubes/<record_id>.trdc          cropped time-range-Doppler cubes
//!   spectrograms/<record_id>.trdc   per-crop Doppler spectrograms (optional)
//!   raw/<test>_<antenna>.raws       raw beat signals (optional)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{write_cube, write_raw_signal, FormatError};
use crate::rdp::{self, RdpError, RdpOptions, TrdCube};
use crate::seed;
use crate::sim::scene::{build_scene, Band, ClassMotionSpec, SceneConfig, SceneError};
use crate::sim::signal::{synthesize_beat_signal, RadarParams, RawSignal, SignalError};

// ---------------------------------------------------------------------------
// recipe
// ---------------------------------------------------------------------------

/// Crop, seed and output options of a dataset run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSection {
    /// Master seed; every drawn value in the dataset descends from it.
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub tests_per_class: usize,
    /// Frames per cropped cube (L).
    #[serde(default = "default_crop_frames")]
    pub crop_frames: usize,
    /// Crops per recording (K), at evenly spaced offsets.
    #[serde(default = "default_crops_per_test")]
    pub crops_per_test: usize,
    /// Remove per-(frame, range) mean across chirps before the Doppler FFT.
    #[serde(default)]
    pub clutter_filter: bool,
    /// Also write one Doppler spectrogram per crop (the 2D baseline input).
    #[serde(default = "default_true")]
    pub emit_spectrograms: bool,
    /// Also write the raw beat signals (one file per test x antenna).
    #[serde(default)]
    pub emit_raw: bool,
}

fn default_seed() -> u64 {
    1
}
fn default_crop_frames() -> usize {
    16
}
fn default_crops_per_test() -> usize {
    6
}
fn default_true() -> bool {
    true
}

/// STFT geometry for the emitted spectrograms; defaults follow the cube's
/// Doppler resolution (window = chirps per frame, hop = half a window).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramSection {
    pub window: Option<usize>,
    pub hop: Option<usize>,
}

/// Full description of a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecipe {
    pub radar: RadarParams,
    pub dataset: DatasetSection,
    #[serde(default)]
    pub spectrogram: SpectrogramSection,
    pub scene: SceneConfig,
}

#[derive(Debug, Error)]
pub enum RecipeError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("recipe parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid recipe: {0}")]
    Invalid(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Rdp(#[from] RdpError),
    #[error(transparent)]
    File(#[from] FormatError),
}

impl DatasetRecipe {
    pub fn from_toml_str(text: &str) -> Result<Self, RecipeError> {
        let mut recipe: DatasetRecipe = toml::from_str(text)?;
        recipe.normalize();
        recipe.validate()?;
        Ok(recipe)
    }

    pub fn from_path(path: &Path) -> Result<Self, RecipeError> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    /// Fills derived fields: the sample rate is fixed by M and the chirp
    /// duration, so recipes may omit it.
    pub fn normalize(&mut self) {
        if self.radar.sample_rate_hz == 0.0 {
            self.radar.sample_rate_hz =
                self.radar.samples_per_chirp as f64 / self.radar.chirp_duration_s;
        }
    }

    pub fn validate(&self) -> Result<(), RecipeError> {
        self.radar.validate()?;
        let d = &self.dataset;
        if d.tests_per_class == 0 {
            return Err(RecipeError::Invalid("tests_per_class must be >= 1".into()));
        }
        if self.scene.classes.is_empty() {
            return Err(RecipeError::Invalid("at least one scene class required".into()));
        }
        if d.crop_frames == 0 || d.crops_per_test == 0 {
            return Err(RecipeError::Invalid("crop_frames and crops_per_test must be >= 1".into()));
        }
        if !d.crop_frames.is_power_of_two() {
            return Err(RecipeError::Invalid(format!(
                "crop_frames must be a power of two, got {}",
                d.crop_frames
            )));
        }
        if d.crop_frames > self.radar.frames {
            return Err(RecipeError::Invalid(format!(
                "crop_frames {} exceeds recording frames {}",
                d.crop_frames, self.radar.frames
            )));
        }
        let window = self.stft_window();
        let hop = self.stft_hop();
        if d.emit_spectrograms {
            if !window.is_power_of_two() {
                return Err(RecipeError::Invalid(format!(
                    "spectrogram window must be a power of two, got {window}"
                )));
            }
            if hop == 0 {
                return Err(RecipeError::Invalid("spectrogram hop must be >= 1".into()));
            }
            if window > d.crop_frames * self.radar.chirps_per_frame {
                return Err(RecipeError::Invalid(format!(
                    "spectrogram window {window} exceeds the {} chirps of one crop",
                    d.crop_frames * self.radar.chirps_per_frame
                )));
            }
        }
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.scene.classes.len()
    }

    pub fn total_tests(&self) -> usize {
        self.dataset.tests_per_class * self.classes()
    }

    pub fn stft_window(&self) -> usize {
        self.spectrogram.window.unwrap_or(self.radar.chirps_per_frame)
    }

    pub fn stft_hop(&self) -> usize {
        self.spectrogram.hop.unwrap_or((self.radar.chirps_per_frame / 2).max(1))
    }

    /// Rows x cols of the spectrograms this recipe emits (one per crop).
    pub fn spectrogram_dims(&self) -> (usize, usize) {
        let slow = self.dataset.crop_frames * self.radar.chirps_per_frame;
        let window = self.stft_window();
        ((slow - window) / self.stft_hop() + 1, window)
    }

    /// Cube dims (frames, range bins, Doppler bins) of each cropped record.
    pub fn cube_dims(&self) -> (usize, usize, usize) {
        (self.dataset.crop_frames, self.radar.samples_per_chirp, self.radar.chirps_per_frame)
    }
}

// ---------------------------------------------------------------------------
// presets
// ---------------------------------------------------------------------------

fn motion_class(
    name: &str,
    scatterers: [usize; 2],
    velocity: Band,
    amplitude: Band,
    freq: Band,
    base_range: Band,
) -> ClassMotionSpec {
    ClassMotionSpec {
        name: name.to_string(),
        scatterers,
        torso_velocity_mps: velocity,
        osc_amplitude_m: amplitude,
        osc_freq_hz: freq,
        base_range_m: base_range,
        noise_std: [0.5, 1.5],
    }
}

/// Six desk-scale activity classes, separable in torso velocity and limb
/// oscillation. Velocities stay well inside the +/-15 m/s unambiguous band
/// and ranges inside the 9.6 m unambiguous range.
pub fn desk_classes() -> Vec<ClassMotionSpec> {
    vec![
        motion_class("idle", [3, 4], [-0.3, 0.3], [0.02, 0.06], [0.6, 1.0], [2.5, 6.0]),
        motion_class("walk-away-slow", [4, 6], [1.5, 2.5], [0.10, 0.20], [1.0, 1.6], [2.5, 5.0]),
        motion_class("walk-away-fast", [4, 6], [4.0, 5.0], [0.20, 0.35], [1.8, 2.6], [2.5, 5.0]),
        motion_class("walk-toward", [4, 6], [-5.0, -4.0], [0.20, 0.35], [1.8, 2.6], [3.5, 6.0]),
        motion_class("arm-wave", [3, 5], [-0.4, 0.4], [0.30, 0.45], [2.5, 3.2], [2.5, 6.0]),
        motion_class("jog-away", [4, 6], [5.5, 6.5], [0.25, 0.40], [2.0, 2.8], [2.5, 4.5]),
    ]
}

/// Two single-scatterer classes whose Doppler content is *identical*, not
/// just identically distributed: velocity, oscillation amplitude, frequency,
/// phase and noise level are all pinned, so the only per-scene draw is the
/// start range (near band vs. a disjoint far band). Only range-aware
/// representations can separate them; anything that integrates range away
/// sees the same signal for both classes.
pub fn range_contrast_classes() -> Vec<ClassMotionSpec> {
    let near = ClassMotionSpec {
        name: "near-field".to_string(),
        scatterers: [1, 1],
        torso_velocity_mps: [0.0, 0.0],
        osc_amplitude_m: [0.3, 0.3],
        osc_freq_hz: [2.0, 2.0],
        base_range_m: [2.0, 3.5],
        noise_std: [0.8, 0.8],
    };
    let mut far = near.clone();
    far.name = "far-field".to_string();
    far.base_range_m = [5.5, 7.0];
    vec![near, far]
}

impl DatasetRecipe {
    fn preset(classes: Vec<ClassMotionSpec>, tests_per_class: usize, seed: u64) -> Self {
        Self {
            radar: RadarParams::desk().with_frames(64),
            dataset: DatasetSection {
                seed,
                tests_per_class,
                crop_frames: 16,
                crops_per_test: 6,
                clutter_filter: false,
                emit_spectrograms: true,
                emit_raw: false,
            },
            spectrogram: SpectrogramSection::default(),
            scene: SceneConfig::with_classes(classes),
        }
    }

    /// Full desk benchmark: 6 classes x 10 tests x 4 antennas x 6 crops
    /// = 1440 records of 16x64x32 cubes.
    pub fn desk(seed: u64) -> Self {
        Self::preset(desk_classes(), 10, seed)
    }

    /// Smoke benchmark: first 4 desk classes x 5 tests = 480 records.
    pub fn smoke(seed: u64) -> Self {
        let classes = desk_classes().into_iter().take(4).collect();
        Self::preset(classes, 5, seed)
    }

    /// Range-information experiment: 2 classes x 5 tests = 240 records whose
    /// classes differ only in start range. Every scene knob that the class
    /// bands do not already pin is pinned here too — reflectivity, bob
    /// amplitude and oscillation phase — so no per-scene fingerprint other
    /// than range survives for a model to key on.
    pub fn range_contrast(seed: u64) -> Self {
        let mut recipe = Self::preset(range_contrast_classes(), 5, seed);
        recipe.scene.torso_amplitude = [1.0, 1.0];
        recipe.scene.limb_amplitude = [0.45, 0.45];
        recipe.scene.torso_bob_m = [0.3, 0.3];
        recipe.scene.limb_offset_m = 0.0;
        recipe.scene.velocity_jitter_mps = 0.0;
        recipe.scene.osc_phase_rad = [0.9, 0.9];
        recipe
    }
}

// ---------------------------------------------------------------------------
// record planning
// ---------------------------------------------------------------------------

/// One manifest row, known before anything is synthesized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedRecord {
    pub record_id: String,
    pub test_id: usize,
    pub antenna_id: usize,
    pub class_label: usize,
    pub crop_index: usize,
    /// Cube path relative to the dataset root.
    pub cube_path: String,
}

/// Pure manifest arithmetic: class labels round-robin over tests, one record
/// per (test, antenna, crop). `total_tests x antennas x crops` rows.
pub fn plan_records(
    total_tests: usize,
    classes: usize,
    antenna_count: usize,
    crops_per_test: usize,
) -> Vec<PlannedRecord> {
    assert!(classes >= 1, "need at least one class");
    let mut records = Vec::with_capacity(total_tests * antenna_count * crops_per_test);
    for test_id in 0..total_tests {
        let class_label = test_id % classes;
        for antenna_id in 0..antenna_count {
            for crop_index in 0..crops_per_test {
                let record_id = format!("t{test_id:04}_a{antenna_id}_c{crop_index}");
                records.push(PlannedRecord {
                    cube_path: format!("cubes/{record_id}.trdc"),
                    record_id,
                    test_id,
                    antenna_id,
                    class_label,
                    crop_index,
                });
            }
        }
    }
    records
}

// ---------------------------------------------------------------------------
// generation
// ---------------------------------------------------------------------------

/// Where a generated dataset landed.
#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub root: PathBuf,
    pub manifest_path: PathBuf,
    pub records: usize,
}

/// Synthesizes every record of `recipe` under `root` and writes the
/// manifest. Rerunning with the same recipe produces bitwise-identical
/// files.
pub fn generate_dataset(recipe: &DatasetRecipe, root: &Path) -> Result<GeneratedDataset, RecipeError> {
    recipe.validate()?;
    let d = &recipe.dataset;
    let cubes_dir = root.join("cubes");
    fs::create_dir_all(&cubes_dir)?;
    let spectro_dir = root.join("spectrograms");
    if d.emit_spectrograms {
        fs::create_dir_all(&spectro_dir)?;
    }
    let raw_dir = root.join("raw");
    if d.emit_raw {
        fs::create_dir_all(&raw_dir)?;
    }

    let plan = plan_records(recipe.total_tests(), recipe.classes(), recipe.radar.antenna_count, d.crops_per_test);
    let options = RdpOptions { clutter_filter: d.clutter_filter, ..RdpOptions::default() };

    let mut manifest = String::from("record_id\ttest_id\tantenna_id\tclass_label\tcrop_index\tcube_path\n");
    let mut row = 0;
    for test_id in 0..recipe.total_tests() {
        let class_label = test_id % recipe.classes();
        let test_seed = seed::derive(d.seed, test_id as u64);
        let scene = build_scene(class_label, test_seed, &recipe.scene)?;
        for antenna_id in 0..recipe.radar.antenna_count {
            let raw = synthesize_beat_signal(&scene, &recipe.radar, antenna_id, test_seed)?;
            let cube = rdp::range_doppler_process(&raw, &options)?;
            let crops = rdp::crop_cube(&cube, d.crop_frames, d.crops_per_test)?;
            let offsets = rdp::crop_offsets(cube.t, d.crop_frames, d.crops_per_test);

            for (crop_index, crop) in crops.iter().enumerate() {
                let planned = &plan[row];
                debug_assert_eq!(
                    (planned.test_id, planned.antenna_id, planned.crop_index),
                    (test_id, antenna_id, crop_index),
                    "generation order must match the planned manifest"
                );
                write_cube(&root.join(&planned.cube_path), crop)?;
                if d.emit_spectrograms {
                    let spec = crop_spectrogram(recipe, &raw, offsets[crop_index])?;
                    write_cube(
                        &spectro_dir.join(format!("{}.trdc", planned.record_id)),
                        &spec,
                    )?;
                }
                manifest.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    planned.record_id, test_id, antenna_id, class_label, crop_index, planned.cube_path
                ));
                row += 1;
            }
            if d.emit_raw {
                write_raw_signal(&raw_dir.join(format!("t{test_id:04}_a{antenna_id}.raws")), &raw)?;
            }
        }
    }

    let manifest_path = root.join("manifest.tsv");
    fs::write(&manifest_path, manifest)?;
    Ok(GeneratedDataset { root: root.to_path_buf(), manifest_path, records: row })
}

/// Doppler spectrogram of the chirps underlying one crop, stored as a
/// 1-frame cube (rows = STFT steps, cols = Doppler bins).
fn crop_spectrogram(
    recipe: &DatasetRecipe,
    raw: &RawSignal,
    start_frame: usize,
) -> Result<TrdCube, RecipeError> {
    let p = &recipe.radar;
    let chirp_len = p.samples_per_chirp;
    let per_frame = p.chirps_per_frame * chirp_len;
    let begin = start_frame * per_frame;
    let end = begin + recipe.dataset.crop_frames * per_frame;
    let segment = RawSignal {
        samples: raw.samples[begin..end].to_vec(),
        params: p.with_frames(recipe.dataset.crop_frames),
        antenna_id: raw.antenna_id,
    };
    let spec = rdp::spectrogram(&segment, recipe.stft_window(), recipe.stft_hop())?;
    let plane = spec.values;
    Ok(TrdCube::from_vec(1, plane.rows(), plane.cols(), plane.values().to_vec()))
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::read_cube;

    fn tiny_recipe(seed: u64) -> DatasetRecipe {
        let mut recipe = DatasetRecipe::preset(desk_classes().into_iter().take(2).collect(), 1, seed);
        recipe.radar = recipe.radar.with_frames(8);
        recipe.radar.antenna_count = 2;
        recipe.dataset.crop_frames = 4;
        recipe.dataset.crops_per_test = 2;
        recipe
    }

    #[test]
    fn paper_scale_plan_counts_5544_records() {
        assert_eq!(plan_records(231, 6, 4, 6).len(), 5544);
        assert_eq!(plan_records(10, 5, 4, 6).len(), 240);
    }

    #[test]
    fn plan_round_robins_classes_and_unique_ids() {
        let plan = plan_records(7, 3, 2, 2);
        assert_eq!(plan.len(), 7 * 2 * 2);
        for r in &plan {
            assert_eq!(r.class_label, r.test_id % 3);
        }
        let mut ids: Vec<&str> = plan.iter().map(|r| r.record_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), plan.len(), "record ids must be unique");
    }

    #[test]
    fn generation_writes_manifest_and_readable_cubes() {
        let dir = tempfile::tempdir().unwrap();
        let recipe = tiny_recipe(3);
        let out = generate_dataset(&recipe, dir.path()).unwrap();
        assert_eq!(out.records, 2 * 2 * 2);

        let manifest = std::fs::read_to_string(&out.manifest_path).unwrap();
        let lines: Vec<&str> = manifest.lines().collect();
        assert_eq!(lines.len(), 1 + out.records);
        assert_eq!(lines[0], "record_id\ttest_id\tantenna_id\tclass_label\tcrop_index\tcube_path");

        let first: Vec<&str> = lines[1].split('\t').collect();
        let cube = read_cube(&dir.path().join(first[5])).unwrap();
        assert_eq!((cube.t, cube.m, cube.n), recipe.cube_dims());

        let spec_path = dir.path().join("spectrograms").join(format!("{}.trdc", first[0]));
        let spec = read_cube(&spec_path).unwrap();
        let (rows, cols) = recipe.spectrogram_dims();
        assert_eq!((spec.t, spec.m, spec.n), (1, rows, cols));
    }

    #[test]
    fn regeneration_is_bitwise_identical() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let recipe = tiny_recipe(9);
        generate_dataset(&recipe, dir_a.path()).unwrap();
        generate_dataset(&recipe, dir_b.path()).unwrap();

        let manifest_a = std::fs::read(dir_a.path().join("manifest.tsv")).unwrap();
        let manifest_b = std::fs::read(dir_b.path().join("manifest.tsv")).unwrap();
        assert_eq!(manifest_a, manifest_b);

        for name in ["cubes/t0000_a0_c0.trdc", "cubes/t0001_a1_c1.trdc", "spectrograms/t0001_a0_c1.trdc"] {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn different_seeds_change_cube_contents() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        generate_dataset(&tiny_recipe(1), dir_a.path()).unwrap();
        generate_dataset(&tiny_recipe(2), dir_b.path()).unwrap();
        let a = std::fs::read(dir_a.path().join("cubes/t0000_a0_c0.trdc")).unwrap();
        let b = std::fs::read(dir_b.path().join("cubes/t0000_a0_c0.trdc")).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn recipe_toml_round_trip_with_derived_sample_rate() {
        let text = r#"
            [radar]
            carrier_hz = 77e9
            bandwidth_hz = 1e9
            chirp_duration_s = 64e-6
            samples_per_chirp = 64
            chirps_per_frame = 32
            frames = 64
            antenna_count = 4

            [dataset]
            seed = 7
            tests_per_class = 2

            [scene]
            [[scene.classes]]
            name = "idle"
            scatterers = [3, 4]
            torso_velocity_mps = [-0.3, 0.3]
            osc_amplitude_m = [0.02, 0.06]
            osc_freq_hz = [0.6, 1.0]
            base_range_m = [2.5, 6.0]
            noise_std = [0.5, 1.5]

            [[scene.classes]]
            name = "walk"
            scatterers = [4, 6]
            torso_velocity_mps = [1.5, 2.5]
            osc_amplitude_m = [0.1, 0.2]
            osc_freq_hz = [1.0, 1.6]
            base_range_m = [2.5, 5.0]
            noise_std = [0.5, 1.5]
        "#;
        let recipe = DatasetRecipe::from_toml_str(text).unwrap();
        assert_eq!(recipe.radar.sample_rate_hz, 1e6);
        assert_eq!(recipe.dataset.seed, 7);
        assert_eq!(recipe.dataset.crop_frames, 16);
        assert!(recipe.dataset.emit_spectrograms);
        assert!(!recipe.dataset.emit_raw);
        assert_eq!(recipe.classes(), 2);
        assert_eq!(recipe.total_tests(), 4);
        assert_eq!(recipe.stft_window(), 32);
        assert_eq!(recipe.stft_hop(), 16);
        assert_eq!(recipe.spectrogram_dims(), ((512 - 32) / 16 + 1, 32));
    }

    #[test]
    fn invalid_recipes_are_rejected() {
        let mut r = tiny_recipe(1);
        r.dataset.crop_frames = 32;
        assert!(matches!(r.validate(), Err(RecipeError::Invalid(_))), "crop longer than recording");

        let mut r = tiny_recipe(1);
        r.dataset.tests_per_class = 0;
        assert!(r.validate().is_err());

        let mut r = tiny_recipe(1);
        r.scene.classes.clear();
        assert!(r.validate().is_err());

        let mut r = tiny_recipe(1);
        r.spectrogram.window = Some(recipe_window_too_big(&r));
        assert!(r.validate().is_err());
    }

    fn recipe_window_too_big(r: &DatasetRecipe) -> usize {
        (r.dataset.crop_frames * r.radar.chirps_per_frame * 2).next_power_of_two()
    }

    #[test]
    fn presets_have_expected_shapes() {
        let desk = DatasetRecipe::desk(1);
        desk.validate().unwrap();
        assert_eq!(desk.classes(), 6);
        assert_eq!(desk.total_tests() * desk.radar.antenna_count * desk.dataset.crops_per_test, 1440);
        assert_eq!(desk.cube_dims(), (16, 64, 32));

        let smoke = DatasetRecipe::smoke(1);
        smoke.validate().unwrap();
        assert_eq!(smoke.classes(), 4);
        assert_eq!(
            smoke.total_tests() * smoke.radar.antenna_count * smoke.dataset.crops_per_test,
            480
        );

        let contrast = DatasetRecipe::range_contrast(1);
        contrast.validate().unwrap();
        assert_eq!(contrast.classes(), 2);
        let [near, far] = [&contrast.scene.classes[0], &contrast.scene.classes[1]];
        assert_eq!(near.torso_velocity_mps, far.torso_velocity_mps);
        assert_eq!(near.osc_amplitude_m, far.osc_amplitude_m);
        assert_eq!(near.osc_freq_hz, far.osc_freq_hz);
        assert!(near.base_range_m[1] < far.base_range_m[0], "range bands must be disjoint");
        // Start range must be the *only* scene-to-scene variation: every
        // other band is pinned, so scenes differ in range and nothing else.
        for class in [near, far] {
            assert_eq!(class.scatterers[0], class.scatterers[1]);
            for band in [
                class.torso_velocity_mps,
                class.osc_amplitude_m,
                class.osc_freq_hz,
                class.noise_std,
            ] {
                assert_eq!(band[0], band[1], "class bands must be pinned");
            }
        }
        for band in [
            contrast.scene.torso_amplitude,
            contrast.scene.limb_amplitude,
            contrast.scene.torso_bob_m,
            contrast.scene.osc_phase_rad,
        ] {
            assert_eq!(band[0], band[1], "scene knobs must be pinned");
        }
        assert_eq!(contrast.scene.limb_offset_m, 0.0);
        assert_eq!(contrast.scene.velocity_jitter_mps, 0.0);
    }
}
