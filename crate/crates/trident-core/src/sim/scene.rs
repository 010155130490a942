//! Parametric point-scatterer motion scenes.
//!
//! Each activity class is described by ranges for a handful of kinematic
//! parameters ([`ClassMotionSpec`]); [`build_scene`] draws a concrete
//! [`Scene`] from those ranges. A scene is a torso scatterer plus a few limb
//! scatterers that ride on the torso trajectory with sinusoidal oscillation:
//!
//! ```text
//!   r_i(t) = base_range_m + radial_velocity_mps * t
//!          + osc_amplitude_m * sin(2 pi osc_freq_hz * t + osc_phase_rad)
//! ```
//!
//! Classes are made separable by construction: their velocity and
//! oscillation bands do not overlap unless a dataset deliberately wants them
//! to (e.g. the range-only experiment, where two classes pin every motion
//! parameter to the same value and differ only in `base_range_m`).

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One point scatterer on a straight-line-plus-sinusoid radial trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Scatterer {
    /// Unitless reflectivity (> 0).
    pub amplitude: f64,
    /// Radial distance at t = 0 (m, > 0).
    pub base_range_m: f64,
    /// Constant radial velocity (m/s); positive = receding.
    pub radial_velocity_mps: f64,
    /// Amplitude of the sinusoidal range oscillation (m).
    pub osc_amplitude_m: f64,
    /// Frequency of the oscillation (Hz).
    pub osc_freq_hz: f64,
    /// Phase of the oscillation (rad).
    pub osc_phase_rad: f64,
}

impl Scatterer {
    /// Instantaneous radial range at time `t` seconds.
    #[inline]
    pub fn range_at(&self, t: f64) -> f64 {
        self.base_range_m
            + self.radial_velocity_mps * t
            + self.osc_amplitude_m
                * (2.0 * std::f64::consts::PI * self.osc_freq_hz * t + self.osc_phase_rad).sin()
    }

    /// Bounds on `range_at` over `[0, duration]`, from the monotone linear
    /// part plus the oscillation envelope.
    pub fn range_bounds(&self, duration: f64) -> (f64, f64) {
        let end = self.base_range_m + self.radial_velocity_mps * duration;
        let lo = self.base_range_m.min(end) - self.osc_amplitude_m.abs();
        let hi = self.base_range_m.max(end) + self.osc_amplitude_m.abs();
        (lo, hi)
    }
}

/// A labelled collection of scatterers plus the receiver noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub class_label: usize,
    pub scatterers: Vec<Scatterer>,
    /// Per-component standard deviation of the additive complex noise.
    pub noise_std: f64,
}

/// Inclusive `[lo, hi]` parameter band; `lo == hi` pins the value.
pub type Band = [f64; 2];

/// Kinematic parameter bands for one activity class.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClassMotionSpec {
    /// Human-readable activity name (reports only).
    pub name: String,
    /// Total scatterer count band (torso + limbs), min 1.
    pub scatterers: [usize; 2],
    /// Torso radial velocity band (m/s).
    pub torso_velocity_mps: Band,
    /// Limb oscillation amplitude band (m).
    pub osc_amplitude_m: Band,
    /// Limb oscillation frequency band (Hz).
    pub osc_freq_hz: Band,
    /// Torso starting range band (m).
    pub base_range_m: Band,
    /// Receiver noise standard deviation band.
    pub noise_std: Band,
}

/// Scene-construction knobs shared by all classes.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SceneConfig {
    /// Per-class motion bands; class label = index into this list.
    pub classes: Vec<ClassMotionSpec>,
    /// Torso reflectivity band.
    #[serde(default = "default_torso_amplitude")]
    pub torso_amplitude: Band,
    /// Limb reflectivity band.
    #[serde(default = "default_limb_amplitude")]
    pub limb_amplitude: Band,
    /// Small vertical-bob oscillation band applied to the torso (m).
    #[serde(default = "default_torso_bob_m")]
    pub torso_bob_m: Band,
    /// Limb placement offset from the torso range (+/- m).
    #[serde(default = "default_limb_offset_m")]
    pub limb_offset_m: f64,
    /// Per-limb radial-velocity jitter around the torso velocity (+/- m/s).
    #[serde(default = "default_velocity_jitter_mps")]
    pub velocity_jitter_mps: f64,
    /// Oscillation phase band (rad). The default spans a full turn; pinning
    /// it makes every scatterer oscillate in lockstep, which range-contrast
    /// datasets use to keep Doppler content identical across scenes.
    #[serde(default = "default_osc_phase_rad")]
    pub osc_phase_rad: Band,
}

impl SceneConfig {
    /// Config with the standard reflectivity/bob/jitter knobs and the given
    /// class list.
    pub fn with_classes(classes: Vec<ClassMotionSpec>) -> Self {
        Self {
            classes,
            torso_amplitude: default_torso_amplitude(),
            limb_amplitude: default_limb_amplitude(),
            torso_bob_m: default_torso_bob_m(),
            limb_offset_m: default_limb_offset_m(),
            velocity_jitter_mps: default_velocity_jitter_mps(),
            osc_phase_rad: default_osc_phase_rad(),
        }
    }
}

fn default_torso_amplitude() -> Band {
    [0.8, 1.2]
}
fn default_limb_amplitude() -> Band {
    [0.3, 0.6]
}
fn default_torso_bob_m() -> Band {
    [0.01, 0.03]
}
fn default_limb_offset_m() -> f64 {
    0.25
}
fn default_velocity_jitter_mps() -> f64 {
    0.1
}
fn default_osc_phase_rad() -> Band {
    [0.0, 2.0 * std::f64::consts::PI]
}

/// Errors from scene construction.
#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("unknown class id {0} (config defines {1} classes)")]
    UnknownClass(usize, usize),
    #[error("class {class}: empty parameter range in `{field}` ({lo} > {hi})")]
    EmptyRange { class: usize, field: &'static str, lo: f64, hi: f64 },
}

fn checked_band(class: usize, field: &'static str, band: Band) -> Result<Band, SceneError> {
    if band[0] > band[1] {
        return Err(SceneError::EmptyRange { class, field, lo: band[0], hi: band[1] });
    }
    Ok(band)
}

/// Uniform draw from an inclusive band; a degenerate band pins the value.
fn draw(rng: &mut ChaCha8Rng, band: Band) -> f64 {
    if band[0] == band[1] {
        band[0]
    } else {
        rng.random_range(band[0]..band[1])
    }
}

/// Builds the scene for `(class_label, rng_seed)`.
///
/// Deterministic: the same pair always yields a bitwise-identical scene. The
/// draw order (torso first, then each limb's parameters in field order) is
/// part of that contract and must not be reordered.
pub fn build_scene(
    class_label: usize,
    rng_seed: u64,
    config: &SceneConfig,
) -> Result<Scene, SceneError> {
    let spec = config
        .classes
        .get(class_label)
        .ok_or(SceneError::UnknownClass(class_label, config.classes.len()))?;

    let count_band = spec.scatterers;
    if count_band[0] > count_band[1] || count_band[0] == 0 {
        return Err(SceneError::EmptyRange {
            class: class_label,
            field: "scatterers",
            lo: count_band[0] as f64,
            hi: count_band[1] as f64,
        });
    }
    let velocity = checked_band(class_label, "torso_velocity_mps", spec.torso_velocity_mps)?;
    let osc_amp = checked_band(class_label, "osc_amplitude_m", spec.osc_amplitude_m)?;
    let osc_freq = checked_band(class_label, "osc_freq_hz", spec.osc_freq_hz)?;
    let base_range = checked_band(class_label, "base_range_m", spec.base_range_m)?;
    let noise = checked_band(class_label, "noise_std", spec.noise_std)?;
    let torso_amp = checked_band(class_label, "torso_amplitude", config.torso_amplitude)?;
    let limb_amp = checked_band(class_label, "limb_amplitude", config.limb_amplitude)?;
    let torso_bob = checked_band(class_label, "torso_bob_m", config.torso_bob_m)?;
    let phase = checked_band(class_label, "osc_phase_rad", config.osc_phase_rad)?;

    let mut rng = crate::seed::rng(rng_seed, crate::seed::salt::SCENE);
    let count = if count_band[0] == count_band[1] {
        count_band[0]
    } else {
        rng.random_range(count_band[0]..=count_band[1])
    };

    let torso_range = draw(&mut rng, base_range);
    let torso_velocity = draw(&mut rng, velocity);
    let gait_freq = draw(&mut rng, osc_freq);
    let torso = Scatterer {
        amplitude: draw(&mut rng, torso_amp),
        base_range_m: torso_range,
        radial_velocity_mps: torso_velocity,
        osc_amplitude_m: draw(&mut rng, torso_bob),
        osc_freq_hz: gait_freq,
        osc_phase_rad: draw(&mut rng, phase),
    };

    let mut scatterers = vec![torso];
    for _ in 1..count {
        let offset = if config.limb_offset_m > 0.0 {
            rng.random_range(-config.limb_offset_m..config.limb_offset_m)
        } else {
            0.0
        };
        let jitter = if config.velocity_jitter_mps > 0.0 {
            rng.random_range(-config.velocity_jitter_mps..config.velocity_jitter_mps)
        } else {
            0.0
        };
        scatterers.push(Scatterer {
            amplitude: draw(&mut rng, limb_amp),
            base_range_m: (torso_range + offset).max(0.1),
            radial_velocity_mps: torso_velocity + jitter,
            osc_amplitude_m: draw(&mut rng, osc_amp),
            osc_freq_hz: draw(&mut rng, osc_freq),
            osc_phase_rad: draw(&mut rng, phase),
        });
    }

    Ok(Scene { class_label, scatterers, noise_std: draw(&mut rng, noise) })
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
