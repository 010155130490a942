//! Dechirped FMCW baseband synthesis.
//!
//! A stretch-processed FMCW receiver mixes the received chirp with the
//! transmitted one, so a point target at range `r` appears as a complex
//! sinusoid at the beat frequency `f_b` plus a range-proportional phase.
//! For chirp index `p` (slow time `t_p = p * chirp_duration_s`, range frozen
//! within a chirp) and fast-time sample `m` (`t_m = m / sample_rate_hz`):
//!
//! ```text
//!   sample[p*M + m] = sum_i a_i * g_ant * exp(j 2 pi (f_b_i(t_p) t_m + 2 f_c r_i(t_p) / c))
//!                     + noise,
//!   f_b_i(t_p) = 2 * (bandwidth_hz / chirp_duration_s) * r_i(t_p) / c
//! ```
//!
//! Antennas observe the same scene through a fixed complex gain `g_ant`
//! (drawn once per antenna id, constant across all tests and datasets) and
//! receive independent noise streams derived from `(rng_seed, antenna_id)`.
//! The beat frequency must stay below the sample rate, which caps usable
//! range at `c * M / (2 * bandwidth_hz)`.

use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::{self, salt};
use crate::sim::Scene;
use crate::SPEED_OF_LIGHT;

/// FMCW waveform and framing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarParams {
    /// Carrier frequency (Hz).
    pub carrier_hz: f64,
    /// Chirp sweep bandwidth (Hz).
    pub bandwidth_hz: f64,
    /// Duration of one chirp (s).
    pub chirp_duration_s: f64,
    /// Fast-time samples per chirp (M, power of two).
    pub samples_per_chirp: usize,
    /// Chirps per frame (N, power of two).
    pub chirps_per_frame: usize,
    /// Frames per recording (T, power of two).
    pub frames: usize,
    /// Complex baseband sample rate (Hz); always `M / chirp_duration_s`.
    /// May be omitted in configuration files; loaders derive it.
    #[serde(default)]
    pub sample_rate_hz: f64,
    /// Number of receive antennas.
    pub antenna_count: usize,
}

impl RadarParams {
    /// Desk-scale defaults: 16 frames of 32 chirps with 64 samples each at a
    /// 77 GHz carrier and 1 GHz sweep — small enough to train on a CPU while
    /// keeping every dimension a power of two.
    pub fn desk() -> Self {
        let samples_per_chirp = 64;
        let chirp_duration_s = 64e-6;
        Self {
            carrier_hz: 77e9,
            bandwidth_hz: 1e9,
            chirp_duration_s,
            samples_per_chirp,
            chirps_per_frame: 32,
            frames: 16,
            sample_rate_hz: samples_per_chirp as f64 / chirp_duration_s,
            antenna_count: 4,
        }
    }

    /// Same waveform with a different recording length in frames.
    pub fn with_frames(mut self, frames: usize) -> Self {
        self.frames = frames;
        self
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        for (name, v) in [
            ("samples_per_chirp", self.samples_per_chirp),
            ("chirps_per_frame", self.chirps_per_frame),
            ("frames", self.frames),
        ] {
            if v == 0 || !v.is_power_of_two() {
                return Err(SignalError::InvalidParams(format!(
                    "{name} must be a power of two >= 1, got {v}"
                )));
            }
        }
        if self.antenna_count == 0 {
            return Err(SignalError::InvalidParams("antenna_count must be >= 1".into()));
        }
        if !(self.carrier_hz > 0.0 && self.bandwidth_hz > 0.0 && self.chirp_duration_s > 0.0) {
            return Err(SignalError::InvalidParams(
                "carrier, bandwidth and chirp duration must be positive".into(),
            ));
        }
        let derived = self.samples_per_chirp as f64 / self.chirp_duration_s;
        if ((self.sample_rate_hz - derived) / derived).abs() > 1e-9 {
            return Err(SignalError::InvalidParams(format!(
                "sample_rate_hz {} inconsistent with M / chirp_duration = {derived}",
                self.sample_rate_hz
            )));
        }
        Ok(())
    }

    /// Total complex samples in one recording: `M * N * T`.
    pub fn total_samples(&self) -> usize {
        self.samples_per_chirp * self.chirps_per_frame * self.frames
    }

    /// Recording duration `T * N * chirp_duration_s` in seconds.
    pub fn recording_duration_s(&self) -> f64 {
        (self.frames * self.chirps_per_frame) as f64 * self.chirp_duration_s
    }

    /// Maximum unambiguous range: beat frequency hits the sample rate at
    /// `c * M / (2 * bandwidth_hz)` meters.
    pub fn unambiguous_range_m(&self) -> f64 {
        SPEED_OF_LIGHT * self.sample_rate_hz * self.chirp_duration_s / (2.0 * self.bandwidth_hz)
    }

    /// Fixed complex gain of one antenna: magnitude in [0.85, 1.15), uniform
    /// phase. A function of the antenna id alone, so each antenna is a
    /// consistent "domain" for leave-one-antenna-out evaluation.
    pub fn antenna_gain(antenna_id: usize) -> Complex64 {
        use rand::Rng;
        let mut rng = seed::rng(salt::ANTENNA_GAIN, antenna_id as u64);
        let magnitude = rng.random_range(0.85..1.15);
        let phase = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        Complex64::from_polar(magnitude, phase)
    }
}

/// One antenna's dechirped baseband recording.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSignal {
    /// `M * N * T` complex samples, chirp-major: sample `m` of global chirp
    /// `p` lives at `p * M + m`.
    pub samples: Vec<Complex64>,
    pub params: RadarParams,
    pub antenna_id: usize,
}

/// Errors from signal synthesis.
#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("invalid radar parameters: {0}")]
    InvalidParams(String),
    #[error("antenna id {0} out of bounds (antenna_count = {1})")]
    AntennaOutOfBounds(usize, usize),
    #[error(
        "scatterer {index} sweeps range [{lo:.2}, {hi:.2}] m outside the \
         unambiguous span (0, {max:.2}) m"
    )]
    RangeOutsideUnambiguous { index: usize, lo: f64, hi: f64, max: f64 },
}

/// Renders `scene` into one antenna's baseband samples.
///
/// Deterministic in `(scene, params, antenna_id, rng_seed)`. The noise
/// stream is `derive(derive(rng_seed, NOISE), antenna_id)`, so antennas of
/// one test share the scene but never the noise.
pub fn synthesize_beat_signal(
    scene: &Scene,
    params: &RadarParams,
    antenna_id: usize,
    rng_seed: u64,
) -> Result<RawSignal, SignalError> {
    params.validate()?;
    if antenna_id >= params.antenna_count {
        return Err(SignalError::AntennaOutOfBounds(antenna_id, params.antenna_count));
    }
    let duration = params.recording_duration_s();
    let max_range = params.unambiguous_range_m();
    for (index, s) in scene.scatterers.iter().enumerate() {
        let (lo, hi) = s.range_bounds(duration);
        if lo <= 0.0 || hi >= max_range {
            return Err(SignalError::RangeOutsideUnambiguous { index, lo, hi, max: max_range });
        }
    }

    let m = params.samples_per_chirp;
    let chirps = params.chirps_per_frame * params.frames;
    let gain = RadarParams::antenna_gain(antenna_id);
    let slope = params.bandwidth_hz / params.chirp_duration_s;
    let two_pi = 2.0 * std::f64::consts::PI;

    let mut samples = vec![Complex64::new(0.0, 0.0); m * chirps];
    for scatterer in &scene.scatterers {
        let weight = gain * scatterer.amplitude;
        for p in 0..chirps {
            let t_p = p as f64 * params.chirp_duration_s;
            let r = scatterer.range_at(t_p);
            let beat_hz = 2.0 * slope * r / SPEED_OF_LIGHT;
            let phase = two_pi * 2.0 * params.carrier_hz * r / SPEED_OF_LIGHT;
            // Walk the chirp with a phasor recurrence instead of per-sample
            // trigonometry; rounding drift over M steps is far below the
            // noise floor in double precision.
            let step = Complex64::from_polar(1.0, two_pi * beat_hz / params.sample_rate_hz);
            let mut phasor = weight * Complex64::from_polar(1.0, phase);
            let chirp = &mut samples[p * m..(p + 1) * m];
            for value in chirp.iter_mut() {
                *value += phasor;
                phasor *= step;
            }
        }
    }

    if scene.noise_std > 0.0 {
        let noise = Normal::new(0.0, scene.noise_std)
            .map_err(|e| SignalError::InvalidParams(format!("noise_std: {e}")))?;
        let mut rng = seed::rng(seed::derive(rng_seed, salt::NOISE), antenna_id as u64);
        for value in samples.iter_mut() {
            let re = noise.sample(&mut rng);
            let im = noise.sample(&mut rng);
            *value += Complex64::new(re, im);
        }
    }

    Ok(RawSignal { samples, params: *params, antenna_id })
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
