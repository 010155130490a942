//! Range-Doppler processing: raw recordings into time-range-Doppler cubes
//! and baseline Doppler spectrograms.
//!
//! The cube pipeline, per recording:
//!
//! ```text
//!   raw (M*N*T samples)
//!     └─ slice_and_frame   → chirp tensor [t][p][m]
//!     └─ clutter_filter    → optional per-(t, m) mean removal over p
//!     └─ range FFT         → Hamming(M) window, FFT over fast time m
//!     └─ Doppler FFT       → Hamming(N) window, FFT over the frame's chirps p
//!     └─ half shift        → zero Doppler moved to bin N/2
//!     └─ log compression   → cube[t][m][n] = log(1 + |X|)
//! ```
//!
//! A point target at range `r` and radial velocity `v` lands at
//!
//! ```text
//!   range bin   = round(f_b * M / sample_rate),  f_b = 2 (B / T_c) r / c
//!   Doppler bin = N/2 + round(f_d * N * T_c),    f_d = 2 f_carrier v / c
//! ```
//!
//! (positive `v` = receding = positive Doppler offset). The spectrogram used
//! by the 2D baseline applies the range FFT to every chirp of the recording,
//! short-time Fourier transforms each range bin along slow time, and sums
//! magnitudes across range bins — deliberately discarding range structure.

use num_complex::Complex64;
use thiserror::Error;

use crate::fft::{hamming, FftError, FftPlan};
use crate::plane::Plane;
use crate::sim::{RadarParams, RawSignal};
use crate::SPEED_OF_LIGHT;

/// Complex chirp samples arranged `[frame t][chirp p][sample m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpTensor {
    pub frames: usize,
    pub chirps_per_frame: usize,
    pub samples_per_chirp: usize,
    data: Vec<Complex64>,
}

impl ChirpTensor {
    #[inline(always)]
    fn index(&self, t: usize, p: usize, m: usize) -> usize {
        (t * self.chirps_per_frame + p) * self.samples_per_chirp + m
    }

    #[inline(always)]
    pub fn get(&self, t: usize, p: usize, m: usize) -> Complex64 {
        self.data[self.index(t, p, m)]
    }

    #[inline(always)]
    pub fn set(&mut self, t: usize, p: usize, m: usize, v: Complex64) {
        let i = self.index(t, p, m);
        self.data[i] = v;
    }

    /// Chirp `(t, p)` as a contiguous fast-time slice.
    pub fn chirp(&self, t: usize, p: usize) -> &[Complex64] {
        let start = self.index(t, p, 0);
        &self.data[start..start + self.samples_per_chirp]
    }

    /// Flat view in `[t][p][m]` order — the same order as the raw samples.
    pub fn flat(&self) -> &[Complex64] {
        &self.data
    }
}

/// Real-valued time-range-Doppler cube `[t][m][n]`, `n` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TrdCube {
    /// Frames (time axis).
    pub t: usize,
    /// Range bins.
    pub m: usize,
    /// Doppler bins.
    pub n: usize,
    data: Vec<f64>,
}

impl TrdCube {
    pub fn zeros(t: usize, m: usize, n: usize) -> Self {
        assert!(t >= 1 && m >= 1 && n >= 1, "cube dims must be >= 1");
        Self { t, m, n, data: vec![0.0; t * m * n] }
    }

    pub fn from_vec(t: usize, m: usize, n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), t * m * n, "cube buffer does not match {t}x{m}x{n}");
        Self { t, m, n, data }
    }

    #[inline(always)]
    pub fn get(&self, t: usize, m: usize, n: usize) -> f64 {
        self.data[(t * self.m + m) * self.n + n]
    }

    #[inline(always)]
    pub fn set(&mut self, t: usize, m: usize, n: usize, v: f64) {
        self.data[(t * self.m + m) * self.n + n] = v;
    }

    /// Flat `[t][m][n]` buffer, `n` fastest.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// The range-Doppler map of frame `t` as an `m x n` plane.
    pub fn frame(&self, t: usize) -> Plane {
        let start = t * self.m * self.n;
        Plane::from_vec(self.m, self.n, self.data[start..start + self.m * self.n].to_vec())
    }
}

/// Time-by-Doppler magnitude image for the 2D baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    /// Rows = STFT time steps, cols = Doppler bins.
    pub values: Plane,
}

/// Pipeline switches for [`range_doppler_process`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdpOptions {
    /// Apply Hamming windows before both FFTs (on by default).
    pub window: bool,
    /// Remove the per-(frame, fast-time) mean across chirps (off by default).
    pub clutter_filter: bool,
    /// Circularly shift the Doppler axis so zero velocity sits at bin N/2
    /// (on by default).
    pub center_doppler: bool,
}

impl Default for RdpOptions {
    fn default() -> Self {
        Self { window: true, clutter_filter: false, center_doppler: true }
    }
}

/// Errors from the processing pipeline.
#[derive(Debug, Error, PartialEq)]
pub enum RdpError {
    #[error("raw signal has {actual} samples, expected M*N*T = {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Fft(#[from] FftError),
    #[error("crop length {crop_len} exceeds cube time axis {t}")]
    CropTooLong { crop_len: usize, t: usize },
    #[error("crop length and count must be >= 1")]
    EmptyCrop,
    #[error("STFT window {window} exceeds the slow-time axis {slow_len}")]
    WindowTooLong { window: usize, slow_len: usize },
    #[error("STFT hop must be >= 1")]
    ZeroHop,
}

/// Rearranges a raw recording into the `[t][p][m]` chirp tensor.
pub fn slice_and_frame(raw: &RawSignal) -> Result<ChirpTensor, RdpError> {
    let p = &raw.params;
    let expected = p.total_samples();
    if raw.samples.len() != expected {
        return Err(RdpError::LengthMismatch { expected, actual: raw.samples.len() });
    }
    // The raw layout is already chirp-major in [t][p][m] order, so framing is
    // a lossless copy with the dims attached.
    Ok(ChirpTensor {
        frames: p.frames,
        chirps_per_frame: p.chirps_per_frame,
        samples_per_chirp: p.samples_per_chirp,
        data: raw.samples.clone(),
    })
}

/// Subtracts the mean over each frame's chirps from every fast-time sample
/// (static-return suppression); identity when `enabled` is false.
pub fn clutter_filter(mut tensor: ChirpTensor, enabled: bool) -> ChirpTensor {
    if !enabled {
        return tensor;
    }
    let inv_n = 1.0 / tensor.chirps_per_frame as f64;
    for t in 0..tensor.frames {
        for m in 0..tensor.samples_per_chirp {
            let mut mean = Complex64::new(0.0, 0.0);
            for p in 0..tensor.chirps_per_frame {
                mean += tensor.get(t, p, m);
            }
            mean *= inv_n;
            for p in 0..tensor.chirps_per_frame {
                let v = tensor.get(t, p, m) - mean;
                tensor.set(t, p, m, v);
            }
        }
    }
    tensor
}

/// Full cube pipeline: chirp slicing, optional clutter removal, windowed
/// range and Doppler FFTs, Doppler centering, log compression.
pub fn range_doppler_process(raw: &RawSignal, options: &RdpOptions) -> Result<TrdCube, RdpError> {
    let tensor = clutter_filter(slice_and_frame(raw)?, options.clutter_filter);
    let (t_len, n_len, m_len) =
        (tensor.frames, tensor.chirps_per_frame, tensor.samples_per_chirp);

    let range_plan = FftPlan::new(m_len)?;
    let doppler_plan = FftPlan::new(n_len)?;
    let range_window = if options.window { hamming(m_len) } else { vec![1.0; m_len] };
    let doppler_window = if options.window { hamming(n_len) } else { vec![1.0; n_len] };

    // Range FFT per chirp: fast time -> range bins, stored chirp-major.
    let mut range_spectra = vec![Complex64::new(0.0, 0.0); t_len * n_len * m_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); m_len];
    for t in 0..t_len {
        for p in 0..n_len {
            let chirp = tensor.chirp(t, p);
            for m in 0..m_len {
                buf[m] = chirp[m] * range_window[m];
            }
            range_plan.forward(&mut buf)?;
            let start = (t * n_len + p) * m_len;
            range_spectra[start..start + m_len].copy_from_slice(&buf);
        }
    }

    // Doppler FFT per (frame, range bin) across the frame's chirps.
    let mut cube = TrdCube::zeros(t_len, m_len, n_len);
    let mut col = vec![Complex64::new(0.0, 0.0); n_len];
    let half = n_len / 2;
    for t in 0..t_len {
        for m in 0..m_len {
            for p in 0..n_len {
                col[p] = range_spectra[(t * n_len + p) * m_len + m] * doppler_window[p];
            }
            doppler_plan.forward(&mut col)?;
            for n in 0..n_len {
                let src = if options.center_doppler { (n + half) % n_len } else { n };
                cube.set(t, m, n, col[src].norm().ln_1p());
            }
        }
    }
    Ok(cube)
}

/// Doppler spectrogram for the 2D baseline: range FFT on every chirp of the
/// recording, Hamming-windowed STFT of each range bin along slow time, then
/// magnitudes summed over range bins and log-compressed.
pub fn spectrogram(
    raw: &RawSignal,
    stft_window: usize,
    hop: usize,
) -> Result<Spectrogram, RdpError> {
    let p = &raw.params;
    let expected = p.total_samples();
    if raw.samples.len() != expected {
        return Err(RdpError::LengthMismatch { expected, actual: raw.samples.len() });
    }
    if hop == 0 {
        return Err(RdpError::ZeroHop);
    }
    let m_len = p.samples_per_chirp;
    let slow_len = p.chirps_per_frame * p.frames;
    if stft_window > slow_len {
        return Err(RdpError::WindowTooLong { window: stft_window, slow_len });
    }
    let stft_plan = FftPlan::new(stft_window)?;
    let range_plan = FftPlan::new(m_len)?;
    let range_window = hamming(m_len);
    let stft_taper = hamming(stft_window);

    // Range FFT of every chirp, kept chirp-major: spectra[p * M + bin].
    let mut spectra = vec![Complex64::new(0.0, 0.0); slow_len * m_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); m_len];
    for chirp in 0..slow_len {
        let row = &raw.samples[chirp * m_len..(chirp + 1) * m_len];
        for m in 0..m_len {
            buf[m] = row[m] * range_window[m];
        }
        range_plan.forward(&mut buf)?;
        spectra[chirp * m_len..(chirp + 1) * m_len].copy_from_slice(&buf);
    }

    let steps = (slow_len - stft_window) / hop + 1;
    let half = stft_window / 2;
    let mut acc = Plane::zeros(steps, stft_window);
    let mut seg = vec![Complex64::new(0.0, 0.0); stft_window];
    for bin in 0..m_len {
        for q in 0..steps {
            let start = q * hop;
            for j in 0..stft_window {
                seg[j] = spectra[(start + j) * m_len + bin] * stft_taper[j];
            }
            stft_plan.forward(&mut seg)?;
            let row = acc.row_mut(q);
            for k in 0..stft_window {
                row[k] += seg[(k + half) % stft_window].norm();
            }
        }
    }
    Ok(Spectrogram { values: acc.map(f64::ln_1p) })
}

/// Start offsets of `crop_count` evenly spaced length-`crop_len` crops of a
/// length-`t` time axis: `floor(i * (t - crop_len) / (crop_count - 1))`.
pub fn crop_offsets(t: usize, crop_len: usize, crop_count: usize) -> Vec<usize> {
    if crop_count <= 1 {
        return vec![0];
    }
    (0..crop_count)
        .map(|i| i * (t - crop_len) / (crop_count - 1))
        .collect()
}

/// Cuts a cube into `crop_count` contiguous time slices of `crop_len` frames.
pub fn crop_cube(
    cube: &TrdCube,
    crop_len: usize,
    crop_count: usize,
) -> Result<Vec<TrdCube>, RdpError> {
    if crop_len == 0 || crop_count == 0 {
        return Err(RdpError::EmptyCrop);
    }
    if crop_len > cube.t {
        return Err(RdpError::CropTooLong { crop_len, t: cube.t });
    }
    let frame_len = cube.m * cube.n;
    Ok(crop_offsets(cube.t, crop_len, crop_count)
        .into_iter()
        .map(|start| {
            let lo = start * frame_len;
            let hi = (start + crop_len) * frame_len;
            TrdCube::from_vec(crop_len, cube.m, cube.n, cube.values()[lo..hi].to_vec())
        })
        .collect())
}

/// Analytic range bin of a target at range `r` meters.
pub fn predicted_range_bin(params: &RadarParams, range_m: f64) -> usize {
    let beat_hz = 2.0 * (params.bandwidth_hz / params.chirp_duration_s) * range_m / SPEED_OF_LIGHT;
    (beat_hz * params.samples_per_chirp as f64 / params.sample_rate_hz).round() as usize
}

/// Analytic centered Doppler bin of a target at radial velocity `v` m/s
/// (positive = receding).
pub fn predicted_doppler_bin(params: &RadarParams, velocity_mps: f64) -> isize {
    let doppler_hz = 2.0 * params.carrier_hz * velocity_mps / SPEED_OF_LIGHT;
    let offset = (doppler_hz * params.chirps_per_frame as f64 * params.chirp_duration_s).round()
        as isize;
    params.chirps_per_frame as isize / 2 + offset
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{synthesize_beat_signal, Scatterer, Scene};
    use rand::Rng;

    fn ramp_raw(m: usize, n: usize, t: usize) -> RawSignal {
        let mut params = RadarParams::desk();
        params.samples_per_chirp = m;
        params.chirps_per_frame = n;
        params.frames = t;
        params.sample_rate_hz = m as f64 / params.chirp_duration_s;
        let samples = (0..m * n * t).map(|i| Complex64::new(i as f64, 0.0)).collect();
        RawSignal { samples, params, antenna_id: 0 }
    }

    fn moving_scene(range: f64, velocity: f64) -> Scene {
        Scene {
            class_label: 0,
            scatterers: vec![Scatterer {
                amplitude: 1.0,
                base_range_m: range,
                radial_velocity_mps: velocity,
                osc_amplitude_m: 0.0,
                osc_freq_hz: 0.0,
                osc_phase_rad: 0.0,
            }],
            noise_std: 0.0,
        }
    }

    #[test]
    fn slice_and_frame_indexes_chirp_major() {
        let raw = ramp_raw(4, 2, 2);
        let tensor = slice_and_frame(&raw).unwrap();
        // [t][p][m] = (t*N + p)*M + m = (1*2 + 0)*4 + 3 = 11.
        assert_eq!(tensor.get(1, 0, 3), Complex64::new(11.0, 0.0));
        assert_eq!(tensor.flat(), raw.samples.as_slice(), "framing must be lossless");
    }

    #[test]
    fn slice_and_frame_places_single_nonzero_correctly() {
        let mut raw = ramp_raw(4, 4, 4);
        raw.samples.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        raw.samples[37] = Complex64::new(1.0, 0.0);
        let tensor = slice_and_frame(&raw).unwrap();
        // 37 = (t*4 + p)*4 + m with t = 2, p = 1, m = 1.
        assert_eq!(tensor.get(2, 1, 1), Complex64::new(1.0, 0.0));
        let total: f64 = tensor.flat().iter().map(|v| v.norm()).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn slice_and_frame_rejects_wrong_length() {
        let mut raw = ramp_raw(4, 2, 2);
        raw.samples.pop();
        assert_eq!(
            slice_and_frame(&raw).unwrap_err(),
            RdpError::LengthMismatch { expected: 16, actual: 15 }
        );
    }

    #[test]
    fn clutter_filter_disabled_is_identity() {
        let raw = ramp_raw(4, 4, 2);
        let tensor = slice_and_frame(&raw).unwrap();
        let out = clutter_filter(tensor.clone(), false);
        assert_eq!(out, tensor);
    }

    #[test]
    fn clutter_filter_zeroes_identical_chirps() {
        let mut raw = ramp_raw(8, 4, 2);
        for chirp in 0..8 {
            for m in 0..8 {
                raw.samples[chirp * 8 + m] = Complex64::new(m as f64, -1.0);
            }
        }
        let out = clutter_filter(slice_and_frame(&raw).unwrap(), true);
        assert!(out.flat().iter().all(|v| v.norm() < 1e-12), "static frame must vanish");
    }

    #[test]
    fn clutter_filter_removes_per_bin_mean() {
        let mut rng = crate::seed::rng(5, 0xC1);
        let mut raw = ramp_raw(8, 4, 3);
        for v in raw.samples.iter_mut() {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let out = clutter_filter(slice_and_frame(&raw).unwrap(), true);
        for t in 0..3 {
            for m in 0..8 {
                let mut mean = Complex64::new(0.0, 0.0);
                for p in 0..4 {
                    mean += out.get(t, p, m);
                }
                assert!(mean.norm() / 4.0 < 1e-12, "residual mean at t={t}, m={m}");
            }
        }
    }

    #[test]
    fn zero_signal_gives_zero_cube() {
        let mut raw = ramp_raw(8, 4, 2);
        raw.samples.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let cube = range_doppler_process(&raw, &RdpOptions::default()).unwrap();
        assert!(cube.values().iter().all(|&v| v == 0.0), "log(1 + 0) must stay 0");
    }

    #[test]
    fn static_target_peaks_at_zero_doppler_every_frame() {
        let params = RadarParams::desk();
        let raw = synthesize_beat_signal(&moving_scene(4.0, 0.0), &params, 0, 3).unwrap();
        let cube = range_doppler_process(&raw, &RdpOptions::default()).unwrap();
        let want_m = predicted_range_bin(&params, 4.0);
        let want_n = params.chirps_per_frame / 2;
        for t in 0..cube.t {
            let (m, n) = cube.frame(t).argmax();
            assert!(
                (m as i64 - want_m as i64).abs() <= 1 && (n as i64 - want_n as i64).abs() <= 1,
                "frame {t}: peak at ({m}, {n}), expected (~{want_m}, {want_n})"
            );
        }
    }

    #[test]
    fn receding_target_shifts_doppler_positive() {
        let params = RadarParams::desk();
        let v = 3.0;
        let raw = synthesize_beat_signal(&moving_scene(4.0, v), &params, 0, 3).unwrap();
        let cube = range_doppler_process(&raw, &RdpOptions::default()).unwrap();
        let want_n = predicted_doppler_bin(&params, v);
        assert!(want_n > params.chirps_per_frame as isize / 2, "test expects positive offset");
        for t in 0..cube.t {
            let (_, n) = cube.frame(t).argmax();
            assert!(
                (n as isize - want_n).abs() <= 1,
                "frame {t}: Doppler peak {n}, expected ~{want_n}"
            );
        }
    }

    #[test]
    fn approaching_target_shifts_doppler_negative() {
        let params = RadarParams::desk();
        let raw = synthesize_beat_signal(&moving_scene(5.0, -4.0), &params, 0, 4).unwrap();
        let cube = range_doppler_process(&raw, &RdpOptions::default()).unwrap();
        let want_n = predicted_doppler_bin(&params, -4.0);
        assert!(want_n < params.chirps_per_frame as isize / 2);
        let (_, n) = cube.frame(0).argmax();
        assert!((n as isize - want_n).abs() <= 1, "Doppler peak {n}, expected ~{want_n}");
    }

    #[test]
    fn positive_gain_preserves_value_ordering() {
        let params = RadarParams::desk();
        let mut raw = synthesize_beat_signal(&moving_scene(4.0, 2.0), &params, 0, 9).unwrap();
        let cube = range_doppler_process(&raw, &RdpOptions::default()).unwrap();
        raw.samples.iter_mut().for_each(|v| *v *= 2.5);
        let scaled = range_doppler_process(&raw, &RdpOptions::default()).unwrap();

        for t in 0..cube.t {
            assert_eq!(cube.frame(t).argmax(), scaled.frame(t).argmax(), "argmax moved (t={t})");
        }
        let mut rng = crate::seed::rng(0, 0xAB);
        let values = cube.values();
        let scaled_values = scaled.values();
        for _ in 0..2000 {
            let i = rng.random_range(0..values.len());
            let j = rng.random_range(0..values.len());
            let before = values[i].partial_cmp(&values[j]).unwrap();
            let after = scaled_values[i].partial_cmp(&scaled_values[j]).unwrap();
            if before != std::cmp::Ordering::Equal {
                assert_eq!(before, after, "gain broke ordering between {i} and {j}");
            }
        }
    }

    #[test]
    fn crop_offsets_match_even_spacing() {
        assert_eq!(crop_offsets(400, 64, 6), vec![0, 67, 134, 201, 268, 336]);
        assert_eq!(crop_offsets(16, 8, 2), vec![0, 8]);
        assert_eq!(crop_offsets(64, 64, 1), vec![0]);
    }

    #[test]
    fn crops_equal_brute_force_slices() {
        let mut rng = crate::seed::rng(2, 0xCC);
        let cube = TrdCube::from_vec(
            16,
            3,
            2,
            (0..16 * 3 * 2).map(|_| rng.random_range(0.0..1.0)).collect(),
        );
        let crops = crop_cube(&cube, 8, 3).unwrap();
        let offsets = crop_offsets(16, 8, 3);
        assert_eq!(offsets, vec![0, 4, 8]);
        for (crop, &start) in crops.iter().zip(&offsets) {
            assert_eq!(crop.t, 8);
            for t in 0..8 {
                for m in 0..3 {
                    for n in 0..2 {
                        assert_eq!(crop.get(t, m, n), cube.get(start + t, m, n));
                    }
                }
            }
        }
    }

    #[test]
    fn single_crop_is_the_identity() {
        let cube = TrdCube::from_vec(4, 2, 2, (0..16).map(|i| i as f64).collect());
        let crops = crop_cube(&cube, 4, 1).unwrap();
        assert_eq!(crops.len(), 1);
        assert_eq!(crops[0], cube);
    }

    #[test]
    fn oversized_crop_is_rejected() {
        let cube = TrdCube::zeros(4, 2, 2);
        assert_eq!(
            crop_cube(&cube, 8, 2).unwrap_err(),
            RdpError::CropTooLong { crop_len: 8, t: 4 }
        );
    }

    #[test]
    fn zero_signal_gives_zero_spectrogram() {
        let mut raw = ramp_raw(8, 8, 4);
        raw.samples.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let spec = spectrogram(&raw, 8, 4).unwrap();
        assert!(spec.values.values().iter().all(|&v| v == 0.0));
        assert_eq!(spec.values.rows(), (32 - 8) / 4 + 1);
        assert_eq!(spec.values.cols(), 8);
    }

    #[test]
    fn spectrogram_doppler_peak_matches_cube_prediction() {
        let params = RadarParams::desk();
        let v = 2.5;
        let raw = synthesize_beat_signal(&moving_scene(4.0, v), &params, 0, 6).unwrap();
        // Window = N makes spectrogram Doppler bins line up with cube bins.
        let spec = spectrogram(&raw, params.chirps_per_frame, params.chirps_per_frame / 2).unwrap();
        let want = predicted_doppler_bin(&params, v);
        for q in 0..spec.values.rows() {
            let row = spec.values.row(q);
            let peak = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0 as isize;
            assert!((peak - want).abs() <= 1, "column {q}: peak {peak}, expected ~{want}");
        }
    }

    #[test]
    fn spectrogram_of_summed_scenes_contains_both_tones() {
        let params = RadarParams::desk();
        let raw_a = synthesize_beat_signal(&moving_scene(3.0, 2.0), &params, 0, 1).unwrap();
        let raw_b = synthesize_beat_signal(&moving_scene(6.0, -3.5), &params, 0, 1).unwrap();
        let mut combined = raw_a.clone();
        for (c, b) in combined.samples.iter_mut().zip(&raw_b.samples) {
            *c += b;
        }
        let w = params.chirps_per_frame;
        let spec_a = spectrogram(&raw_a, w, w / 2).unwrap();
        let spec_b = spectrogram(&raw_b, w, w / 2).unwrap();
        let spec = spectrogram(&combined, w, w / 2).unwrap();
        for q in 0..spec.values.rows() {
            let argmax = |row: &[f64]| -> isize {
                row.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0 as isize
            };
            let peak_a = argmax(spec_a.values.row(q));
            let peak_b = argmax(spec_b.values.row(q));
            // Two largest bins of the combined column.
            let row = spec.values.row(q);
            let mut order: Vec<usize> = (0..row.len()).collect();
            order.sort_by(|&i, &j| row[j].total_cmp(&row[i]));
            let (top1, top2) = (order[0] as isize, order[1] as isize);
            let covers = |want: isize| (top1 - want).abs() <= 1 || (top2 - want).abs() <= 1;
            assert!(covers(peak_a) && covers(peak_b), "column {q} lost a tone");
        }
    }

    #[test]
    fn spectrogram_rejects_bad_stft_arguments() {
        let raw = ramp_raw(8, 8, 4);
        assert_eq!(
            spectrogram(&raw, 64, 4).unwrap_err(),
            RdpError::WindowTooLong { window: 64, slow_len: 32 }
        );
        assert_eq!(spectrogram(&raw, 8, 0).unwrap_err(), RdpError::ZeroHop);
        assert!(matches!(spectrogram(&raw, 6, 2).unwrap_err(), RdpError::Fft(_)));
    }

    #[test]
    fn desk_bin_predictions_match_hand_arithmetic() {
        let params = RadarParams::desk();
        // Range: 2 B r / c with B = 1 GHz — about 6.67 bins per meter.
        assert_eq!(predicted_range_bin(&params, 4.0), 27);
        // Doppler: one bin is about 0.951 m/s at 77 GHz, 32 chirps, 64 us.
        assert_eq!(predicted_doppler_bin(&params, 0.0), 16);
        assert_eq!(predicted_doppler_bin(&params, 2.0), 18);
        assert_eq!(predicted_doppler_bin(&params, -2.0), 14);
    }
}
