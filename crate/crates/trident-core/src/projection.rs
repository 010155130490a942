//! Orthogonal plane projections of time-range-Doppler cubes.
//!
//! A cube `X[t][m][n]` collapses onto three 2D planes by exact arithmetic
//! means along each axis:
//!
//! ```text
//!   range-Doppler  F_rD[m][n] = mean_t X[t][m][n]    (M x N)
//!   time-Doppler   F_tD[t][n] = mean_m X[t][m][n]    (T x N)
//!   time-range     F_tr[t][m] = mean_n X[t][m][n]    (T x M)
//! ```
//!
//! Each plane then enters its classifier branch standardized by global
//! per-plane statistics fitted on the training split only:
//! `x -> (x - mean) / std`, with the standard deviation floored at 1e-8 so
//! degenerate (constant) planes stay finite.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plane::Plane;
use crate::rdp::TrdCube;

/// The three orthogonal projections of one cube.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionTriple {
    /// Range-Doppler plane, `M x N`.
    pub f_rd: Plane,
    /// Time-Doppler plane, `T x N`.
    pub f_td: Plane,
    /// Time-range plane, `T x M`.
    pub f_tr: Plane,
}

impl ProjectionTriple {
    /// Planes in the fixed fusion order (rD, tD, tr).
    pub fn planes(&self) -> [&Plane; 3] {
        [&self.f_rd, &self.f_td, &self.f_tr]
    }
}

/// Global standardization statistics for one plane kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: f64,
    /// Population standard deviation, floored at [`NormStats::STD_FLOOR`].
    pub std: f64,
}

impl NormStats {
    /// Lower bound applied to the fitted standard deviation.
    pub const STD_FLOOR: f64 = 1e-8;

    /// Identity statistics (mean 0, std 1).
    pub fn identity() -> Self {
        Self { mean: 0.0, std: 1.0 }
    }

    #[inline(always)]
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    #[inline(always)]
    pub fn invert(&self, x: f64) -> f64 {
        x * self.std + self.mean
    }
}

/// Errors from statistics fitting.
#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("cannot fit normalization statistics on an empty training set")]
    EmptyTrainingSet,
}

/// Projects a cube onto its three orthogonal planes by exact axis means.
pub fn orthogonal_project(cube: &TrdCube) -> ProjectionTriple {
    let (t_len, m_len, n_len) = (cube.t, cube.m, cube.n);
    let mut f_rd = Plane::zeros(m_len, n_len);
    let mut f_td = Plane::zeros(t_len, n_len);
    let mut f_tr = Plane::zeros(t_len, m_len);

    // One pass over the cube feeds all three accumulators.
    let values = cube.values();
    for t in 0..t_len {
        for m in 0..m_len {
            let row = &values[(t * m_len + m) * n_len..(t * m_len + m + 1) * n_len];
            let rd_row = f_rd.row_mut(m);
            let mut row_sum = 0.0;
            for (n, &v) in row.iter().enumerate() {
                rd_row[n] += v;
                row_sum += v;
            }
            f_tr.set(t, m, row_sum);
            let td_row = f_td.row_mut(t);
            for (n, &v) in row.iter().enumerate() {
                td_row[n] += v;
            }
        }
    }

    let inv_t = 1.0 / t_len as f64;
    let inv_m = 1.0 / m_len as f64;
    let inv_n = 1.0 / n_len as f64;
    ProjectionTriple {
        f_rd: f_rd.map(|v| v * inv_t),
        f_td: f_td.map(|v| v * inv_m),
        f_tr: f_tr.map(|v| v * inv_n),
    }
}

/// Fits per-plane mean/std over every value of every training triple.
///
/// Returns statistics in fusion order (rD, tD, tr). Uses the population
/// standard deviation, floored at [`NormStats::STD_FLOOR`].
pub fn fit_norm_stats(training: &[ProjectionTriple]) -> Result<[NormStats; 3], ProjectionError> {
    if training.is_empty() {
        return Err(ProjectionError::EmptyTrainingSet);
    }
    let mut stats = [NormStats::identity(); 3];
    for (k, slot) in stats.iter_mut().enumerate() {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for triple in training {
            for &v in triple.planes()[k].values() {
                sum += v;
                sum_sq += v * v;
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let var = (sum_sq / count as f64 - mean * mean).max(0.0);
        *slot = NormStats { mean, std: var.sqrt().max(NormStats::STD_FLOOR) };
    }
    Ok(stats)
}

/// Fits mean/std over a set of standalone planes (spectrogram baseline).
pub fn fit_plane_stats(training: &[Plane]) -> Result<NormStats, ProjectionError> {
    if training.is_empty() {
        return Err(ProjectionError::EmptyTrainingSet);
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for plane in training {
        for &v in plane.values() {
            sum += v;
            sum_sq += v * v;
            count += 1;
        }
    }
    let mean = sum / count as f64;
    let var = (sum_sq / count as f64 - mean * mean).max(0.0);
    Ok(NormStats { mean, std: var.sqrt().max(NormStats::STD_FLOOR) })
}

/// Standardizes all three planes with their fitted statistics.
pub fn normalize(triple: &ProjectionTriple, stats: &[NormStats; 3]) -> ProjectionTriple {
    ProjectionTriple {
        f_rd: triple.f_rd.map(|v| stats[0].apply(v)),
        f_td: triple.f_td.map(|v| stats[1].apply(v)),
        f_tr: triple.f_tr.map(|v| stats[2].apply(v)),
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
