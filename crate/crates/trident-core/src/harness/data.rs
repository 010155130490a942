//! In-memory training data: all records of one dataset, loaded once.
//!
//! Cubes are projected onto their three planes at load time and the cubes
//! discarded, which shrinks a desk-scale dataset by roughly 9x; the
//! classifier only ever consumes the planes. Values stay unnormalized here —
//! standardization statistics are fitted per cross-validation fold on its
//! training split and live inside the model.

use serde::{Deserialize, Serialize};

use super::{read_cube, DatasetManifest, HarnessError};
use crate::plane::Plane;
use crate::projection::{self, NormStats, ProjectionTriple};

/// Which input representation an experiment consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// Three orthogonal projections of the time-range-Doppler cube,
    /// classified by the three-branch network.
    #[default]
    Cube3d,
    /// Doppler spectrogram, classified by the single-branch baseline.
    Spectrogram,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Cube3d => "cube3d",
            Representation::Spectrogram => "spectrogram",
        }
    }
}

#[derive(Debug, Clone)]
enum Payload {
    Triples { triples: Vec<ProjectionTriple>, cube_dims: (usize, usize, usize) },
    Planes { planes: Vec<Plane>, dims: (usize, usize) },
}

/// One dataset resident in memory, records aligned with the manifest order.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub labels: Vec<usize>,
    pub antennas: Vec<usize>,
    pub classes: usize,
    payload: Payload,
}

impl PreparedDataset {
    /// Loads every manifest record in the chosen representation.
    pub fn load(
        manifest: &DatasetManifest,
        representation: Representation,
    ) -> Result<Self, HarnessError> {
        let labels: Vec<usize> = manifest.records.iter().map(|r| r.class_label).collect();
        let antennas: Vec<usize> = manifest.records.iter().map(|r| r.antenna_id).collect();
        let classes = manifest.classes();

        let payload = match representation {
            Representation::Cube3d => {
                let mut triples = Vec::with_capacity(manifest.len());
                let mut cube_dims = None;
                for index in 0..manifest.len() {
                    let cube = read_cube(&manifest.cube_file(index))?;
                    let dims = (cube.t, cube.m, cube.n);
                    match cube_dims {
                        None => cube_dims = Some(dims),
                        Some(expected) if expected != dims => {
                            return Err(HarnessError::Config(format!(
                                "record {} cube is {dims:?} but earlier records are {expected:?}",
                                manifest.records[index].record_id
                            )));
                        }
                        Some(_) => {}
                    }
                    triples.push(projection::orthogonal_project(&cube));
                }
                let cube_dims = cube_dims.expect("manifest is non-empty");
                Payload::Triples { triples, cube_dims }
            }
            Representation::Spectrogram => {
                let mut planes = Vec::with_capacity(manifest.len());
                let mut plane_dims = None;
                for index in 0..manifest.len() {
                    let container = read_cube(&manifest.spectrogram_file(index))?;
                    if container.t != 1 {
                        return Err(HarnessError::Config(format!(
                            "spectrogram file for record {} holds {} frames, expected 1",
                            manifest.records[index].record_id, container.t
                        )));
                    }
                    let dims = (container.m, container.n);
                    match plane_dims {
                        None => plane_dims = Some(dims),
                        Some(expected) if expected != dims => {
                            return Err(HarnessError::Config(format!(
                                "record {} spectrogram is {dims:?} but earlier records are {expected:?}",
                                manifest.records[index].record_id
                            )));
                        }
                        Some(_) => {}
                    }
                    planes.push(Plane::from_vec(dims.0, dims.1, container.values().to_vec()));
                }
                let dims = plane_dims.expect("manifest is non-empty");
                Payload::Planes { planes, dims }
            }
        };

        Ok(Self { labels, antennas, classes, payload })
    }

    /// In-memory dataset of cube projections (no files involved).
    pub fn from_triples(
        triples: Vec<ProjectionTriple>,
        labels: Vec<usize>,
        antennas: Vec<usize>,
        classes: usize,
    ) -> Result<Self, HarnessError> {
        if triples.is_empty() {
            return Err(HarnessError::EmptyIndices { context: "in-memory dataset" });
        }
        if triples.len() != labels.len() || triples.len() != antennas.len() {
            return Err(HarnessError::Config(format!(
                "{} records vs {} labels vs {} antenna ids",
                triples.len(),
                labels.len(),
                antennas.len()
            )));
        }
        let first = &triples[0];
        let cube_dims = (first.f_td.rows(), first.f_rd.rows(), first.f_rd.cols());
        Ok(Self { labels, antennas, classes, payload: Payload::Triples { triples, cube_dims } })
    }

    /// In-memory dataset of spectrogram planes.
    pub fn from_planes(
        planes: Vec<Plane>,
        labels: Vec<usize>,
        antennas: Vec<usize>,
        classes: usize,
    ) -> Result<Self, HarnessError> {
        if planes.is_empty() {
            return Err(HarnessError::EmptyIndices { context: "in-memory dataset" });
        }
        if planes.len() != labels.len() || planes.len() != antennas.len() {
            return Err(HarnessError::Config(format!(
                "{} records vs {} labels vs {} antenna ids",
                planes.len(),
                labels.len(),
                antennas.len()
            )));
        }
        let dims = (planes[0].rows(), planes[0].cols());
        Ok(Self { labels, antennas, classes, payload: Payload::Planes { planes, dims } })
    }

    pub fn representation(&self) -> Representation {
        match self.payload {
            Payload::Triples { .. } => Representation::Cube3d,
            Payload::Planes { .. } => Representation::Spectrogram,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Cube dimensions, if this dataset holds cube projections.
    pub fn cube_dims(&self) -> Option<(usize, usize, usize)> {
        match self.payload {
            Payload::Triples { cube_dims, .. } => Some(cube_dims),
            Payload::Planes { .. } => None,
        }
    }

    /// Spectrogram dimensions, if this dataset holds spectrograms.
    pub fn plane_dims(&self) -> Option<(usize, usize)> {
        match self.payload {
            Payload::Planes { dims, .. } => Some(dims),
            Payload::Triples { .. } => None,
        }
    }

    /// Projection triples at `indices`, or a representation error.
    pub fn triples(&self, indices: &[usize]) -> Result<Vec<&ProjectionTriple>, HarnessError> {
        match &self.payload {
            Payload::Triples { triples, .. } => {
                Ok(indices.iter().map(|&i| &triples[i]).collect())
            }
            Payload::Planes { .. } => Err(HarnessError::RepresentationMismatch {
                expected: "cube projections",
                found: "spectrograms",
            }),
        }
    }

    /// Spectrogram planes at `indices`, or a representation error.
    pub fn planes(&self, indices: &[usize]) -> Result<Vec<&Plane>, HarnessError> {
        match &self.payload {
            Payload::Planes { planes, .. } => Ok(indices.iter().map(|&i| &planes[i]).collect()),
            Payload::Triples { .. } => Err(HarnessError::RepresentationMismatch {
                expected: "spectrograms",
                found: "cube projections",
            }),
        }
    }

    pub fn labels_at(&self, indices: &[usize]) -> Vec<usize> {
        indices.iter().map(|&i| self.labels[i]).collect()
    }

    /// Per-plane standardization statistics over the records at `indices`
    /// (call with a training split only).
    pub fn fit_triple_norm(&self, indices: &[usize]) -> Result<[NormStats; 3], HarnessError> {
        let selected: Vec<ProjectionTriple> =
            self.triples(indices)?.into_iter().cloned().collect();
        Ok(projection::fit_norm_stats(&selected)?)
    }

    /// Standardization statistics over the spectrograms at `indices`.
    pub fn fit_plane_norm(&self, indices: &[usize]) -> Result<NormStats, HarnessError> {
        let selected: Vec<Plane> = self.planes(indices)?.into_iter().cloned().collect();
        Ok(projection::fit_plane_stats(&selected)?)
    }

    /// Replaces the stored values of record `index` (used by leakage tests
    /// to prove test records never influence training).
    #[doc(hidden)]
    pub fn overwrite_record(&mut self, index: usize, fill: impl Fn(usize) -> f64) {
        match &mut self.payload {
            Payload::Triples { triples, .. } => {
                let mut k = 0;
                let triple = &mut triples[index];
                for plane in [&mut triple.f_rd, &mut triple.f_td, &mut triple.f_tr] {
                    for v in plane.values_mut() {
                        *v = fill(k);
                        k += 1;
                    }
                }
            }
            Payload::Planes { planes, .. } => {
                for (k, v) in planes[index].values_mut().iter_mut().enumerate() {
                    *v = fill(k);
                }
            }
        }
    }
}
