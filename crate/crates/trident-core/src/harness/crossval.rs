//! Leave-one-antenna-out cross-validation: per-fold model construction,
//! norm fitting, training, evaluation, and tab-separated report files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::split::split_indices;
use super::{
    evaluate, train, DatasetManifest, EpochStats, ExperimentConfig, HarnessError, Metrics,
    PreparedDataset, Representation,
};
use crate::model::{AnyModel, Baseline2dModel, Open3dModel};
use crate::seed::{self, salt};

/// One fold's complete outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    /// Fold index (position of the held-out antenna in sorted order).
    pub fold: usize,
    pub held_out_antenna: usize,
    pub train_records: usize,
    pub test_records: usize,
    pub metrics: Metrics,
    pub history: Vec<EpochStats>,
}

/// A full cross-validation run.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<FoldReport>,
    /// Pooled metrics: summed confusion, per-fold accuracies, their mean.
    pub aggregate: Metrics,
}

impl CvReport {
    pub fn mean_accuracy(&self) -> f64 {
        self.aggregate.mean_accuracy
    }

    /// `report.tsv`: one row per fold plus a trailing mean row.
    pub fn report_tsv(&self) -> String {
        let mut out = String::from("fold\theld_out_antenna\ttrain_records\ttest_records\taccuracy\n");
        for fold in &self.folds {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.6}",
                fold.fold,
                fold.held_out_antenna,
                fold.train_records,
                fold.test_records,
                fold.metrics.accuracy
            )
            .expect("string write");
        }
        writeln!(out, "mean\t-\t-\t-\t{:.6}", self.aggregate.mean_accuracy).expect("string write");
        out
    }

    /// `confusion.tsv`: the aggregate confusion matrix, true classes as
    /// rows, predicted classes as columns.
    pub fn confusion_tsv(&self) -> String {
        let classes = self.aggregate.confusion.len();
        let mut out = String::from("true_class");
        for c in 0..classes {
            write!(out, "\tpred_{c}").expect("string write");
        }
        out.push('\n');
        for (class, row) in self.aggregate.confusion.iter().enumerate() {
            write!(out, "{class}").expect("string write");
            for count in row {
                write!(out, "\t{count}").expect("string write");
            }
            out.push('\n');
        }
        out
    }

    /// `history_<fold>.tsv`: per-epoch loss and train accuracy.
    pub fn history_tsv(&self, fold: usize) -> String {
        let mut out = String::from("epoch\tloss\ttrain_accuracy\n");
        for stats in &self.folds[fold].history {
            writeln!(out, "{}\t{:.6}\t{:.6}", stats.epoch, stats.loss, stats.train_accuracy)
                .expect("string write");
        }
        out
    }

    /// Writes `report.tsv`, `confusion.tsv` and one `history_<fold>.tsv`
    /// per fold under `dir` (created if needed).
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.tsv"), self.report_tsv())?;
        fs::write(dir.join("confusion.tsv"), self.confusion_tsv())?;
        for fold in 0..self.folds.len() {
            fs::write(dir.join(format!("history_{fold}.tsv")), self.history_tsv(fold))?;
        }
        Ok(())
    }
}

/// Builds a fresh, untrained model of the kind matching
/// `config.representation`, sized for `data`, initialized from `rng_seed`.
pub fn build_model(
    config: &ExperimentConfig,
    data: &PreparedDataset,
    rng_seed: u64,
) -> Result<AnyModel, HarnessError> {
    match config.representation {
        Representation::Cube3d => {
            let dims = data.cube_dims().ok_or(HarnessError::RepresentationMismatch {
                expected: "cube projections",
                found: "spectrograms",
            })?;
            Ok(AnyModel::ThreeBranch(Open3dModel::new(
                config.model.branch.clone(),
                dims,
                data.classes,
                config.model.hidden,
                rng_seed,
            )?))
        }
        Representation::Spectrogram => {
            let dims = data.plane_dims().ok_or(HarnessError::RepresentationMismatch {
                expected: "spectrograms",
                found: "cube projections",
            })?;
            Ok(AnyModel::Spectro(Baseline2dModel::new(
                config.model.branch.clone(),
                dims,
                data.classes,
                rng_seed,
            )?))
        }
    }
}

/// Runs one fold: split by antenna, fit normalization on the training split,
/// build a fresh fold-seeded model, train, evaluate. Returns the trained
/// model alongside the report.
pub fn run_fold(
    data: &PreparedDataset,
    fold: usize,
    held_out: usize,
    config: &ExperimentConfig,
) -> Result<(AnyModel, FoldReport), HarnessError> {
    let (train_idx, test_idx) = split_indices(&data.antennas, held_out)?;
    if test_idx.is_empty() {
        return Err(HarnessError::EmptySplit { antenna: held_out, side: "test" });
    }

    let fold_seed = seed::derive(seed::derive(config.seed, salt::FOLD), held_out as u64);
    let mut model = build_model(config, data, fold_seed)?;
    match &mut model {
        AnyModel::ThreeBranch(m) => m.norm = data.fit_triple_norm(&train_idx)?,
        AnyModel::Spectro(m) => m.norm = data.fit_plane_norm(&train_idx)?,
    }

    let train_config = config.train.clone().with_seed(fold_seed);
    let outcome = train(&mut model, data, &train_idx, &train_config)?;
    let metrics = evaluate(&model, data, &test_idx)?;

    let report = FoldReport {
        fold,
        held_out_antenna: held_out,
        train_records: train_idx.len(),
        test_records: test_idx.len(),
        metrics,
        history: outcome.history,
    };
    Ok((model, report))
}

/// Cross-validates over every antenna present in `data`, in sorted order.
pub fn run_cross_validation_on(
    data: &PreparedDataset,
    config: &ExperimentConfig,
) -> Result<CvReport, HarnessError> {
    let mut antennas = data.antennas.clone();
    antennas.sort_unstable();
    antennas.dedup();
    if antennas.len() < 2 {
        return Err(HarnessError::TooFewAntennas(antennas.len()));
    }

    let mut folds = Vec::with_capacity(antennas.len());
    for (fold, &held_out) in antennas.iter().enumerate() {
        let (_, report) =
            run_fold(data, fold, held_out, config).map_err(|source| HarnessError::FoldFailed {
                fold,
                antenna: held_out,
                source: Box::new(source),
            })?;
        folds.push(report);
    }

    let per_fold: Vec<Metrics> = folds.iter().map(|f| f.metrics.clone()).collect();
    let aggregate = Metrics::aggregate(&per_fold);
    Ok(CvReport { folds, aggregate })
}

/// Full run from a config: load the manifest, prepare the data, cross-
/// validate, and write report files when an output directory is configured.
pub fn run_cross_validation(config: &ExperimentConfig) -> Result<CvReport, HarnessError> {
    config.validate()?;
    let manifest = DatasetManifest::load(&config.dataset_dir)?;
    let data = PreparedDataset::load(&manifest, config.representation)?;
    let report = run_cross_validation_on(&data, config)?;
    if let Some(dir) = &config.output_dir {
        report.write(dir)?;
    }
    Ok(report)
}
