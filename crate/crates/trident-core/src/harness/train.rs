//! The SGD training loop: epoch shuffling, minibatching, step-decayed
//! learning rate, and per-epoch history.

use serde::{Deserialize, Serialize};

use super::{HarnessError, PreparedDataset};
use crate::model::{open3d, AnyModel};
use crate::nn::Sgd;
use crate::plane::Plane;
use crate::seed::{self, salt};

/// Optimization hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub initial_lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Learning-rate multiplier applied at each decay step.
    pub lr_decay_factor: f64,
    /// Epochs between decay steps.
    pub lr_decay_every: usize,
    /// Seed for epoch shuffling (model initialization seeds live elsewhere).
    pub rng_seed: u64,
    /// Stop once eval-mode accuracy on the training split reaches this
    /// fraction (checked only after a promising epoch); `None` trains the
    /// full epoch budget.
    pub stop_at_train_acc: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let epochs = 30;
        Self {
            initial_lr: 0.1,
            momentum: 0.9,
            weight_decay: 1e-4,
            batch_size: 16,
            epochs,
            lr_decay_factor: 0.1,
            lr_decay_every: default_decay_every(epochs),
            rng_seed: 1,
            stop_at_train_acc: None,
        }
    }
}

/// Decay interval giving two decay steps over a run: 40% of the budget.
pub fn default_decay_every(epochs: usize) -> usize {
    (2 * epochs / 5).max(1)
}

impl TrainConfig {
    /// Defaults with the epoch budget (and a matching decay interval) set.
    pub fn for_epochs(epochs: usize) -> Self {
        Self { epochs, lr_decay_every: default_decay_every(epochs), ..Self::default() }
    }

    pub fn with_seed(mut self, rng_seed: u64) -> Self {
        self.rng_seed = rng_seed;
        self
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |message: String| Err(HarnessError::Config(message));
        if self.initial_lr <= 0.0 || !self.initial_lr.is_finite() {
            return bad(format!("train.initial_lr must be positive, got {}", self.initial_lr));
        }
        if self.batch_size < 2 {
            return bad(format!("train.batch_size must be >= 2, got {}", self.batch_size));
        }
        if self.epochs < 1 {
            return bad("train.epochs must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("train.momentum must be in [0, 1), got {}", self.momentum));
        }
        if self.weight_decay < 0.0 || self.weight_decay.is_nan() {
            return bad(format!("train.weight_decay must be >= 0, got {}", self.weight_decay));
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0) {
            return bad(format!(
                "train.lr_decay_factor must be in (0, 1], got {}",
                self.lr_decay_factor
            ));
        }
        if self.lr_decay_every == 0 {
            return bad("train.lr_decay_every must be >= 1".into());
        }
        if let Some(threshold) = self.stop_at_train_acc {
            if !(threshold > 0.0 && threshold <= 1.0) {
                return bad(format!(
                    "train.stop_at_train_acc must be in (0, 1], got {threshold}"
                ));
            }
        }
        Ok(())
    }

    /// Learning rate in effect during `epoch` (0-based): the initial rate
    /// decayed once per completed `lr_decay_every` span.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        if self.lr_decay_every == 0 {
            return self.initial_lr;
        }
        let steps = (epoch / self.lr_decay_every) as i32;
        self.initial_lr * self.lr_decay_factor.powi(steps)
    }
}

/// One epoch's aggregate statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean per-sample loss over the epoch.
    pub loss: f64,
    /// Fraction of training samples whose train-mode logits argmax matched
    /// the label during the epoch.
    pub train_accuracy: f64,
}

/// What a training run produced (the model itself mutates in place).
#[derive(Debug, Clone, Default)]
pub struct TrainOutcome {
    pub history: Vec<EpochStats>,
    /// True when `stop_at_train_acc` ended the run before the epoch budget.
    pub stopped_early: bool,
}

/// Trains `model` on the records at `train_indices` for
/// `config.epochs` epochs. Fully deterministic given the config; aborts on a
/// non-finite loss. `epochs = 0` is a legal no-op. Trailing minibatches of a
/// single sample are skipped (batch statistics need at least two).
pub fn train(
    model: &mut AnyModel,
    data: &PreparedDataset,
    train_indices: &[usize],
    config: &TrainConfig,
) -> Result<TrainOutcome, HarnessError> {
    if train_indices.is_empty() {
        return Err(HarnessError::EmptyIndices { context: "training" });
    }
    if config.batch_size < 2 {
        return Err(HarnessError::Config(format!(
            "train.batch_size must be >= 2, got {}",
            config.batch_size
        )));
    }

    let mut outcome = TrainOutcome::default();
    let mut order: Vec<usize> = train_indices.to_vec();
    for epoch in 0..config.epochs {
        let lr = config.lr_at(epoch);
        let optimizer = Sgd::new(lr, config.momentum, config.weight_decay);
        shuffle(&mut order, seed::derive(config.rng_seed, epoch as u64));

        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        let mut correct = 0usize;
        for (batch_index, batch) in order.chunks(config.batch_size).enumerate() {
            if batch.len() < 2 {
                continue;
            }
            let labels = data.labels_at(batch);
            let (loss, logits) = batch_loss_and_grad(model, data, batch, &labels)?;
            if !loss.is_finite() {
                return Err(HarnessError::NonFiniteLoss { epoch, batch: batch_index, loss });
            }
            optimizer.step(model.param_blocks());

            loss_sum += loss * batch.len() as f64;
            seen += batch.len();
            correct += (0..logits.rows())
                .filter(|&row| open3d::argmax(logits.row(row)) == labels[row])
                .count();
        }
        if seen == 0 {
            return Err(HarnessError::Config(format!(
                "no usable minibatch: {} training records at batch size {}",
                train_indices.len(),
                config.batch_size
            )));
        }

        let stats = EpochStats {
            epoch,
            loss: loss_sum / seen as f64,
            train_accuracy: correct as f64 / seen as f64,
        };
        outcome.history.push(stats);

        if let Some(threshold) = config.stop_at_train_acc {
            // Train-mode accuracy is a cheap screen; confirm with an
            // eval-mode pass before actually stopping.
            if stats.train_accuracy >= threshold
                && eval_accuracy(model, data, train_indices)? >= threshold
            {
                outcome.stopped_early = true;
                break;
            }
        }
    }
    Ok(outcome)
}

/// In-place Fisher-Yates shuffle from a derived seed. Written out explicitly
/// so the visiting order is pinned by this crate, not by a library's
/// internals.
fn shuffle(order: &mut [usize], seed_value: u64) {
    use rand::Rng;
    let mut rng = seed::rng(seed_value, salt::SHUFFLE);
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
}

/// Train-mode loss + backward for one batch of either model kind.
pub(crate) fn batch_loss_and_grad(
    model: &mut AnyModel,
    data: &PreparedDataset,
    indices: &[usize],
    labels: &[usize],
) -> Result<(f64, Plane), HarnessError> {
    match model {
        AnyModel::ThreeBranch(m) => {
            let triples = data.triples(indices)?;
            Ok(m.loss_and_grad(&triples, labels)?)
        }
        AnyModel::Spectro(m) => {
            let planes = data.planes(indices)?;
            Ok(m.loss_and_grad(&planes, labels)?)
        }
    }
}

/// Eval-mode predictions for the records at `indices`.
pub(crate) fn predict(
    model: &AnyModel,
    data: &PreparedDataset,
    indices: &[usize],
) -> Result<Vec<usize>, HarnessError> {
    let mut out = Vec::with_capacity(indices.len());
    for chunk in indices.chunks(64) {
        let mut predictions = match model {
            AnyModel::ThreeBranch(m) => m.predict(&data.triples(chunk)?)?,
            AnyModel::Spectro(m) => m.predict(&data.planes(chunk)?)?,
        };
        out.append(&mut predictions);
    }
    Ok(out)
}

fn eval_accuracy(
    model: &AnyModel,
    data: &PreparedDataset,
    indices: &[usize],
) -> Result<f64, HarnessError> {
    let predictions = predict(model, data, indices)?;
    let correct = predictions
        .iter()
        .zip(indices)
        .filter(|&(&prediction, &i)| prediction == data.labels[i])
        .count();
    Ok(correct as f64 / indices.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BranchSpec, Open3dModel};
    use crate::plane::Plane;
    use crate::projection::ProjectionTriple;
    use rand::Rng;

    /// Tiny synthetic cube-projection dataset with class-dependent means, so
    /// a small model can actually fit it.
    fn toy_dataset(samples: usize, classes: usize, seed: u64) -> PreparedDataset {
        let (t, m, n) = (4, 6, 5);
        let mut rng = seed::rng(seed, 0x70_79);
        let mut triples = Vec::new();
        let mut labels = Vec::new();
        let mut antennas = Vec::new();
        for i in 0..samples {
            let class = i % classes;
            let shift = class as f64 * 1.5;
            let mut make = |rows: usize, cols: usize| {
                Plane::from_fn(rows, cols, |_, _| rng.random_range(-0.3..0.3) + shift)
            };
            let (f_rd, f_td, f_tr) = (make(m, n), make(t, n), make(t, m));
            triples.push(ProjectionTriple { f_rd, f_td, f_tr });
            labels.push(class);
            antennas.push(i % 2);
        }
        PreparedDataset::from_triples(triples, labels, antennas, classes).unwrap()
    }

    fn tiny_model(data: &PreparedDataset, seed: u64) -> AnyModel {
        AnyModel::ThreeBranch(
            Open3dModel::new(
                BranchSpec::tiny(),
                data.cube_dims().unwrap(),
                data.classes,
                8,
                seed,
            )
            .unwrap(),
        )
    }

    fn config() -> TrainConfig {
        TrainConfig {
            initial_lr: 0.05,
            batch_size: 4,
            epochs: 3,
            rng_seed: 7,
            ..TrainConfig::default()
        }
    }

    fn param_bytes(model: &mut AnyModel) -> Vec<u64> {
        model
            .param_blocks()
            .iter()
            .flat_map(|b| b.values.iter().map(|v| v.to_bits()))
            .collect()
    }

    #[test]
    fn zero_epochs_is_a_no_op() {
        let data = toy_dataset(8, 2, 1);
        let mut model = tiny_model(&data, 5);
        let before = param_bytes(&mut model);
        let indices: Vec<usize> = (0..data.len()).collect();
        let outcome =
            train(&mut model, &data, &indices, &TrainConfig { epochs: 0, ..config() }).unwrap();
        assert!(outcome.history.is_empty());
        assert!(!outcome.stopped_early);
        assert_eq!(param_bytes(&mut model), before);
    }

    #[test]
    fn same_seed_trains_bitwise_identically_and_other_seeds_differ() {
        let data = toy_dataset(10, 2, 2);
        let indices: Vec<usize> = (0..data.len()).collect();

        let mut runs = Vec::new();
        for _ in 0..2 {
            let mut model = tiny_model(&data, 5);
            let outcome = train(&mut model, &data, &indices, &config()).unwrap();
            runs.push((param_bytes(&mut model), outcome.history));
        }
        assert_eq!(runs[0].0, runs[1].0, "identical seeds must match bitwise");
        assert_eq!(runs[0].1, runs[1].1);

        let mut model = tiny_model(&data, 5);
        let other = TrainConfig { rng_seed: 8, ..config() };
        train(&mut model, &data, &indices, &other).unwrap();
        assert_ne!(param_bytes(&mut model), runs[0].0, "shuffle seed must matter");
    }

    #[test]
    fn loss_decreases_on_a_separable_toy_problem() {
        let data = toy_dataset(16, 2, 3);
        let indices: Vec<usize> = (0..data.len()).collect();
        let mut model = tiny_model(&data, 11);
        let cfg = TrainConfig { epochs: 12, initial_lr: 0.05, batch_size: 4, ..config() };
        let outcome = train(&mut model, &data, &indices, &cfg).unwrap();
        let first = outcome.history.first().unwrap().loss;
        let last = outcome.history.last().unwrap().loss;
        assert!(
            last < 0.5 * first,
            "loss should at least halve on a separable toy problem ({first} -> {last})"
        );
    }

    #[test]
    fn early_stop_triggers_and_truncates_history() {
        let data = toy_dataset(16, 2, 3);
        let indices: Vec<usize> = (0..data.len()).collect();
        let mut model = tiny_model(&data, 11);
        let cfg = TrainConfig {
            epochs: 60,
            stop_at_train_acc: Some(1.0),
            ..config()
        };
        let outcome = train(&mut model, &data, &indices, &cfg).unwrap();
        assert!(outcome.stopped_early, "separable toy data should hit 100% train accuracy");
        assert!(outcome.history.len() < 60);
        assert_eq!(eval_accuracy(&model, &data, &indices).unwrap(), 1.0);
    }

    #[test]
    fn trailing_singleton_batch_is_skipped() {
        let data = toy_dataset(9, 2, 4);
        let indices: Vec<usize> = (0..data.len()).collect();
        let mut model = tiny_model(&data, 5);
        // 9 records at batch size 4 -> 4 + 4 + 1; the singleton is dropped.
        let outcome = train(
            &mut model,
            &data,
            &indices,
            &TrainConfig { epochs: 1, batch_size: 4, ..config() },
        )
        .unwrap();
        assert_eq!(outcome.history.len(), 1);
        // All-but-one sample contributes to the epoch statistics.
        let stats = outcome.history[0];
        assert!((stats.train_accuracy * 8.0).fract().abs() < 1e-12);
    }

    #[test]
    fn lr_schedule_steps_down() {
        let cfg = TrainConfig {
            initial_lr: 0.1,
            lr_decay_factor: 0.1,
            lr_decay_every: 4,
            ..TrainConfig::default()
        };
        assert_eq!(cfg.lr_at(0), 0.1);
        assert_eq!(cfg.lr_at(3), 0.1);
        assert!((cfg.lr_at(4) - 0.01).abs() < 1e-15);
        assert!((cfg.lr_at(8) - 0.001).abs() < 1e-16);
    }

    #[test]
    fn default_decay_interval_is_forty_percent() {
        assert_eq!(default_decay_every(30), 12);
        assert_eq!(default_decay_every(100), 40);
        assert_eq!(default_decay_every(1), 1);
        let cfg = TrainConfig::for_epochs(50);
        assert_eq!(cfg.epochs, 50);
        assert_eq!(cfg.lr_decay_every, 20);
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig { initial_lr: 0.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 1, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { epochs: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { momentum: 1.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { lr_decay_every: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { stop_at_train_acc: Some(0.0), ..TrainConfig::default() }
            .validate()
            .is_err());
    }

    #[test]
    fn representation_mismatch_is_reported() {
        let data = toy_dataset(8, 2, 1);
        let planes: Vec<Plane> = (0..8).map(|_| Plane::zeros(6, 5)).collect();
        let plane_data =
            PreparedDataset::from_planes(planes, data.labels.clone(), data.antennas.clone(), 2)
                .unwrap();
        let mut model = tiny_model(&data, 5);
        let indices: Vec<usize> = (0..8).collect();
        let err = train(&mut model, &plane_data, &indices, &config()).unwrap_err();
        assert!(matches!(err, HarnessError::RepresentationMismatch { .. }));
    }
}
