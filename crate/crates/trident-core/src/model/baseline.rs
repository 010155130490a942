//! Single-branch baseline classifier over Doppler spectrograms.
//!
//! Same layer vocabulary as the three-branch model — one branch feeding a
//! single dense head — so any accuracy gap against the cube model reflects
//! the input representation, not the architecture family.

use crate::nn::dense::Dense;
use crate::nn::loss::softmax_cross_entropy;
use crate::nn::param::ParamBlock;
use crate::nn::tensor::Tensor4;
use crate::plane::Plane;
use crate::projection::NormStats;
use crate::seed::{self, salt};

use super::branch::{Branch, BranchCache};
use super::open3d::argmax;
use super::{BranchSpec, ModelError};

/// One branch plus a dense classification head over a single plane.
#[derive(Debug, Clone)]
pub struct Baseline2dModel {
    pub spec: BranchSpec,
    pub classes: usize,
    pub input_dims: (usize, usize),
    pub branch: Branch,
    pub head: Dense,
    pub norm: NormStats,
}

impl Baseline2dModel {
    pub fn new(
        spec: BranchSpec,
        input_dims: (usize, usize),
        classes: usize,
        rng_seed: u64,
    ) -> Result<Self, ModelError> {
        if classes < 2 {
            return Err(ModelError::BadSpec(format!("need >= 2 classes, got {classes}")));
        }
        let mut rng = seed::rng(rng_seed, salt::MODEL_INIT);
        let branch = Branch::new(&spec, input_dims.0, input_dims.1, &mut rng)?;
        let head = Dense::new(branch.out_features, classes, &mut rng);
        Ok(Self { spec, classes, input_dims, branch, head, norm: NormStats::identity() })
    }

    /// Stacks normalized spectrogram planes into a single-channel batch.
    pub fn assemble(&self, planes: &[&Plane]) -> Result<Tensor4, ModelError> {
        if planes.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        let (rows, cols) = self.input_dims;
        let mut x = Tensor4::zeros(planes.len(), 1, rows, cols);
        for (b, plane) in planes.iter().enumerate() {
            if (plane.rows(), plane.cols()) != (rows, cols) {
                return Err(ModelError::InputDims {
                    rows,
                    cols,
                    got_rows: plane.rows(),
                    got_cols: plane.cols(),
                });
            }
            let dst = x.plane_mut(b, 0);
            for (d, &v) in dst.iter_mut().zip(plane.values()) {
                *d = self.norm.apply(v);
            }
        }
        Ok(x)
    }

    pub fn forward_eval(&self, planes: &[&Plane]) -> Result<Plane, ModelError> {
        let x = self.assemble(planes)?;
        let features = self.branch.forward_eval(&x)?;
        Ok(self.head.forward(&features))
    }

    pub fn predict(&self, planes: &[&Plane]) -> Result<Vec<usize>, ModelError> {
        let logits = self.forward_eval(planes)?;
        Ok((0..logits.rows()).map(|b| argmax(logits.row(b))).collect())
    }

    pub fn loss_and_grad(
        &mut self,
        planes: &[&Plane],
        labels: &[usize],
    ) -> Result<(f64, Plane), ModelError> {
        if planes.len() < 2 {
            return Err(ModelError::Nn(crate::nn::NnError::BatchTooSmall(planes.len())));
        }
        self.loss_and_grad_unchecked(planes, labels)
    }

    pub(crate) fn loss_and_grad_unchecked(
        &mut self,
        planes: &[&Plane],
        labels: &[usize],
    ) -> Result<(f64, Plane), ModelError> {
        let x = self.assemble(planes)?;
        let (features, cache): (Plane, BranchCache) = self.branch.forward_train(&x)?;
        let logits = self.head.forward(&features);
        let (loss, g_logits) = softmax_cross_entropy(&logits, labels)?;
        let g_features = self.head.backward(&features, &g_logits);
        self.branch.backward(&cache, &g_features);
        Ok((loss, logits))
    }

    pub fn param_blocks(&mut self) -> Vec<&mut ParamBlock> {
        let mut blocks = self.branch.param_blocks();
        blocks.extend(self.head.param_blocks());
        blocks
    }

    pub fn param_count(&mut self) -> usize {
        self.param_blocks().iter().map(|b| b.len()).sum()
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::check_values;
    use crate::seed;
    use rand::Rng;
    use std::cell::RefCell;

    fn random_plane(rows: usize, cols: usize, rng: &mut impl Rng) -> Plane {
        Plane::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    #[test]
    fn logits_row_length_is_class_count() {
        let model = Baseline2dModel::new(BranchSpec::tiny(), (9, 8), 5, 3).unwrap();
        let mut rng = seed::rng(0, 1);
        let p = random_plane(9, 8, &mut rng);
        let logits = model.forward_eval(&[&p]).unwrap();
        assert_eq!((logits.rows(), logits.cols()), (1, 5));
        assert!(logits.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rebuild_with_same_seed_is_identical() {
        let mut a = Baseline2dModel::new(BranchSpec::tiny(), (8, 8), 3, 7).unwrap();
        let mut b = Baseline2dModel::new(BranchSpec::tiny(), (8, 8), 3, 7).unwrap();
        let av: Vec<Vec<f64>> = a.param_blocks().iter().map(|p| p.values.clone()).collect();
        let bv: Vec<Vec<f64>> = b.param_blocks().iter().map(|p| p.values.clone()).collect();
        assert_eq!(av, bv);
    }

    #[test]
    fn tiny_gradients_match_finite_differences() {
        let mut rng = seed::rng(2, 2);
        let planes: Vec<Plane> = (0..2).map(|_| random_plane(8, 8, &mut rng)).collect();
        let refs: Vec<&Plane> = planes.iter().collect();
        let labels = vec![0usize, 2];

        let mut model = Baseline2dModel::new(BranchSpec::tiny(), (8, 8), 3, 11).unwrap();
        model.loss_and_grad(&refs, &labels).unwrap();
        let analytic: Vec<Vec<f64>> = model
            .param_blocks()
            .iter_mut()
            .map(|b| {
                let g = b.grad.clone();
                b.zero_grad();
                g
            })
            .collect();
        let learnable: Vec<bool> = model
            .param_blocks()
            .iter()
            .map(|b| b.kind == crate::nn::ParamKind::Learnable)
            .collect();

        let cell = RefCell::new(model);
        let mut worst: f64 = 0.0;
        for (bi, grads) in analytic.iter().enumerate() {
            if !learnable[bi] {
                continue;
            }
            let err = check_values(
                grads.len(),
                |i| cell.borrow_mut().param_blocks()[bi].values[i],
                |i, v| cell.borrow_mut().param_blocks()[bi].values[i] = v,
                || cell.borrow_mut().loss_and_grad(&refs, &labels).unwrap().0,
                grads,
            );
            worst = worst.max(err);
        }
        assert!(worst < 1e-4, "baseline end-to-end rel err {worst}");
    }

    #[test]
    fn batch_of_one_is_rejected_in_training() {
        let mut model = Baseline2dModel::new(BranchSpec::tiny(), (8, 8), 3, 13).unwrap();
        let p = Plane::zeros(8, 8);
        assert!(model.loss_and_grad(&[&p], &[0]).is_err());
    }
}
