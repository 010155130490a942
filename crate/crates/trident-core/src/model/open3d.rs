//! Three-branch classifier over the projected cube planes.
//!
//! One branch per plane — range-Doppler, time-Doppler, time-range — each
//! producing a pooled feature vector. The vectors are concatenated in that
//! fixed order and classified by a one-hidden-layer MLP with SiLU.

use crate::nn::dense::Dense;
use crate::nn::loss::softmax_cross_entropy;
use crate::nn::param::ParamBlock;
use crate::nn::tensor::Tensor4;
use crate::plane::Plane;
use crate::projection::{NormStats, ProjectionTriple};
use crate::seed::{self, salt};

use super::branch::{silu_backward_plane, Branch, BranchCache};
use super::{BranchSpec, ModelError};

/// Default hidden width of the fusion MLP.
pub const DEFAULT_HEAD_HIDDEN: usize = 128;

/// Three-branch model: per-plane feature extractors, concatenation, MLP head.
#[derive(Debug, Clone)]
pub struct Open3dModel {
    pub spec: BranchSpec,
    pub classes: usize,
    pub hidden: usize,
    /// Cube dims (frames, range bins, Doppler bins) the model was built for.
    pub cube_dims: (usize, usize, usize),
    pub branch_rd: Branch,
    pub branch_td: Branch,
    pub branch_tr: Branch,
    pub head1: Dense,
    pub head2: Dense,
    /// Plane standardization fitted on training data, in (rD, tD, tr) order.
    pub norm: [NormStats; 3],
}

/// Forward intermediates for one training step.
struct TrainCache {
    rd: BranchCache,
    td: BranchCache,
    tr: BranchCache,
    fused: Plane,
    /// Hidden pre-activation.
    h_pre: Plane,
    /// silu(h_pre).
    h_act: Plane,
}

impl Open3dModel {
    /// Builds all parameters from `rng_seed` in declaration order:
    /// rD branch, tD branch, tr branch, hidden dense, class dense.
    pub fn new(
        spec: BranchSpec,
        cube_dims: (usize, usize, usize),
        classes: usize,
        hidden: usize,
        rng_seed: u64,
    ) -> Result<Self, ModelError> {
        if classes < 2 {
            return Err(ModelError::BadSpec(format!("need >= 2 classes, got {classes}")));
        }
        if hidden == 0 {
            return Err(ModelError::BadSpec("head hidden width must be positive".into()));
        }
        let (t, m, n) = cube_dims;
        let mut rng = seed::rng(rng_seed, salt::MODEL_INIT);
        let branch_rd = Branch::new(&spec, m, n, &mut rng)?;
        let branch_td = Branch::new(&spec, t, n, &mut rng)?;
        let branch_tr = Branch::new(&spec, t, m, &mut rng)?;
        let fused_width = branch_rd.out_features + branch_td.out_features + branch_tr.out_features;
        let head1 = Dense::new(fused_width, hidden, &mut rng);
        let head2 = Dense::new(hidden, classes, &mut rng);
        Ok(Self {
            spec,
            classes,
            hidden,
            cube_dims,
            branch_rd,
            branch_td,
            branch_tr,
            head1,
            head2,
            norm: [NormStats::identity(), NormStats::identity(), NormStats::identity()],
        })
    }

    pub fn fused_width(&self) -> usize {
        self.branch_rd.out_features + self.branch_td.out_features + self.branch_tr.out_features
    }

    /// Stacks the triples into three single-channel input tensors, applying
    /// the model's plane normalization.
    pub fn assemble(&self, triples: &[&ProjectionTriple]) -> Result<[Tensor4; 3], ModelError> {
        if triples.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        let dims =
            [self.branch_rd.input_dims, self.branch_td.input_dims, self.branch_tr.input_dims];
        let mut out = Vec::with_capacity(3);
        for (k, (&(rows, cols), stats)) in dims.iter().zip(&self.norm).enumerate() {
            let mut x = Tensor4::zeros(triples.len(), 1, rows, cols);
            for (b, triple) in triples.iter().enumerate() {
                let plane = triple.planes()[k];
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
                    *d = stats.apply(v);
                }
            }
            out.push(x);
        }
        Ok(out.try_into().expect("three planes"))
    }

    /// Eval-mode fused feature rows (rD ++ tD ++ tr), one per sample.
    pub fn eval_features(&self, xs: &[Tensor4; 3]) -> Result<Plane, ModelError> {
        let f_rd = self.branch_rd.forward_eval(&xs[0])?;
        let f_td = self.branch_td.forward_eval(&xs[1])?;
        let f_tr = self.branch_tr.forward_eval(&xs[2])?;
        Ok(concat_rows(&[&f_rd, &f_td, &f_tr]))
    }

    /// MLP head: dense -> SiLU -> dense.
    pub fn head_forward(&self, fused: &Plane) -> Plane {
        let h = self.head1.forward(fused);
        let mut act = h.clone();
        for v in act.values_mut() {
            *v = crate::nn::activation::silu(*v);
        }
        self.head2.forward(&act)
    }

    /// Eval-mode logits for a batch of (already projected) triples.
    pub fn forward_eval(&self, triples: &[&ProjectionTriple]) -> Result<Plane, ModelError> {
        let xs = self.assemble(triples)?;
        let fused = self.eval_features(&xs)?;
        Ok(self.head_forward(&fused))
    }

    /// Eval-mode class predictions (argmax of the logits).
    pub fn predict(&self, triples: &[&ProjectionTriple]) -> Result<Vec<usize>, ModelError> {
        let logits = self.forward_eval(triples)?;
        Ok((0..logits.rows()).map(|b| argmax(logits.row(b))).collect())
    }

    /// Train-mode loss and full backward pass. Parameter gradients
    /// accumulate in the blocks; returns (mean loss, train-mode logits).
    pub fn loss_and_grad(
        &mut self,
        triples: &[&ProjectionTriple],
        labels: &[usize],
    ) -> Result<(f64, Plane), ModelError> {
        if triples.len() < 2 {
            return Err(ModelError::Nn(crate::nn::NnError::BatchTooSmall(triples.len())));
        }
        self.loss_and_grad_unchecked(triples, labels)
    }

    /// As [`Self::loss_and_grad`] without the batch >= 2 guard; used by tests
    /// that compare against explicit single-sample batch statistics.
    pub(crate) fn loss_and_grad_unchecked(
        &mut self,
        triples: &[&ProjectionTriple],
        labels: &[usize],
    ) -> Result<(f64, Plane), ModelError> {
        let (logits, cache) = self.forward_train(triples)?;
        let (loss, g_logits) = softmax_cross_entropy(&logits, labels)?;
        self.backward(&cache, &g_logits);
        Ok((loss, logits))
    }

    fn forward_train(
        &mut self,
        triples: &[&ProjectionTriple],
    ) -> Result<(Plane, TrainCache), ModelError> {
        let xs = self.assemble(triples)?;
        let (f_rd, rd) = self.branch_rd.forward_train(&xs[0])?;
        let (f_td, td) = self.branch_td.forward_train(&xs[1])?;
        let (f_tr, tr) = self.branch_tr.forward_train(&xs[2])?;
        let fused = concat_rows(&[&f_rd, &f_td, &f_tr]);
        let h_pre = self.head1.forward(&fused);
        let h_act = h_pre.map(crate::nn::activation::silu);
        let logits = self.head2.forward(&h_act);
        Ok((logits, TrainCache { rd, td, tr, fused, h_pre, h_act }))
    }

    fn backward(&mut self, cache: &TrainCache, g_logits: &Plane) {
        let g_act = self.head2.backward(&cache.h_act, g_logits);
        let g_pre = silu_backward_plane(&cache.h_pre, &g_act);
        let g_fused = self.head1.backward(&cache.fused, &g_pre);
        let widths = [
            self.branch_rd.out_features,
            self.branch_td.out_features,
            self.branch_tr.out_features,
        ];
        let parts = split_rows(&g_fused, &widths);
        self.branch_rd.backward(&cache.rd, &parts[0]);
        self.branch_td.backward(&cache.td, &parts[1]);
        self.branch_tr.backward(&cache.tr, &parts[2]);
    }

    /// All parameter blocks in declaration (serialization) order.
    pub fn param_blocks(&mut self) -> Vec<&mut ParamBlock> {
        let mut blocks = self.branch_rd.param_blocks();
        blocks.extend(self.branch_td.param_blocks());
        blocks.extend(self.branch_tr.param_blocks());
        blocks.extend(self.head1.param_blocks());
        blocks.extend(self.head2.param_blocks());
        blocks
    }

    /// Total stored values, including batch-norm running statistics.
    pub fn param_count(&mut self) -> usize {
        self.param_blocks().iter().map(|b| b.len()).sum()
    }
}

/// First index of the maximum entry.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Worst relative error between the full model's analytic parameter
/// gradients and central finite differences of the loss, measured on a tiny
/// three-class model with a two-sample batch of random 8x8x8 projections.
/// The gradient oracle requires this to stay below 1e-4.
pub fn end_to_end_gradcheck(seed: u64) -> f64 {
    use crate::nn::gradcheck::check_values;
    use crate::nn::ParamKind;
    use rand::Rng;
    use std::cell::RefCell;

    let mut rng = seed::rng(seed, 0x6461_7461);
    let mut fill = |rows: usize, cols: usize| {
        Plane::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect())
    };
    let triples: Vec<ProjectionTriple> = (0..2)
        .map(|_| ProjectionTriple { f_rd: fill(8, 8), f_td: fill(8, 8), f_tr: fill(8, 8) })
        .collect();
    let refs: Vec<&ProjectionTriple> = triples.iter().collect();
    let labels = vec![0usize, 2];

    let mut model =
        Open3dModel::new(BranchSpec::tiny(), (8, 8, 8), 3, 8, seed).expect("tiny model");
    model.loss_and_grad(&refs, &labels).expect("forward/backward");
    let analytic: Vec<Vec<f64>> = model
        .param_blocks()
        .iter_mut()
        .map(|b| {
            let g = b.grad.clone();
            b.zero_grad();
            g
        })
        .collect();
    let learnable: Vec<bool> =
        model.param_blocks().iter().map(|b| b.kind == ParamKind::Learnable).collect();

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
    worst
}

/// Concatenates planes with equal row counts along the column axis.
pub(crate) fn concat_rows(parts: &[&Plane]) -> Plane {
    let rows = parts[0].rows();
    let cols: usize = parts.iter().map(|p| p.cols()).sum();
    let mut out = Plane::zeros(rows, cols);
    for r in 0..rows {
        let dst = out.row_mut(r);
        let mut at = 0;
        for p in parts {
            dst[at..at + p.cols()].copy_from_slice(p.row(r));
            at += p.cols();
        }
    }
    out
}

/// Splits a plane into column segments of the given widths.
pub(crate) fn split_rows(fused: &Plane, widths: &[usize]) -> Vec<Plane> {
    let mut out = Vec::with_capacity(widths.len());
    let mut at = 0;
    for &w in widths {
        let mut part = Plane::zeros(fused.rows(), w);
        for r in 0..fused.rows() {
            part.row_mut(r).copy_from_slice(&fused.row(r)[at..at + w]);
        }
        at += w;
        out.push(part);
    }
    out
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
