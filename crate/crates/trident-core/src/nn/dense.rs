//! Fully connected layer over batch-by-feature matrices.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::param::ParamBlock;
use crate::plane::Plane;

/// Affine map `y = x W^T + b` on rows of a batch matrix.
#[derive(Debug, Clone)]
pub struct Dense {
    pub in_features: usize,
    pub out_features: usize,
    /// `out_features x in_features`, He-initialized.
    pub weight: ParamBlock,
    /// `out_features`, zero-initialized.
    pub bias: ParamBlock,
}

impl Dense {
    pub fn new(in_features: usize, out_features: usize, rng: &mut ChaCha8Rng) -> Self {
        let normal = Normal::new(0.0, (2.0 / in_features as f64).sqrt()).expect("valid std");
        let weight = ParamBlock::learnable(
            (0..out_features * in_features).map(|_| normal.sample(rng)).collect(),
        );
        let bias = ParamBlock::learnable(vec![0.0; out_features]);
        Self { in_features, out_features, weight, bias }
    }

    /// `x`: `batch x in_features` -> `batch x out_features`.
    pub fn forward(&self, x: &Plane) -> Plane {
        assert_eq!(x.cols(), self.in_features, "dense input width mismatch");
        let mut out = Plane::zeros(x.rows(), self.out_features);
        for b in 0..x.rows() {
            let row = x.row(b);
            let out_row = out.row_mut(b);
            for (o, out_v) in out_row.iter_mut().enumerate() {
                let w_row = &self.weight.values[o * self.in_features..(o + 1) * self.in_features];
                let mut acc = self.bias.values[o];
                for (wi, xi) in w_row.iter().zip(row) {
                    acc += wi * xi;
                }
                *out_v = acc;
            }
        }
        out
    }

    /// Accumulates weight/bias gradients and returns the input gradient.
    pub fn backward(&mut self, x: &Plane, grad_out: &Plane) -> Plane {
        assert_eq!(grad_out.cols(), self.out_features, "dense gradient width mismatch");
        assert_eq!(grad_out.rows(), x.rows(), "dense batch mismatch");
        let mut grad_in = Plane::zeros(x.rows(), self.in_features);
        for b in 0..x.rows() {
            let row = x.row(b);
            let g_row = grad_out.row(b);
            let gi_row = grad_in.row_mut(b);
            for (o, &g) in g_row.iter().enumerate() {
                self.bias.grad[o] += g;
                let w_row = &self.weight.values[o * self.in_features..(o + 1) * self.in_features];
                let gw_row =
                    &mut self.weight.grad[o * self.in_features..(o + 1) * self.in_features];
                for i in 0..self.in_features {
                    gw_row[i] += g * row[i];
                    gi_row[i] += g * w_row[i];
                }
            }
        }
        grad_in
    }

    pub fn param_blocks(&mut self) -> Vec<&mut ParamBlock> {
        vec![&mut self.weight, &mut self.bias]
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
