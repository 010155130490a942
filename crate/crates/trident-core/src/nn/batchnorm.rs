//! Batch normalization over the channel axis of NCHW tensors.
//!
//! Train mode standardizes each channel by its batch statistics (biased
//! variance over `batch * height * width` values, eps 1e-5), then applies the
//! learned scale and shift:
//!
//! ```text
//!   xhat = (x - mean_batch) / sqrt(var_batch + eps)
//!   y    = gamma * xhat + beta
//!   running <- 0.9 * running + 0.1 * batch      (mean and variance)
//! ```
//!
//! Eval mode uses the running statistics. Train mode requires batch >= 2 —
//! a single sample would zero its own variance and silently break gradients.

use super::param::ParamBlock;
use super::tensor::Tensor4;
use super::NnError;

/// Learned per-channel scale/shift with tracked running statistics.
#[derive(Debug, Clone)]
pub struct BatchNorm2d {
    pub channels: usize,
    /// Scale, initialized to 1.
    pub gamma: ParamBlock,
    /// Shift, initialized to 0.
    pub beta: ParamBlock,
    /// Running mean, initialized to 0 (not optimizer-updated).
    pub running_mean: ParamBlock,
    /// Running variance, initialized to 1 (not optimizer-updated).
    pub running_var: ParamBlock,
    pub eps: f64,
    /// Weight of the old running value in the update.
    pub momentum: f64,
}

/// Saved forward quantities needed by the backward pass.
#[derive(Debug, Clone)]
pub struct BnCache {
    inv_std: Vec<f64>,
    xhat: Tensor4,
}

impl BatchNorm2d {
    pub fn new(channels: usize) -> Self {
        Self {
            channels,
            gamma: ParamBlock::learnable(vec![1.0; channels]),
            beta: ParamBlock::learnable(vec![0.0; channels]),
            running_mean: ParamBlock::running_stat(vec![0.0; channels]),
            running_var: ParamBlock::running_stat(vec![1.0; channels]),
            eps: 1e-5,
            momentum: 0.9,
        }
    }

    fn check_channels(&self, x: &Tensor4) -> Result<(), NnError> {
        if x.channels != self.channels {
            return Err(NnError::ShapeMismatch(format!(
                "batch norm over {} channels applied to {}",
                self.channels, x.channels
            )));
        }
        Ok(())
    }

    /// Train-mode forward; updates running statistics.
    pub fn forward_train(&mut self, x: &Tensor4) -> Result<(Tensor4, BnCache), NnError> {
        if x.batch < 2 {
            return Err(NnError::BatchTooSmall(x.batch));
        }
        self.forward_train_unchecked(x)
    }

    /// Train-mode forward without the batch >= 2 guard. Only for tests that
    /// deliberately compare against single-sample batch statistics.
    pub(crate) fn forward_train_unchecked(
        &mut self,
        x: &Tensor4,
    ) -> Result<(Tensor4, BnCache), NnError> {
        self.check_channels(x)?;
        let count = (x.batch * x.height * x.width) as f64;
        let mut out = Tensor4::zeros_like(x);
        let mut xhat = Tensor4::zeros_like(x);
        let mut inv_std = vec![0.0; self.channels];

        for (c, inv) in inv_std.iter_mut().enumerate() {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for b in 0..x.batch {
                for &v in x.plane(b, c) {
                    sum += v;
                    sum_sq += v * v;
                }
            }
            let mean = sum / count;
            let var = (sum_sq / count - mean * mean).max(0.0);
            let istd = 1.0 / (var + self.eps).sqrt();
            *inv = istd;

            let (gamma, beta) = (self.gamma.values[c], self.beta.values[c]);
            for b in 0..x.batch {
                let src = x.plane(b, c);
                // Write normalized values first, then the affine output.
                let dst_hat = xhat.plane_mut(b, c);
                for (h, &v) in dst_hat.iter_mut().zip(src) {
                    *h = (v - mean) * istd;
                }
                let dst = out.plane_mut(b, c);
                for (o, &h) in dst.iter_mut().zip(xhat.plane(b, c)) {
                    *o = gamma * h + beta;
                }
            }

            self.running_mean.values[c] =
                self.momentum * self.running_mean.values[c] + (1.0 - self.momentum) * mean;
            self.running_var.values[c] =
                self.momentum * self.running_var.values[c] + (1.0 - self.momentum) * var;
        }
        Ok((out, BnCache { inv_std, xhat }))
    }

    /// Eval-mode forward using running statistics.
    pub fn forward_eval(&self, x: &Tensor4) -> Result<Tensor4, NnError> {
        self.check_channels(x)?;
        let mut out = Tensor4::zeros_like(x);
        for c in 0..self.channels {
            let istd = 1.0 / (self.running_var.values[c] + self.eps).sqrt();
            let mean = self.running_mean.values[c];
            let (gamma, beta) = (self.gamma.values[c], self.beta.values[c]);
            for b in 0..x.batch {
                let src = x.plane(b, c);
                let dst = out.plane_mut(b, c);
                for (o, &v) in dst.iter_mut().zip(src) {
                    *o = gamma * (v - mean) * istd + beta;
                }
            }
        }
        Ok(out)
    }

    /// Backward through the train-mode forward; accumulates gamma/beta
    /// gradients and returns the input gradient.
    pub fn backward(&mut self, cache: &BnCache, grad_out: &Tensor4) -> Tensor4 {
        let x_count = (grad_out.batch * grad_out.height * grad_out.width) as f64;
        let mut grad_in = Tensor4::zeros_like(grad_out);
        for c in 0..self.channels {
            // Channel reductions: d_beta = sum g, d_gamma = sum g * xhat.
            let mut g_sum = 0.0;
            let mut gx_sum = 0.0;
            for b in 0..grad_out.batch {
                for (&g, &h) in grad_out.plane(b, c).iter().zip(cache.xhat.plane(b, c)) {
                    g_sum += g;
                    gx_sum += g * h;
                }
            }
            self.beta.grad[c] += g_sum;
            self.gamma.grad[c] += gx_sum;

            // dx = gamma * inv_std / Nb * (Nb * g - sum(g) - xhat * sum(g * xhat)).
            let scale = self.gamma.values[c] * cache.inv_std[c] / x_count;
            for b in 0..grad_out.batch {
                let g_plane = grad_out.plane(b, c);
                let h_plane = cache.xhat.plane(b, c);
                let gi_plane = grad_in.plane_mut(b, c);
                for i in 0..g_plane.len() {
                    gi_plane[i] = scale * (x_count * g_plane[i] - g_sum - h_plane[i] * gx_sum);
                }
            }
        }
        grad_in
    }

    /// Blocks in declaration (serialization) order.
    pub fn param_blocks(&mut self) -> Vec<&mut ParamBlock> {
        vec![&mut self.gamma, &mut self.beta, &mut self.running_mean, &mut self.running_var]
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_input(b: usize, c: usize, h: usize, w: usize, seed: u64) -> Tensor4 {
        let mut rng = crate::seed::rng(seed, 0xB0);
        Tensor4::from_vec(
            b,
            c,
            h,
            w,
            (0..b * c * h * w).map(|_| rng.random_range(-2.0..3.0)).collect(),
        )
    }

    #[test]
    fn train_mode_standardizes_each_channel() {
        let mut bn = BatchNorm2d::new(3);
        let x = random_input(4, 3, 2, 2, 1);
        let (y, _) = bn.forward_train(&x).unwrap();
        for c in 0..3 {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for b in 0..4 {
                for &v in y.plane(b, c) {
                    sum += v;
                    sum_sq += v * v;
                }
            }
            let mean = sum / 16.0;
            let var = sum_sq / 16.0 - mean * mean;
            assert!(mean.abs() < 1e-6, "channel {c} mean {mean}");
            assert!((var - 1.0).abs() < 1e-4, "channel {c} var {var}");
        }
    }

    #[test]
    fn eval_mode_with_identity_stats_is_identity() {
        let bn = BatchNorm2d::new(2);
        let x = random_input(3, 2, 2, 2, 2);
        let y = bn.forward_eval(&x).unwrap();
        for (a, b) in x.values().iter().zip(y.values()) {
            let rel = (a - b).abs() / a.abs().max(1.0);
            assert!(rel < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn running_stats_blend_with_momentum() {
        let mut bn = BatchNorm2d::new(1);
        let x = Tensor4::from_vec(2, 1, 1, 2, vec![1.0, 3.0, 5.0, 7.0]);
        bn.forward_train(&x).unwrap();
        // Batch mean 4, biased variance 5; running = 0.9 * old + 0.1 * batch.
        assert!((bn.running_mean.values[0] - 0.4).abs() < 1e-12);
        assert!((bn.running_var.values[0] - (0.9 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn single_sample_batch_is_rejected_in_train_mode() {
        let mut bn = BatchNorm2d::new(1);
        let x = Tensor4::zeros(1, 1, 2, 2);
        assert_eq!(bn.forward_train(&x).unwrap_err(), NnError::BatchTooSmall(1));
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let mut bn = BatchNorm2d::new(2);
        let x = Tensor4::zeros(2, 3, 2, 2);
        assert!(matches!(bn.forward_train(&x), Err(NnError::ShapeMismatch(_))));
        assert!(matches!(bn.forward_eval(&x), Err(NnError::ShapeMismatch(_))));
    }

    #[test]
    fn scale_and_shift_are_applied() {
        let mut bn = BatchNorm2d::new(1);
        bn.gamma.values[0] = 2.0;
        bn.beta.values[0] = -1.0;
        let x = random_input(4, 1, 2, 2, 3);
        let (y, _) = bn.forward_train(&x).unwrap();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for b in 0..4 {
            for &v in y.plane(b, 0) {
                sum += v;
                sum_sq += v * v;
            }
        }
        let mean = sum / 16.0;
        let var = sum_sq / 16.0 - mean * mean;
        assert!((mean + 1.0).abs() < 1e-6, "shift moves the mean to -1, got {mean}");
        assert!((var - 4.0).abs() < 1e-3, "scale doubles the std, got var {var}");
    }
}
