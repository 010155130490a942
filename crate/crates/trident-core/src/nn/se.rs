//! Squeeze-and-excitation channel gating.
//!
//! ```text
//!   pooled[b][c] = mean_{h,w} x[b][c][h][w]            (squeeze)
//!   gate         = sigmoid(W2 silu(W1 pooled + b1) + b2)
//!   out          = x * gate[b][c]                       (excite)
//! ```
//!
//! The bottleneck width is `max(1, channels / reduction)`.

use rand_chacha::ChaCha8Rng;

use super::activation::{sigmoid, silu, silu_grad};
use super::dense::Dense;
use super::param::ParamBlock;
use super::tensor::Tensor4;
use super::NnError;

/// Channelwise gating block with a two-layer bottleneck.
#[derive(Debug, Clone)]
pub struct SqueezeExcitation {
    pub channels: usize,
    pub reduced: usize,
    /// Squeeze projection `channels -> reduced`.
    pub fc1: Dense,
    /// Excite projection `reduced -> channels`.
    pub fc2: Dense,
}

/// Forward intermediates needed by the backward pass.
#[derive(Debug, Clone)]
pub struct SeCache {
    pooled: crate::plane::Plane,
    /// Pre-activation of the bottleneck.
    z: crate::plane::Plane,
    /// silu(z).
    hidden: crate::plane::Plane,
    /// Final sigmoid gates, one per (batch, channel).
    gate: crate::plane::Plane,
}

impl SqueezeExcitation {
    pub fn new(channels: usize, reduction: usize, rng: &mut ChaCha8Rng) -> Self {
        assert!(reduction >= 1, "reduction must be >= 1");
        let reduced = (channels / reduction).max(1);
        Self {
            channels,
            reduced,
            fc1: Dense::new(channels, reduced, rng),
            fc2: Dense::new(reduced, channels, rng),
        }
    }

    pub fn forward(&self, x: &Tensor4) -> Result<(Tensor4, SeCache), NnError> {
        if x.channels != self.channels {
            return Err(NnError::ShapeMismatch(format!(
                "squeeze-excitation over {} channels applied to {}",
                self.channels, x.channels
            )));
        }
        let hw = (x.height * x.width) as f64;
        let mut pooled = crate::plane::Plane::zeros(x.batch, self.channels);
        for b in 0..x.batch {
            for c in 0..self.channels {
                let sum: f64 = x.plane(b, c).iter().sum();
                pooled.set(b, c, sum / hw);
            }
        }
        let z = self.fc1.forward(&pooled);
        let hidden = z.map(silu);
        let pre_gate = self.fc2.forward(&hidden);
        let gate = pre_gate.map(sigmoid);

        let mut out = Tensor4::zeros_like(x);
        for b in 0..x.batch {
            for c in 0..self.channels {
                let g = gate.get(b, c);
                let src = x.plane(b, c);
                let dst = out.plane_mut(b, c);
                for (o, &v) in dst.iter_mut().zip(src) {
                    *o = v * g;
                }
            }
        }
        Ok((out, SeCache { pooled, z, hidden, gate }))
    }

    /// Accumulates bottleneck gradients and returns the input gradient.
    pub fn backward(&mut self, x: &Tensor4, cache: &SeCache, grad_out: &Tensor4) -> Tensor4 {
        let hw = (x.height * x.width) as f64;

        // Gradient w.r.t. each gate plus the direct rescale path.
        let mut grad_in = Tensor4::zeros_like(x);
        let mut d_gate = crate::plane::Plane::zeros(x.batch, self.channels);
        for b in 0..x.batch {
            for c in 0..self.channels {
                let g = cache.gate.get(b, c);
                let src = x.plane(b, c);
                let gout = grad_out.plane(b, c);
                let gin = grad_in.plane_mut(b, c);
                let mut acc = 0.0;
                for i in 0..src.len() {
                    acc += gout[i] * src[i];
                    gin[i] = gout[i] * g;
                }
                d_gate.set(b, c, acc);
            }
        }

        // Through the sigmoid: du = d_gate * g * (1 - g).
        let mut d_pre_gate = d_gate;
        for b in 0..x.batch {
            for c in 0..self.channels {
                let g = cache.gate.get(b, c);
                d_pre_gate.set(b, c, d_pre_gate.get(b, c) * g * (1.0 - g));
            }
        }

        // Through the bottleneck MLP.
        let d_hidden = self.fc2.backward(&cache.hidden, &d_pre_gate);
        let mut d_z = d_hidden;
        for b in 0..x.batch {
            for r in 0..self.reduced {
                d_z.set(b, r, d_z.get(b, r) * silu_grad(cache.z.get(b, r)));
            }
        }
        let d_pooled = self.fc1.backward(&cache.pooled, &d_z);

        // The squeeze mean spreads its gradient uniformly over the plane.
        for b in 0..x.batch {
            for c in 0..self.channels {
                let spread = d_pooled.get(b, c) / hw;
                for gi in grad_in.plane_mut(b, c) {
                    *gi += spread;
                }
            }
        }
        grad_in
    }

    /// Blocks in declaration order: fc1 weight/bias, fc2 weight/bias.
    pub fn param_blocks(&mut self) -> Vec<&mut ParamBlock> {
        let mut blocks = self.fc1.param_blocks();
        blocks.extend(self.fc2.param_blocks());
        blocks
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    #[test]
    fn zeroed_excite_projection_gates_at_one_half() {
        let mut se = SqueezeExcitation::new(4, 4, &mut seed::rng(0, 1));
        se.fc2.weight.values.iter_mut().for_each(|w| *w = 0.0);
        se.fc2.bias.values.iter_mut().for_each(|b| *b = 0.0);
        let mut rng = seed::rng(1, 2);
        let x = Tensor4::from_vec(
            2,
            4,
            3,
            3,
            (0..2 * 4 * 9).map(|_| rng.random_range(-1.0..1.0)).collect(),
        );
        let (y, cache) = se.forward(&x).unwrap();
        for (a, b) in y.values().iter().zip(x.values()) {
            assert!((a - b / 2.0).abs() < 1e-15, "sigmoid(0) = 0.5 must halve the input");
        }
        assert!(cache.gate.values().iter().all(|&g| (g - 0.5).abs() < 1e-15));
    }

    #[test]
    fn zero_input_stays_zero() {
        let se = SqueezeExcitation::new(3, 2, &mut seed::rng(0, 3));
        let x = Tensor4::zeros(2, 3, 2, 2);
        let (y, _) = se.forward(&x).unwrap();
        assert!(y.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reduced_width_is_floored_at_one() {
        let se = SqueezeExcitation::new(2, 8, &mut seed::rng(0, 4));
        assert_eq!(se.reduced, 1);
        let se = SqueezeExcitation::new(16, 4, &mut seed::rng(0, 5));
        assert_eq!(se.reduced, 4);
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let se = SqueezeExcitation::new(3, 2, &mut seed::rng(0, 6));
        assert!(matches!(se.forward(&Tensor4::zeros(1, 2, 2, 2)), Err(NnError::ShapeMismatch(_))));
    }
}
