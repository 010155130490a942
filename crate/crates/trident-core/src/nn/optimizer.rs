//! Minibatch SGD with classical momentum and L2 weight decay.

use super::param::{ParamBlock, ParamKind};

/// Update rule applied to every learnable block:
///
/// ```text
///   v <- momentum * v + grad + weight_decay * param
///   param <- param - lr * v
/// ```
///
/// Blocks tagged [`ParamKind::RunningStat`] (batch-norm running statistics)
/// are never touched; they are maintained by the forward pass instead.
#[derive(Debug, Clone, Copy)]
pub struct Sgd {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
}

impl Sgd {
    pub fn new(lr: f64, momentum: f64, weight_decay: f64) -> Self {
        Self { lr, momentum, weight_decay }
    }

    /// Applies one update to each block and clears its gradient.
    pub fn step<'a, I>(&self, blocks: I)
    where
        I: IntoIterator<Item = &'a mut ParamBlock>,
    {
        for block in blocks {
            if block.kind == ParamKind::RunningStat {
                block.zero_grad();
                continue;
            }
            for i in 0..block.values.len() {
                let g = block.grad[i] + self.weight_decay * block.values[i];
                block.velocity[i] = self.momentum * block.velocity[i] + g;
                block.values[i] -= self.lr * block.velocity[i];
            }
            block.zero_grad();
        }
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl_converges_under_momentum() {
        // Minimize f(w) = w^2 / 2 from w = 1 with lr 0.1, momentum 0.9.
        let mut block = ParamBlock::learnable(vec![1.0]);
        let opt = Sgd::new(0.1, 0.9, 0.0);
        for _ in 0..200 {
            block.grad[0] = block.values[0];
            opt.step([&mut block]);
        }
        assert!(
            block.values[0].abs() < 1e-3,
            "after 200 momentum steps |w| = {} should be < 1e-3",
            block.values[0].abs()
        );
    }

    #[test]
    fn plain_step_without_momentum_or_decay() {
        let mut block = ParamBlock::learnable(vec![2.0, -1.0]);
        block.grad = vec![0.5, 0.25];
        Sgd::new(0.1, 0.0, 0.0).step([&mut block]);
        assert!((block.values[0] - 1.95).abs() < 1e-15);
        assert!((block.values[1] + 1.025).abs() < 1e-15);
        assert_eq!(block.grad, vec![0.0, 0.0], "step clears gradients");
    }

    #[test]
    fn weight_decay_pulls_toward_zero_with_zero_gradient() {
        let mut block = ParamBlock::learnable(vec![1.0]);
        block.grad = vec![0.0];
        Sgd::new(0.1, 0.0, 0.01).step([&mut block]);
        assert!((block.values[0] - (1.0 - 0.1 * 0.01)).abs() < 1e-15);
    }

    #[test]
    fn momentum_accumulates_velocity() {
        // Two steps with constant unit gradient: v1 = 1, v2 = 1.9.
        let mut block = ParamBlock::learnable(vec![0.0]);
        let opt = Sgd::new(1.0, 0.9, 0.0);
        block.grad = vec![1.0];
        opt.step([&mut block]);
        assert!((block.values[0] + 1.0).abs() < 1e-15);
        block.grad = vec![1.0];
        opt.step([&mut block]);
        assert!((block.values[0] + 2.9).abs() < 1e-15);
    }

    #[test]
    fn running_stats_are_left_alone() {
        let mut block = ParamBlock::running_stat(vec![5.0]);
        block.grad = vec![123.0];
        Sgd::new(0.1, 0.9, 1.0).step([&mut block]);
        assert_eq!(block.values, vec![5.0]);
        assert_eq!(block.grad, vec![0.0], "gradient is still cleared");
    }
}
