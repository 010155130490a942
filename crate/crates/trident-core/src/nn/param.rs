//! Parameter storage shared by all layers.

/// How a block participates in training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// Updated by the optimizer from its gradient.
    Learnable,
    /// Batch-norm running statistics: serialized with the model and updated
    /// by the forward pass itself, never by the optimizer.
    RunningStat,
}

/// A flat parameter array with its gradient accumulator and SGD velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBlock {
    pub values: Vec<f64>,
    pub grad: Vec<f64>,
    pub velocity: Vec<f64>,
    pub kind: ParamKind,
}

impl ParamBlock {
    pub fn learnable(values: Vec<f64>) -> Self {
        let n = values.len();
        Self { values, grad: vec![0.0; n], velocity: vec![0.0; n], kind: ParamKind::Learnable }
    }

    pub fn running_stat(values: Vec<f64>) -> Self {
        let n = values.len();
        Self { values, grad: vec![0.0; n], velocity: vec![0.0; n], kind: ParamKind::RunningStat }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_allocate_matching_buffers() {
        let block = ParamBlock::learnable(vec![1.0, 2.0, 3.0]);
        assert_eq!(block.len(), 3);
        assert_eq!(block.grad, vec![0.0; 3]);
        assert_eq!(block.velocity, vec![0.0; 3]);
        assert_eq!(block.kind, ParamKind::Learnable);
    }

    #[test]
    fn zero_grad_clears_only_gradients() {
        let mut block = ParamBlock::learnable(vec![1.0]);
        block.grad[0] = 5.0;
        block.velocity[0] = 2.0;
        block.zero_grad();
        assert_eq!(block.grad[0], 0.0);
        assert_eq!(block.velocity[0], 2.0);
        assert_eq!(block.values[0], 1.0);
    }
}
