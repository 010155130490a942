//! SiLU (swish) activation.
//!
//! ```text
//!   silu(x)  = x * sigmoid(x)
//!   silu'(x) = sigmoid(x) * (1 + x * (1 - sigmoid(x)))
//! ```

use super::tensor::Tensor4;

#[inline(always)]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline(always)]
pub fn silu(x: f64) -> f64 {
    x * sigmoid(x)
}

#[inline(always)]
pub fn silu_grad(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}

/// Elementwise SiLU over a tensor.
pub fn silu_forward(x: &Tensor4) -> Tensor4 {
    let mut out = x.clone();
    out.values_mut().iter_mut().for_each(|v| *v = silu(*v));
    out
}

/// Input gradient of SiLU given the pre-activation input.
pub fn silu_backward(x: &Tensor4, grad_out: &Tensor4) -> Tensor4 {
    debug_assert_eq!(x.shape(), grad_out.shape());
    let mut grad_in = grad_out.clone();
    for (g, &v) in grad_in.values_mut().iter_mut().zip(x.values()) {
        *g *= silu_grad(v);
    }
    grad_in
}

/// Elementwise SiLU over a flat slice (used by the MLP head and SE block).
pub fn silu_slice(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| silu(v)).collect()
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silu_at_zero_is_zero() {
        assert_eq!(silu(0.0), 0.0);
    }

    #[test]
    fn silu_approaches_identity_for_large_inputs() {
        assert!((silu(10.0) - 10.0).abs() < 1e-3, "silu(10) = {}", silu(10.0));
        assert!(silu(-10.0).abs() < 1e-3);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let eps = 1e-6;
        for &x in &[-3.0, -0.7, 0.0, 0.4, 2.5] {
            let fd = (silu(x + eps) - silu(x - eps)) / (2.0 * eps);
            assert!((silu_grad(x) - fd).abs() < 1e-9, "at {x}: {} vs {fd}", silu_grad(x));
        }
    }

    #[test]
    fn tensor_forward_backward_are_elementwise() {
        let x = Tensor4::from_vec(1, 1, 1, 3, vec![-1.0, 0.0, 2.0]);
        let y = silu_forward(&x);
        assert_eq!(y.values()[1], 0.0);
        assert!((y.values()[2] - silu(2.0)).abs() < 1e-15);
        let ones = Tensor4::from_vec(1, 1, 1, 3, vec![1.0; 3]);
        let g = silu_backward(&x, &ones);
        for (i, &v) in x.values().iter().enumerate() {
            assert!((g.values()[i] - silu_grad(v)).abs() < 1e-15);
        }
    }
}
