//! Central finite-difference verification of every layer's backward pass.
//!
//! Each layer is wrapped in a scalar probe loss `L = Σ out ⊙ R` for a fixed
//! random tensor `R`, so the analytic gradient of `L` w.r.t. any value is the
//! backward pass evaluated with `grad_out = R`. The checker perturbs one
//! value at a time by ±1e-5 and compares `(L⁺ − L⁻) / 2ε` against the
//! analytic number with the relative error
//!
//! ```text
//!   rel = |analytic − numeric| / max(|analytic|, |numeric|, 1e-3)
//! ```
//!
//! For the *linear* layers (dense, conv, depthwise) the check draws inputs,
//! weights and probe coefficients from positive ranges bounded away from
//! zero. Central differences are exact for linear maps, so the only error is
//! floating-point cancellation — and keeping every gradient entry Ω(0.1)
//! keeps that noise orders of magnitude below the tolerances instead of being
//! amplified by the 1e-3 denominator floor. Index-arithmetic bugs (the actual
//! failure mode of a hand-written convolution backward) are sign-independent,
//! so positivity costs no coverage there.

use std::cell::RefCell;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::plane::Plane;
use crate::seed;

use super::batchnorm::BatchNorm2d;
use super::conv::{Conv2d, DepthwiseConv2d};
use super::dense::Dense;
use super::loss::softmax_cross_entropy;
use super::se::SqueezeExcitation;
use super::tensor::Tensor4;

const EPS: f64 = 1e-5;

/// Worst relative error between two gradient vectors.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len(), "gradient length mismatch");
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-3))
        .fold(0.0, f64::max)
}

/// Central-difference check of `analytic` against `loss` over `count` values
/// addressed through `get`/`set`. Returns the worst relative error.
pub fn check_values(
    count: usize,
    mut get: impl FnMut(usize) -> f64,
    mut set: impl FnMut(usize, f64),
    mut loss: impl FnMut() -> f64,
    analytic: &[f64],
) -> f64 {
    assert_eq!(analytic.len(), count, "analytic gradient length mismatch");
    let mut numeric = Vec::with_capacity(count);
    for i in 0..count {
        let v0 = get(i);
        set(i, v0 + EPS);
        let lp = loss();
        set(i, v0 - EPS);
        let lm = loss();
        set(i, v0);
        numeric.push((lp - lm) / (2.0 * EPS));
    }
    max_rel_err(analytic, &numeric)
}

/// Result row for one layer kind in the oracle suite.
#[derive(Debug, Clone)]
pub struct LayerCheck {
    pub name: &'static str,
    pub tolerance: f64,
    pub max_rel_err: f64,
    pub seeds: usize,
}

impl LayerCheck {
    pub fn passed(&self) -> bool {
        self.max_rel_err < self.tolerance
    }
}

/// Runs every layer check over `seeds` independent draws and reports the
/// worst error per layer kind.
pub fn run_layer_suite(master_seed: u64, seeds: usize) -> Vec<LayerCheck> {
    let worst = |f: &dyn Fn(u64) -> f64| {
        (0..seeds as u64).map(|i| f(seed::derive(master_seed, i))).fold(0.0, f64::max)
    };
    vec![
        LayerCheck { name: "dense", tolerance: 1e-9, max_rel_err: worst(&check_dense), seeds },
        LayerCheck { name: "conv2d", tolerance: 1e-6, max_rel_err: worst(&check_conv2d), seeds },
        LayerCheck {
            name: "depthwise_conv2d",
            tolerance: 1e-6,
            max_rel_err: worst(&check_depthwise),
            seeds,
        },
        LayerCheck {
            name: "batch_norm",
            tolerance: 1e-5,
            max_rel_err: worst(&check_batch_norm),
            seeds,
        },
        LayerCheck { name: "silu", tolerance: 1e-7, max_rel_err: worst(&check_silu), seeds },
        LayerCheck {
            name: "squeeze_excitation",
            tolerance: 1e-5,
            max_rel_err: worst(&check_squeeze_excitation),
            seeds,
        },
        LayerCheck {
            name: "softmax_cross_entropy",
            tolerance: 1e-7,
            max_rel_err: worst(&check_softmax_ce),
            seeds,
        },
    ]
}

// ---------------------------------------------------------------------------
// draw helpers
// ---------------------------------------------------------------------------

fn tensor_in(rng: &mut ChaCha8Rng, b: usize, c: usize, h: usize, w: usize, lo: f64, hi: f64) -> Tensor4 {
    Tensor4::from_vec(b, c, h, w, (0..b * c * h * w).map(|_| rng.random_range(lo..hi)).collect())
}

fn plane_in(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Plane {
    Plane::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------
// per-layer checks (each returns the worst relative error for one seed)
// ---------------------------------------------------------------------------

/// Dense layer on a 3x5 batch; linear, so the bound is pure rounding noise.
pub fn check_dense(seed: u64) -> f64 {
    let mut rng = seed::rng(seed, 0xD1);
    let mut layer = Dense::new(5, 4, &mut rng);
    for w in layer.weight.values.iter_mut() {
        *w = rng.random_range(0.3..1.0);
    }
    for b in layer.bias.values.iter_mut() {
        *b = rng.random_range(0.3..1.0);
    }
    let x = plane_in(&mut rng, 3, 5, 0.5, 1.5);
    let r = plane_in(&mut rng, 3, 4, 0.5, 1.5);

    let grad_in = layer.backward(&x, &r);
    let a_w = layer.weight.grad.clone();
    let a_b = layer.bias.grad.clone();
    layer.weight.zero_grad();
    layer.bias.zero_grad();

    let cell = RefCell::new((layer, x));
    let loss = || {
        let t = cell.borrow();
        dot(t.0.forward(&t.1).values(), r.values())
    };

    let e_w = check_values(
        a_w.len(),
        |i| cell.borrow().0.weight.values[i],
        |i, v| cell.borrow_mut().0.weight.values[i] = v,
        loss,
        &a_w,
    );
    let e_b = check_values(
        a_b.len(),
        |i| cell.borrow().0.bias.values[i],
        |i, v| cell.borrow_mut().0.bias.values[i] = v,
        loss,
        &a_b,
    );
    let e_x = check_values(
        grad_in.len(),
        |i| cell.borrow().1.values()[i],
        |i, v| cell.borrow_mut().1.values_mut()[i] = v,
        loss,
        grad_in.values(),
    );
    e_w.max(e_b).max(e_x)
}

/// Full convolution, 2x3x5x5 input, 3->4 channels, k3 s1 p1.
pub fn check_conv2d(seed: u64) -> f64 {
    let mut rng = seed::rng(seed, 0xC2);
    let mut layer = Conv2d::new(3, 4, 3, 1, 1, &mut rng);
    for w in layer.weight.values.iter_mut() {
        *w = rng.random_range(0.3..1.0);
    }
    let x = tensor_in(&mut rng, 2, 3, 5, 5, 0.5, 1.5);
    let (oh, ow) = layer.out_dims(5, 5).unwrap();
    let r = tensor_in(&mut rng, 2, 4, oh, ow, 0.5, 1.5);

    let grad_in = layer.backward(&x, &r);
    let a_w = layer.weight.grad.clone();
    layer.weight.zero_grad();

    let cell = RefCell::new((layer, x));
    let loss = || {
        let t = cell.borrow();
        dot(t.0.forward(&t.1).unwrap().values(), r.values())
    };

    let e_w = check_values(
        a_w.len(),
        |i| cell.borrow().0.weight.values[i],
        |i, v| cell.borrow_mut().0.weight.values[i] = v,
        loss,
        &a_w,
    );
    let e_x = check_values(
        grad_in.len(),
        |i| cell.borrow().1.values()[i],
        |i, v| cell.borrow_mut().1.values_mut()[i] = v,
        loss,
        grad_in.values(),
    );
    e_w.max(e_x)
}

/// Depthwise convolution, 2x3x5x5 input, k3 s1 p1.
pub fn check_depthwise(seed: u64) -> f64 {
    let mut rng = seed::rng(seed, 0xDC);
    let mut layer = DepthwiseConv2d::new(3, 3, 1, 1, &mut rng);
    for w in layer.weight.values.iter_mut() {
        *w = rng.random_range(0.3..1.0);
    }
    let x = tensor_in(&mut rng, 2, 3, 5, 5, 0.5, 1.5);
    let (oh, ow) = layer.out_dims(5, 5).unwrap();
    let r = tensor_in(&mut rng, 2, 3, oh, ow, 0.5, 1.5);

    let grad_in = layer.backward(&x, &r);
    let a_w = layer.weight.grad.clone();
    layer.weight.zero_grad();

    let cell = RefCell::new((layer, x));
    let loss = || {
        let t = cell.borrow();
        dot(t.0.forward(&t.1).unwrap().values(), r.values())
    };

    let e_w = check_values(
        a_w.len(),
        |i| cell.borrow().0.weight.values[i],
        |i, v| cell.borrow_mut().0.weight.values[i] = v,
        loss,
        &a_w,
    );
    let e_x = check_values(
        grad_in.len(),
        |i| cell.borrow().1.values()[i],
        |i, v| cell.borrow_mut().1.values_mut()[i] = v,
        loss,
        grad_in.values(),
    );
    e_w.max(e_x)
}

/// Batch norm in train mode on a 4x3x2x2 batch: input, scale and shift.
pub fn check_batch_norm(seed: u64) -> f64 {
    let mut rng = seed::rng(seed, 0xB4);
    let mut layer = BatchNorm2d::new(3);
    for g in layer.gamma.values.iter_mut() {
        *g = rng.random_range(0.5..1.5);
    }
    for b in layer.beta.values.iter_mut() {
        *b = rng.random_range(-0.5..0.5);
    }
    let x = tensor_in(&mut rng, 4, 3, 2, 2, -1.0, 1.0);
    let r = tensor_in(&mut rng, 4, 3, 2, 2, -1.0, 1.0);

    let (_, cache) = layer.forward_train(&x).unwrap();
    let grad_in = layer.backward(&cache, &r);
    let a_g = layer.gamma.grad.clone();
    let a_b = layer.beta.grad.clone();
    layer.gamma.zero_grad();
    layer.beta.zero_grad();

    let cell = RefCell::new((layer, x));
    let loss = || {
        let mut t = cell.borrow_mut();
        let (layer, x) = &mut *t;
        let (out, _) = layer.forward_train(x).unwrap();
        dot(out.values(), r.values())
    };

    let e_g = check_values(
        a_g.len(),
        |i| cell.borrow().0.gamma.values[i],
        |i, v| cell.borrow_mut().0.gamma.values[i] = v,
        loss,
        &a_g,
    );
    let e_b = check_values(
        a_b.len(),
        |i| cell.borrow().0.beta.values[i],
        |i, v| cell.borrow_mut().0.beta.values[i] = v,
        loss,
        &a_b,
    );
    let e_x = check_values(
        grad_in.len(),
        |i| cell.borrow().1.values()[i],
        |i, v| cell.borrow_mut().1.values_mut()[i] = v,
        loss,
        grad_in.values(),
    );
    e_g.max(e_b).max(e_x)
}

/// Elementwise SiLU on six values drawn from both monotonic regions.
///
/// The tensor is kept tiny and the draw bands avoid the derivative's zero
/// crossing near x = -1.28, so no gradient entry falls under the relative
/// error floor where rounding noise would dominate a 1e-7 budget.
pub fn check_silu(seed: u64) -> f64 {
    let mut rng = seed::rng(seed, 0x51);
    let mut vals = Vec::with_capacity(6);
    for i in 0..6 {
        vals.push(if i % 2 == 0 {
            rng.random_range(-3.5..-2.5)
        } else {
            rng.random_range(-0.5..2.0)
        });
    }
    let x = Tensor4::from_vec(1, 1, 2, 3, vals);
    let r = tensor_in(&mut rng, 1, 1, 2, 3, 0.5, 1.5);

    let grad_in = super::activation::silu_backward(&x, &r);

    let cell = RefCell::new(x);
    let loss = || dot(super::activation::silu_forward(&cell.borrow()).values(), r.values());
    check_values(
        grad_in.len(),
        |i| cell.borrow().values()[i],
        |i, v| cell.borrow_mut().values_mut()[i] = v,
        loss,
        grad_in.values(),
    )
}

/// Squeeze-excitation on 2x4x3x3 with reduction 4: input and both
/// bottleneck projections.
pub fn check_squeeze_excitation(seed: u64) -> f64 {
    let mut rng = seed::rng(seed, 0x5E);
    let mut layer = SqueezeExcitation::new(4, 4, &mut rng);
    let x = tensor_in(&mut rng, 2, 4, 3, 3, -1.0, 1.0);
    let r = tensor_in(&mut rng, 2, 4, 3, 3, -1.0, 1.0);

    let (_, cache) = layer.forward(&x).unwrap();
    let grad_in = layer.backward(&x, &cache, &r);
    let a_params: Vec<Vec<f64>> = layer.param_blocks().into_iter().map(|b| {
        let g = b.grad.clone();
        b.zero_grad();
        g
    }).collect();

    let cell = RefCell::new((layer, x));
    let loss = || {
        let t = cell.borrow();
        let (out, _) = t.0.forward(&t.1).unwrap();
        dot(out.values(), r.values())
    };

    let mut worst: f64 = 0.0;
    for (bi, analytic) in a_params.iter().enumerate() {
        let err = check_values(
            analytic.len(),
            |i| cell.borrow_mut().0.param_blocks()[bi].values[i],
            |i, v| cell.borrow_mut().0.param_blocks()[bi].values[i] = v,
            loss,
            analytic,
        );
        worst = worst.max(err);
    }
    let e_x = check_values(
        grad_in.len(),
        |i| cell.borrow().1.values()[i],
        |i, v| cell.borrow_mut().1.values_mut()[i] = v,
        loss,
        grad_in.values(),
    );
    worst.max(e_x)
}

/// Softmax cross-entropy on 3x4 logits; the loss is already scalar so the
/// probe projection is the identity.
pub fn check_softmax_ce(seed: u64) -> f64 {
    let mut rng = seed::rng(seed, 0xCE);
    let logits = plane_in(&mut rng, 3, 4, -1.0, 1.0);
    let labels: Vec<usize> = (0..3).map(|_| rng.random_range(0..4)).collect();

    let (_, grad) = softmax_cross_entropy(&logits, &labels).unwrap();

    let cell = RefCell::new(logits);
    let loss = || softmax_cross_entropy(&cell.borrow(), &labels).unwrap().0;
    check_values(
        grad.len(),
        |i| cell.borrow().values()[i],
        |i, v| cell.borrow_mut().values_mut()[i] = v,
        loss,
        grad.values(),
    )
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
