//! Standard and depthwise 2D convolutions (cross-correlation convention).
//!
//! Both layers use zero padding, square kernels, no bias (batch norm always
//! follows), and produce output dims
//!
//! ```text
//!   OH = floor((H + 2 * padding - k) / stride) + 1   (same for OW)
//! ```
//!
//! The inner loops are arranged so the stride-1 case reduces to contiguous
//! `axpy`/dot operations over rows, which the compiler vectorizes; that path
//! carries most of the training cost.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::param::ParamBlock;
use super::tensor::Tensor4;
use super::NnError;

/// Row range of the output so that `oh * stride + kh - padding` stays in
/// `[0, limit)`.
#[inline]
fn valid_out_range(out_len: usize, stride: usize, offset: isize, limit: usize) -> (usize, usize) {
    // offset = kh - padding; input index = oh * stride + offset.
    let lo = if offset < 0 { ((-offset) as usize).div_ceil(stride) } else { 0 };
    let max_in = limit as isize - 1 - offset;
    if max_in < 0 {
        return (0, 0);
    }
    let hi = (max_in as usize / stride + 1).min(out_len);
    (lo.min(hi), hi)
}

/// Splits a stride-1 row pair into aligned overlapping slices.
#[inline]
fn overlap(out_len: usize, in_len: usize, offset: isize) -> (usize, usize, usize) {
    // Returns (out_start, in_start, len) with in = out + offset elementwise.
    if offset >= 0 {
        let in_start = offset as usize;
        let len = out_len.min(in_len.saturating_sub(in_start));
        (0, in_start, len)
    } else {
        let out_start = (-offset) as usize;
        let len = in_len.min(out_len.saturating_sub(out_start));
        (out_start, 0, len)
    }
}

fn he_weights(rng: &mut ChaCha8Rng, count: usize, fan_in: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("valid std");
    (0..count).map(|_| normal.sample(rng)).collect()
}

// ---------------------------------------------------------------------------
// full convolution
// ---------------------------------------------------------------------------

/// 2D convolution mixing all input channels into each output channel.
#[derive(Debug, Clone)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
    /// `out_channels x in_channels x kernel x kernel`, He-initialized.
    pub weight: ParamBlock,
}

impl Conv2d {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        assert!(stride >= 1, "stride must be >= 1");
        let count = out_channels * in_channels * kernel * kernel;
        let weight = ParamBlock::learnable(he_weights(rng, count, in_channels * kernel * kernel));
        Self { in_channels, out_channels, kernel, stride, padding, weight }
    }

    /// Output spatial dims for an `h x w` input, if positive.
    pub fn out_dims(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let oh = (h + 2 * self.padding).checked_sub(self.kernel)? / self.stride + 1;
        let ow = (w + 2 * self.padding).checked_sub(self.kernel)? / self.stride + 1;
        Some((oh, ow))
    }

    pub fn forward(&self, x: &Tensor4) -> Result<Tensor4, NnError> {
        if x.channels != self.in_channels {
            return Err(NnError::ShapeMismatch(format!(
                "conv2d expects {} input channels, got {}",
                self.in_channels, x.channels
            )));
        }
        let (oh, ow) = self.out_dims(x.height, x.width).ok_or_else(|| {
            NnError::ShapeMismatch(format!(
                "conv2d kernel {} does not fit {}x{} input",
                self.kernel, x.height, x.width
            ))
        })?;
        let mut out = Tensor4::zeros(x.batch, self.out_channels, oh, ow);
        let k = self.kernel;
        let (s, p) = (self.stride, self.padding as isize);
        let (h, w) = (x.height, x.width);

        for b in 0..x.batch {
            for oc in 0..self.out_channels {
                let out_plane = out.plane_mut(b, oc);
                for ic in 0..self.in_channels {
                    let x_plane = x.plane(b, ic);
                    let w_base = (oc * self.in_channels + ic) * k * k;
                    for kh in 0..k {
                        let dy = kh as isize - p;
                        let (oh_lo, oh_hi) = valid_out_range(oh, s, dy, h);
                        for kw in 0..k {
                            let weight = self.weight.values[w_base + kh * k + kw];
                            let dx = kw as isize - p;
                            for oy in oh_lo..oh_hi {
                                let iy = (oy as isize * s as isize + dy) as usize;
                                let row_in = &x_plane[iy * w..iy * w + w];
                                let row_out = &mut out_plane[oy * ow..oy * ow + ow];
                                if s == 1 {
                                    let (os, is, len) = overlap(ow, w, dx);
                                    for (o, i) in row_out[os..os + len]
                                        .iter_mut()
                                        .zip(&row_in[is..is + len])
                                    {
                                        *o += weight * i;
                                    }
                                } else {
                                    for (ox, o) in row_out.iter_mut().enumerate() {
                                        let ix = ox as isize * s as isize + dx;
                                        if ix >= 0 && (ix as usize) < w {
                                            *o += weight * row_in[ix as usize];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Accumulates the weight gradient and returns the input gradient.
    pub fn backward(&mut self, x: &Tensor4, grad_out: &Tensor4) -> Tensor4 {
        let (oh, ow) = (grad_out.height, grad_out.width);
        let k = self.kernel;
        let (s, p) = (self.stride, self.padding as isize);
        let (h, w) = (x.height, x.width);
        let mut grad_in = Tensor4::zeros_like(x);

        for b in 0..x.batch {
            for oc in 0..self.out_channels {
                let g_plane = grad_out.plane(b, oc);
                for ic in 0..self.in_channels {
                    let x_plane = x.plane(b, ic);
                    let gi_plane = grad_in.plane_mut(b, ic);
                    let w_base = (oc * self.in_channels + ic) * k * k;
                    for kh in 0..k {
                        let dy = kh as isize - p;
                        let (oh_lo, oh_hi) = valid_out_range(oh, s, dy, h);
                        for kw in 0..k {
                            let idx = w_base + kh * k + kw;
                            let weight = self.weight.values[idx];
                            let dx = kw as isize - p;
                            let mut acc = 0.0;
                            for oy in oh_lo..oh_hi {
                                let iy = (oy as isize * s as isize + dy) as usize;
                                let row_x = &x_plane[iy * w..iy * w + w];
                                let row_gi = &mut gi_plane[iy * w..iy * w + w];
                                let row_g = &g_plane[oy * ow..oy * ow + ow];
                                if s == 1 {
                                    let (os, is, len) = overlap(ow, w, dx);
                                    for (g, xi) in
                                        row_g[os..os + len].iter().zip(&row_x[is..is + len])
                                    {
                                        acc += g * xi;
                                    }
                                    for (g, gi) in
                                        row_g[os..os + len].iter().zip(&mut row_gi[is..is + len])
                                    {
                                        *gi += weight * g;
                                    }
                                } else {
                                    for (ox, g) in row_g.iter().enumerate() {
                                        let ix = ox as isize * s as isize + dx;
                                        if ix >= 0 && (ix as usize) < w {
                                            acc += g * row_x[ix as usize];
                                            row_gi[ix as usize] += weight * g;
                                        }
                                    }
                                }
                            }
                            self.weight.grad[idx] += acc;
                        }
                    }
                }
            }
        }
        grad_in
    }

    pub fn param_blocks(&mut self) -> Vec<&mut ParamBlock> {
        vec![&mut self.weight]
    }
}

// ---------------------------------------------------------------------------
// depthwise convolution
// ---------------------------------------------------------------------------

/// Per-channel spatial convolution with no cross-channel mixing.
#[derive(Debug, Clone)]
pub struct DepthwiseConv2d {
    pub channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
    /// `channels x kernel x kernel`, He-initialized with fan-in `k * k`.
    pub weight: ParamBlock,
}

impl DepthwiseConv2d {
    pub fn new(
        channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        assert!(stride >= 1, "stride must be >= 1");
        let count = channels * kernel * kernel;
        let weight = ParamBlock::learnable(he_weights(rng, count, kernel * kernel));
        Self { channels, kernel, stride, padding, weight }
    }

    pub fn out_dims(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let oh = (h + 2 * self.padding).checked_sub(self.kernel)? / self.stride + 1;
        let ow = (w + 2 * self.padding).checked_sub(self.kernel)? / self.stride + 1;
        Some((oh, ow))
    }

    pub fn forward(&self, x: &Tensor4) -> Result<Tensor4, NnError> {
        if x.channels != self.channels {
            return Err(NnError::ShapeMismatch(format!(
                "depthwise conv expects {} channels, got {}",
                self.channels, x.channels
            )));
        }
        let (oh, ow) = self.out_dims(x.height, x.width).ok_or_else(|| {
            NnError::ShapeMismatch(format!(
                "depthwise kernel {} does not fit {}x{} input",
                self.kernel, x.height, x.width
            ))
        })?;
        let mut out = Tensor4::zeros(x.batch, self.channels, oh, ow);
        let k = self.kernel;
        let (s, p) = (self.stride, self.padding as isize);
        let (h, w) = (x.height, x.width);

        for b in 0..x.batch {
            for c in 0..self.channels {
                let x_plane = x.plane(b, c);
                let out_plane = out.plane_mut(b, c);
                let w_base = c * k * k;
                for kh in 0..k {
                    let dy = kh as isize - p;
                    let (oh_lo, oh_hi) = valid_out_range(oh, s, dy, h);
                    for kw in 0..k {
                        let weight = self.weight.values[w_base + kh * k + kw];
                        let dx = kw as isize - p;
                        for oy in oh_lo..oh_hi {
                            let iy = (oy as isize * s as isize + dy) as usize;
                            let row_in = &x_plane[iy * w..iy * w + w];
                            let row_out = &mut out_plane[oy * ow..oy * ow + ow];
                            if s == 1 {
                                let (os, is, len) = overlap(ow, w, dx);
                                for (o, i) in
                                    row_out[os..os + len].iter_mut().zip(&row_in[is..is + len])
                                {
                                    *o += weight * i;
                                }
                            } else {
                                for (ox, o) in row_out.iter_mut().enumerate() {
                                    let ix = ox as isize * s as isize + dx;
                                    if ix >= 0 && (ix as usize) < w {
                                        *o += weight * row_in[ix as usize];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn backward(&mut self, x: &Tensor4, grad_out: &Tensor4) -> Tensor4 {
        let (oh, ow) = (grad_out.height, grad_out.width);
        let k = self.kernel;
        let (s, p) = (self.stride, self.padding as isize);
        let (h, w) = (x.height, x.width);
        let mut grad_in = Tensor4::zeros_like(x);

        for b in 0..x.batch {
            for c in 0..self.channels {
                let x_plane = x.plane(b, c);
                let g_plane = grad_out.plane(b, c);
                let gi_plane = grad_in.plane_mut(b, c);
                let w_base = c * k * k;
                for kh in 0..k {
                    let dy = kh as isize - p;
                    let (oh_lo, oh_hi) = valid_out_range(oh, s, dy, h);
                    for kw in 0..k {
                        let idx = w_base + kh * k + kw;
                        let weight = self.weight.values[idx];
                        let dx = kw as isize - p;
                        let mut acc = 0.0;
                        for oy in oh_lo..oh_hi {
                            let iy = (oy as isize * s as isize + dy) as usize;
                            let row_x = &x_plane[iy * w..iy * w + w];
                            let row_gi = &mut gi_plane[iy * w..iy * w + w];
                            let row_g = &g_plane[oy * ow..oy * ow + ow];
                            if s == 1 {
                                let (os, is, len) = overlap(ow, w, dx);
                                for (g, xi) in row_g[os..os + len].iter().zip(&row_x[is..is + len])
                                {
                                    acc += g * xi;
                                }
                                for (g, gi) in
                                    row_g[os..os + len].iter().zip(&mut row_gi[is..is + len])
                                {
                                    *gi += weight * g;
                                }
                            } else {
                                for (ox, g) in row_g.iter().enumerate() {
                                    let ix = ox as isize * s as isize + dx;
                                    if ix >= 0 && (ix as usize) < w {
                                        acc += g * row_x[ix as usize];
                                        row_gi[ix as usize] += weight * g;
                                    }
                                }
                            }
                        }
                        self.weight.grad[idx] += acc;
                    }
                }
            }
        }
        grad_in
    }

    pub fn param_blocks(&mut self) -> Vec<&mut ParamBlock> {
        vec![&mut self.weight]
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
