//! One feature-extraction branch: stem convolution, mobile
//! inverted-bottleneck stages, global average pooling.

use rand_chacha::ChaCha8Rng;

use crate::nn::activation::{silu_backward, silu_forward, silu_grad};
use crate::nn::batchnorm::{BatchNorm2d, BnCache};
use crate::nn::conv::{Conv2d, DepthwiseConv2d};
use crate::nn::param::ParamBlock;
use crate::nn::se::{SeCache, SqueezeExcitation};
use crate::nn::tensor::Tensor4;
use crate::plane::Plane;

use super::{BranchSpec, ModelError};

// ---------------------------------------------------------------------------
// MBConv block
// ---------------------------------------------------------------------------

/// Mobile inverted bottleneck:
///
/// ```text
///   expand 1x1 -> BN -> SiLU -> depthwise kxk -> BN -> SiLU
///     -> squeeze-excitation -> project 1x1 -> BN  (+ input if same shape)
/// ```
///
/// The expansion convolution is present even at ratio 1, so every block has
/// the same parameter layout.
#[derive(Debug, Clone)]
pub struct MbConvBlock {
    pub expand: Conv2d,
    pub bn0: BatchNorm2d,
    pub depthwise: DepthwiseConv2d,
    pub bn1: BatchNorm2d,
    pub se: SqueezeExcitation,
    pub project: Conv2d,
    pub bn2: BatchNorm2d,
    pub residual: bool,
}

/// Forward intermediates for one block's backward pass.
#[derive(Debug)]
pub struct MbConvCache {
    /// Block input.
    x: Tensor4,
    bn0: BnCache,
    /// First BN output (SiLU pre-activation).
    act0: Tensor4,
    /// Depthwise input, silu(act0).
    dw_in: Tensor4,
    bn1: BnCache,
    /// Second BN output (SiLU pre-activation).
    act1: Tensor4,
    /// Squeeze-excitation input, silu(act1).
    se_in: Tensor4,
    se: SeCache,
    /// Projection input, the gated tensor.
    proj_in: Tensor4,
    bn2: BnCache,
}

impl MbConvBlock {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        expansion: usize,
        kernel: usize,
        stride: usize,
        se_reduction: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let expanded = in_channels * expansion;
        Self {
            expand: Conv2d::new(in_channels, expanded, 1, 1, 0, rng),
            bn0: BatchNorm2d::new(expanded),
            depthwise: DepthwiseConv2d::new(expanded, kernel, stride, kernel / 2, rng),
            bn1: BatchNorm2d::new(expanded),
            se: SqueezeExcitation::new(expanded, se_reduction, rng),
            project: Conv2d::new(expanded, out_channels, 1, 1, 0, rng),
            bn2: BatchNorm2d::new(out_channels),
            residual: stride == 1 && in_channels == out_channels,
        }
    }

    pub fn out_dims(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        self.depthwise.out_dims(h, w)
    }

    /// Train-mode forward with batch statistics; batch size is validated by
    /// the caller once per model pass.
    pub(crate) fn forward_train(&mut self, x: &Tensor4) -> Result<(Tensor4, MbConvCache), ModelError> {
        let expanded = self.expand.forward(x)?;
        let (bn0_out, bn0) = self.bn0.forward_train_unchecked(&expanded)?;
        let dw_in = silu_forward(&bn0_out);
        let dw_out = self.depthwise.forward(&dw_in)?;
        let (bn1_out, bn1) = self.bn1.forward_train_unchecked(&dw_out)?;
        let se_in = silu_forward(&bn1_out);
        let (gated, se) = self.se.forward(&se_in)?;
        let projected = self.project.forward(&gated)?;
        let (mut out, bn2) = self.bn2.forward_train_unchecked(&projected)?;
        if self.residual {
            for (o, &v) in out.values_mut().iter_mut().zip(x.values()) {
                *o += v;
            }
        }
        let cache = MbConvCache {
            x: x.clone(),
            bn0,
            act0: bn0_out,
            dw_in,
            bn1,
            act1: bn1_out,
            se_in,
            se,
            proj_in: gated,
            bn2,
        };
        Ok((out, cache))
    }

    pub fn forward_eval(&self, x: &Tensor4) -> Result<Tensor4, ModelError> {
        let expanded = self.expand.forward(x)?;
        let dw_in = silu_forward(&self.bn0.forward_eval(&expanded)?);
        let dw_out = self.depthwise.forward(&dw_in)?;
        let se_in = silu_forward(&self.bn1.forward_eval(&dw_out)?);
        let (gated, _) = self.se.forward(&se_in)?;
        let mut out = self.bn2.forward_eval(&self.project.forward(&gated)?)?;
        if self.residual {
            for (o, &v) in out.values_mut().iter_mut().zip(x.values()) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, cache: &MbConvCache, grad_out: &Tensor4) -> Tensor4 {
        let g = self.bn2.backward(&cache.bn2, grad_out);
        let g = self.project.backward(&cache.proj_in, &g);
        let g = self.se.backward(&cache.se_in, &cache.se, &g);
        let g = silu_backward(&cache.act1, &g);
        let g = self.bn1.backward(&cache.bn1, &g);
        let g = self.depthwise.backward(&cache.dw_in, &g);
        let g = silu_backward(&cache.act0, &g);
        let g = self.bn0.backward(&cache.bn0, &g);
        let mut grad_in = self.expand.backward(&cache.x, &g);
        if self.residual {
            for (gi, &go) in grad_in.values_mut().iter_mut().zip(grad_out.values()) {
                *gi += go;
            }
        }
        grad_in
    }

    pub fn param_blocks(&mut self) -> Vec<&mut ParamBlock> {
        let mut blocks = self.expand.param_blocks();
        blocks.extend(self.bn0.param_blocks());
        blocks.extend(self.depthwise.param_blocks());
        blocks.extend(self.bn1.param_blocks());
        blocks.extend(self.se.param_blocks());
        blocks.extend(self.project.param_blocks());
        blocks.extend(self.bn2.param_blocks());
        blocks
    }
}

// ---------------------------------------------------------------------------
// branch
// ---------------------------------------------------------------------------

/// Stem + MBConv stages + global average pool over one single-channel plane.
#[derive(Debug, Clone)]
pub struct Branch {
    pub stem: Conv2d,
    pub stem_bn: BatchNorm2d,
    pub blocks: Vec<MbConvBlock>,
    /// Input plane shape this branch was built for.
    pub input_dims: (usize, usize),
    /// Feature-map shape entering the global average pool.
    pub final_dims: (usize, usize),
    pub out_features: usize,
}

/// Forward intermediates for the branch backward pass.
#[derive(Debug)]
pub struct BranchCache {
    x: Tensor4,
    stem_bn: BnCache,
    /// Stem BN output (SiLU pre-activation).
    stem_act: Tensor4,
    /// Inputs consumed by each block are stored inside the block caches.
    blocks: Vec<MbConvCache>,
}

impl Branch {
    /// Builds a branch for `rows x cols` single-channel inputs, drawing all
    /// weights from `rng` in declaration order.
    pub fn new(
        spec: &BranchSpec,
        rows: usize,
        cols: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, ModelError> {
        spec.validate()?;
        let stem = Conv2d::new(1, spec.stem_channels, 3, 2, 1, rng);
        let (mut h, mut w) = stem.out_dims(rows, cols).ok_or(ModelError::SpatialUnderflow {
            context: "stem".into(),
            h: rows,
            w: cols,
        })?;
        let mut blocks = Vec::new();
        let mut channels = spec.stem_channels;
        for (si, stage) in spec.stages.iter().enumerate() {
            for rep in 0..stage.repeats {
                let stride = if rep == 0 { stage.stride } else { 1 };
                let block = MbConvBlock::new(
                    channels,
                    stage.out_channels,
                    stage.expansion,
                    stage.kernel,
                    stride,
                    spec.se_reduction,
                    rng,
                );
                let (nh, nw) = block.out_dims(h, w).unwrap_or((0, 0));
                if nh == 0 || nw == 0 {
                    return Err(ModelError::SpatialUnderflow {
                        context: format!("stage {si} block {rep}"),
                        h: nh,
                        w: nw,
                    });
                }
                (h, w) = (nh, nw);
                channels = stage.out_channels;
                blocks.push(block);
            }
        }
        Ok(Self {
            stem,
            stem_bn: BatchNorm2d::new(spec.stem_channels),
            blocks,
            input_dims: (rows, cols),
            final_dims: (h, w),
            out_features: channels,
        })
    }

    fn check_input(&self, x: &Tensor4) -> Result<(), ModelError> {
        if (x.height, x.width) != self.input_dims || x.channels != 1 {
            return Err(ModelError::InputDims {
                rows: self.input_dims.0,
                cols: self.input_dims.1,
                got_rows: x.height,
                got_cols: x.width,
            });
        }
        Ok(())
    }

    /// Train-mode forward producing one pooled feature row per sample.
    pub(crate) fn forward_train(&mut self, x: &Tensor4) -> Result<(Plane, BranchCache), ModelError> {
        self.check_input(x)?;
        let stem_out = self.stem.forward(x)?;
        let (stem_act, stem_bn) = self.stem_bn.forward_train_unchecked(&stem_out)?;
        let mut cur = silu_forward(&stem_act);
        let mut block_caches = Vec::with_capacity(self.blocks.len());
        for block in &mut self.blocks {
            let (next, cache) = block.forward_train(&cur)?;
            block_caches.push(cache);
            cur = next;
        }
        let features = global_average_pool(&cur);
        let cache = BranchCache { x: x.clone(), stem_bn, stem_act, blocks: block_caches };
        Ok((features, cache))
    }

    pub fn forward_eval(&self, x: &Tensor4) -> Result<Plane, ModelError> {
        self.check_input(x)?;
        let mut cur = silu_forward(&self.stem_bn.forward_eval(&self.stem.forward(x)?)?);
        for block in &self.blocks {
            cur = block.forward_eval(&cur)?;
        }
        Ok(global_average_pool(&cur))
    }

    /// Backward from pooled-feature gradients; accumulates parameter
    /// gradients and returns the input-plane gradient.
    pub fn backward(&mut self, cache: &BranchCache, grad_features: &Plane) -> Tensor4 {
        let (h, w) = self.final_dims;
        let mut g = Tensor4::zeros(grad_features.rows(), self.out_features, h, w);
        let spread = 1.0 / (h * w) as f64;
        for b in 0..g.batch {
            for c in 0..g.channels {
                let gf = grad_features.get(b, c) * spread;
                for v in g.plane_mut(b, c) {
                    *v = gf;
                }
            }
        }
        for (block, bc) in self.blocks.iter_mut().zip(&cache.blocks).rev() {
            g = block.backward(bc, &g);
        }
        let g = silu_backward(&cache.stem_act, &g);
        let g = self.stem_bn.backward(&cache.stem_bn, &g);
        self.stem.backward(&cache.x, &g)
    }

    pub fn param_blocks(&mut self) -> Vec<&mut ParamBlock> {
        let mut blocks = self.stem.param_blocks();
        blocks.extend(self.stem_bn.param_blocks());
        for b in &mut self.blocks {
            blocks.extend(b.param_blocks());
        }
        blocks
    }
}

/// Per-channel spatial mean: `batch x channels x h x w` -> `batch x channels`.
pub fn global_average_pool(x: &Tensor4) -> Plane {
    let inv = 1.0 / (x.height * x.width) as f64;
    let mut out = Plane::zeros(x.batch, x.channels);
    for b in 0..x.batch {
        for c in 0..x.channels {
            let sum: f64 = x.plane(b, c).iter().sum();
            out.set(b, c, sum * inv);
        }
    }
    out
}

/// SiLU derivative applied entrywise to a plane of pre-activations.
pub(crate) fn silu_backward_plane(pre: &Plane, grad_out: &Plane) -> Plane {
    let mut out = grad_out.clone();
    for (g, &z) in out.values_mut().iter_mut().zip(pre.values()) {
        *g *= silu_grad(z);
    }
    out
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::super::StageSpec;
    use super::*;
    use crate::seed;

    #[test]
    fn desk_branch_traces_to_forty_features_on_desk_planes() {
        let spec = BranchSpec::desk_default();
        let branch = Branch::new(&spec, 64, 32, &mut seed::rng(0, 7)).unwrap();
        assert_eq!(branch.out_features, 40);
        // 64x32 -> stem/2 32x16 -> stage2 /2 16x8 -> stage3 /2 8x4.
        assert_eq!(branch.final_dims, (8, 4));

        let x = Tensor4::zeros(2, 1, 64, 32);
        let feats = branch.forward_eval(&x).unwrap();
        assert_eq!((feats.rows(), feats.cols()), (2, 40));
    }

    #[test]
    fn stem_halves_spatial_dims() {
        let spec = BranchSpec::tiny();
        let branch = Branch::new(&spec, 8, 8, &mut seed::rng(0, 8)).unwrap();
        assert_eq!(branch.stem.out_dims(8, 8), Some((4, 4)));
        assert_eq!(branch.final_dims, (2, 2));
    }

    #[test]
    fn rebuilding_with_same_seed_is_identical() {
        let spec = BranchSpec::desk_default();
        let a = Branch::new(&spec, 16, 32, &mut seed::rng(42, 9)).unwrap();
        let b = Branch::new(&spec, 16, 32, &mut seed::rng(42, 9)).unwrap();
        assert_eq!(a.stem.weight.values, b.stem.weight.values);
        assert_eq!(
            a.blocks[3].se.fc1.weight.values,
            b.blocks[3].se.fc1.weight.values
        );
        let c = Branch::new(&spec, 16, 32, &mut seed::rng(43, 9)).unwrap();
        assert_ne!(a.stem.weight.values, c.stem.weight.values);
    }

    /// With odd kernels and `k/2` padding every layer maps `h >= 1` to
    /// `(h-1)/stride + 1 >= 1`, so deep stacks saturate at 1x1 instead of
    /// underflowing; only zero-sized inputs are rejected.
    #[test]
    fn deep_spec_saturates_at_one_by_one_and_zero_input_is_rejected() {
        let spec = BranchSpec {
            stem_channels: 4,
            stages: vec![
                StageSpec { expansion: 1, kernel: 3, stride: 2, out_channels: 4, repeats: 1 },
                StageSpec { expansion: 1, kernel: 3, stride: 2, out_channels: 4, repeats: 1 },
                StageSpec { expansion: 1, kernel: 7, stride: 2, out_channels: 4, repeats: 1 },
            ],
            se_reduction: 4,
        };
        let branch = Branch::new(&spec, 8, 8, &mut seed::rng(0, 10)).unwrap();
        assert_eq!(branch.final_dims, (1, 1));
        let x = Tensor4::from_vec(1, 1, 8, 8, vec![0.25; 64]);
        let features = branch.forward_eval(&x).unwrap();
        assert_eq!((features.rows(), features.cols()), (1, 4));
        assert!(features.values().iter().all(|v| v.is_finite()));

        assert!(matches!(
            Branch::new(&spec, 0, 8, &mut seed::rng(0, 10)),
            Err(ModelError::SpatialUnderflow { .. })
        ));
    }

    #[test]
    fn residual_blocks_only_where_shape_is_preserved() {
        let spec = BranchSpec::desk_default();
        let branch = Branch::new(&spec, 64, 32, &mut seed::rng(0, 11)).unwrap();
        // Stage 1: stride 1, 16 -> 16: residual.
        assert!(branch.blocks[0].residual);
        // Stage 2 first block: stride 2, 16 -> 24: no residual.
        assert!(!branch.blocks[1].residual);
        // Stage 2 second block: stride 1, 24 -> 24: residual.
        assert!(branch.blocks[2].residual);
        assert!(!branch.blocks[3].residual);
        assert!(branch.blocks[4].residual);
    }

    #[test]
    fn global_average_pool_is_the_plane_mean() {
        let x = Tensor4::from_vec(1, 2, 2, 2, vec![1.0, 2.0, 3.0, 4.0, 10.0, 10.0, 10.0, 10.0]);
        let p = global_average_pool(&x);
        assert_eq!(p.get(0, 0), 2.5);
        assert_eq!(p.get(0, 1), 10.0);
    }
}
