//! Batched 4D tensor in NCHW layout.

/// Dense `batch x channels x height x width` array of `f64`, row-major with
/// width fastest: element `(b, c, y, x)` lives at
/// `((b * C + c) * H + y) * W + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    pub batch: usize,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(batch: usize, channels: usize, height: usize, width: usize) -> Self {
        assert!(
            batch >= 1 && channels >= 1 && height >= 1 && width >= 1,
            "tensor dims must be >= 1, got {batch}x{channels}x{height}x{width}"
        );
        Self { batch, channels, height, width, data: vec![0.0; batch * channels * height * width] }
    }

    pub fn from_vec(
        batch: usize,
        channels: usize,
        height: usize,
        width: usize,
        data: Vec<f64>,
    ) -> Self {
        assert_eq!(
            data.len(),
            batch * channels * height * width,
            "buffer does not match {batch}x{channels}x{height}x{width}"
        );
        Self { batch, channels, height, width, data }
    }

    /// Same-shape zero tensor.
    pub fn zeros_like(other: &Self) -> Self {
        Self::zeros(other.batch, other.channels, other.height, other.width)
    }

    #[inline(always)]
    pub fn at(&self, b: usize, c: usize, y: usize, x: usize) -> f64 {
        self.data[((b * self.channels + c) * self.height + y) * self.width + x]
    }

    #[inline(always)]
    pub fn at_mut(&mut self, b: usize, c: usize, y: usize, x: usize) -> &mut f64 {
        &mut self.data[((b * self.channels + c) * self.height + y) * self.width + x]
    }

    /// Contiguous `H*W` spatial plane of `(b, c)`.
    #[inline(always)]
    pub fn plane(&self, b: usize, c: usize) -> &[f64] {
        let hw = self.height * self.width;
        let start = (b * self.channels + c) * hw;
        &self.data[start..start + hw]
    }

    #[inline(always)]
    pub fn plane_mut(&mut self, b: usize, c: usize) -> &mut [f64] {
        let hw = self.height * self.width;
        let start = (b * self.channels + c) * hw;
        &mut self.data[start..start + hw]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `(batch, channels, height, width)`.
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.batch, self.channels, self.height, self.width)
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::identity_op)] // spell out the full (b, c, h, w) flattening
    fn nchw_layout_with_width_fastest() {
        let mut t = Tensor4::zeros(2, 3, 4, 5);
        *t.at_mut(1, 2, 3, 4) = 7.0;
        let flat = ((1 * 3 + 2) * 4 + 3) * 5 + 4;
        assert_eq!(t.values()[flat], 7.0);
        assert_eq!(t.at(1, 2, 3, 4), 7.0);
    }

    #[test]
    fn plane_is_contiguous_hw() {
        let t = Tensor4::from_vec(1, 2, 2, 2, (0..8).map(|i| i as f64).collect());
        assert_eq!(t.plane(0, 1), &[4.0, 5.0, 6.0, 7.0]);
    }
}
