//! Row-major 2D array of doubles.
//!
//! [`Plane`] is the shared container for every 2D quantity in the pipeline:
//! the three projected planes of a cube, Doppler spectrograms, and
//! batch-by-feature matrices inside the network head. Element `(r, c)` lives
//! at `data[r * cols + c]`.

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Plane {
    /// All-zero plane of shape `rows x cols`; both dims must be >= 1.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "plane dims must be >= 1, got {rows}x{cols}");
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Wraps an existing row-major buffer; `data.len()` must be `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert!(rows >= 1 && cols >= 1, "plane dims must be >= 1, got {rows}x{cols}");
        assert_eq!(data.len(), rows * cols, "buffer length does not match {rows}x{cols}");
        Self { rows, cols, data }
    }

    /// Builds a plane by evaluating `f(row, col)` at every element.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut plane = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                plane.data[r * cols + c] = f(r, c);
            }
        }
        plane
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline(always)]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline(always)]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    /// Row `r` as a contiguous slice.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Full backing buffer in row-major order.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Elementwise map into a new plane.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Index `(row, col)` of the maximum element (first occurrence wins).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_v = f64::NEG_INFINITY;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if v > best_v {
                    best_v = v;
                    best = (r, c);
                }
            }
        }
        best
    }

    /// Mean of all elements.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::identity_op)] // spell out the full row * cols + col indexing
    fn row_major_layout() {
        let p = Plane::from_fn(3, 4, |r, c| (r * 10 + c) as f64);
        assert_eq!(p.get(1, 2), 12.0);
        assert_eq!(p.row(2), &[20.0, 21.0, 22.0, 23.0]);
        assert_eq!(p.values()[1 * 4 + 2], 12.0);
    }

    #[test]
    fn argmax_finds_first_maximum() {
        let mut p = Plane::zeros(2, 3);
        p.set(1, 1, 5.0);
        assert_eq!(p.argmax(), (1, 1));
        assert_eq!(Plane::zeros(2, 2).argmax(), (0, 0), "ties resolve to first");
    }

    #[test]
    #[should_panic(expected = "buffer length")]
    fn from_vec_rejects_bad_length() {
        let _ = Plane::from_vec(2, 2, vec![0.0; 3]);
    }

    #[test]
    fn mean_is_arithmetic_mean() {
        let p = Plane::from_vec(1, 4, vec![1.0, 2.0, 3.0, 4.0]);
        assert!((p.mean() - 2.5).abs() < 1e-15);
    }
}
