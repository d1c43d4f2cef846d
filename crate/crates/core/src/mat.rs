//! Dense row-major `f64` matrices and compensated reductions.
//!
//! Everything the estimators need from a Gram matrix reduces to row sums,
//! column sums, and dot products of those, so this stays deliberately small.
//! All reductions run in a fixed order with Kahan compensation: repeated
//! evaluations of the same inputs are bit-identical.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Mat {
    /// Zero-filled `rows x cols` matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// All entries finite?
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Row sums (`A e`), one compensated accumulation per row.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| kahan_sum(self.row(i))).collect()
    }

    /// Column sums (`A^T e`); a single row-major pass with one compensation
    /// term per column, so the per-column addition order is by row index.
    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        let mut comp = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                let y = v - comp[j];
                let t = sums[j] + y;
                comp[j] = (t - sums[j]) - y;
                sums[j] = t;
            }
        }
        sums
    }

    /// Sum of all entries (`e^T A e`), row-major order.
    pub fn total(&self) -> f64 {
        kahan_sum(&self.data)
    }

    /// Sum of the main diagonal (square matrices).
    pub fn trace(&self) -> f64 {
        debug_assert_eq!(self.rows, self.cols);
        let mut acc = Kahan::new();
        for i in 0..self.rows {
            acc.add(self.get(i, i));
        }
        acc.value()
    }
}

/// Kahan compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Kahan::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Compensated sum of a slice.
pub fn kahan_sum(values: &[f64]) -> f64 {
    let mut acc = Kahan::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

/// Compensated dot product.
pub fn kahan_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = Kahan::new();
    for (&x, &y) in a.iter().zip(b.iter()) {
        acc.add(x * y);
    }
    acc.value()
}

/// Compensated squared norm.
pub fn kahan_norm_sq(a: &[f64]) -> f64 {
    kahan_dot(a, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_and_col_sums() {
        let mut m = Mat::zeros(2, 3);
        for i in 0..2 {
            for j in 0..3 {
                m.set(i, j, (i * 3 + j) as f64);
            }
        }
        assert_eq!(m.row_sums(), vec![3.0, 12.0]);
        assert_eq!(m.col_sums(), vec![3.0, 5.0, 7.0]);
        assert_eq!(m.total(), 15.0);
    }

    #[test]
    fn kahan_recovers_ill_conditioned_sum() {
        // 1 + 1e-16 repeated: naive f64 summation drops every increment.
        let values = [1.0, 1e-16, 1e-16, 1e-16, -1.0];
        let naive: f64 = values.iter().sum();
        assert_eq!(naive, 0.0);
        let s = kahan_sum(&values);
        assert!((s - 3e-16).abs() < 1e-16);
    }

    #[test]
    fn trace_of_square() {
        let mut m = Mat::zeros(3, 3);
        m.set(0, 0, 1.0);
        m.set(1, 1, 2.0);
        m.set(2, 2, 4.0);
        assert_eq!(m.trace(), 7.0);
    }
}
