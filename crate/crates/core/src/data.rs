use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::SymmetricDense;

/// `N × n` sample matrix, one observation per row.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: values.len(),
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    #[inline]
    pub fn n_samples(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Rows selected by `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> DataMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        DataMatrix {
            rows: indices.len(),
            cols: self.cols,
            values,
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (acc, x) in m.iter_mut().zip(self.row(i)) {
                *acc += x;
            }
        }
        let inv = 1.0 / self.rows.max(1) as f64;
        m.iter_mut().for_each(|x| *x *= inv);
        m
    }

    /// Empirical covariance `(1/N) Σ (x_i − μ)(x_i − μ)ᵀ` around `mean`.
    pub fn covariance(&self, mean: &[f64]) -> Result<SymmetricDense> {
        self.weighted_covariance(None, mean)
    }

    /// `Σ w_i (x_i − μ)(x_i − μ)ᵀ / Σ w_i`. `weights = None` means all ones.
    pub fn weighted_covariance(&self, weights: Option<&[f64]>, mean: &[f64]) -> Result<SymmetricDense> {
        if mean.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: mean.len(),
            });
        }
        if let Some(w) = weights {
            if w.len() != self.rows {
                return Err(Error::DimensionMismatch {
                    expected: self.rows,
                    found: w.len(),
                });
            }
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::EmptyInput);
        }
        let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
        let total: f64 = (0..self.rows).map(weight).sum();
        if !(total > 0.0) {
            return Err(Error::EmptyInput);
        }
        let y = Mat::<f64>::from_fn(self.rows, self.cols, |i, j| {
            weight(i).sqrt() * (self.values[i * self.cols + j] - mean[j])
        });
        let s = y.transpose() * &y;
        let inv = 1.0 / total;
        Ok(SymmetricDense::from_fn(self.cols, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]) * inv))
    }
}
