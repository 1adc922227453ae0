// SPDX-License-Identifier: Apache-2.0

use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Columns whose fitted standard deviation falls below this map to zero.
pub const STD_EPS: f64 = 1e-12;

/// Per-column z-score statistics, fitted on training graphs only and reused
/// for every graph evaluated afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum StandardizeError {
    #[error("cannot fit a standardizer on zero rows")]
    Empty,
    #[error("matrix has {got} columns, standardizer expects {expected}")]
    Width { expected: usize, got: usize },
}

impl Standardizer {
    /// Fit population mean and standard deviation over all rows of all
    /// matrices.
    pub fn fit<'a, I>(matrices: I) -> Result<Self, StandardizeError>
    where
        I: IntoIterator<Item = &'a Array2<f64>>,
    {
        let mut sum: Vec<f64> = Vec::new();
        let mut rows = 0usize;
        let mats: Vec<&Array2<f64>> = matrices.into_iter().collect();
        for m in &mats {
            if m.nrows() == 0 {
                continue;
            }
            if sum.is_empty() {
                sum = vec![0.0; m.ncols()];
            } else if sum.len() != m.ncols() {
                return Err(StandardizeError::Width { expected: sum.len(), got: m.ncols() });
            }
            for row in m.rows() {
                for (s, &x) in sum.iter_mut().zip(row) {
                    *s += x;
                }
            }
            rows += m.nrows();
        }
        if rows == 0 {
            return Err(StandardizeError::Empty);
        }
        let n = rows as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let mut var = vec![0.0; mean.len()];
        for m in &mats {
            for row in m.rows() {
                for ((v, &x), &mu) in var.iter_mut().zip(row).zip(&mean) {
                    *v += (x - mu) * (x - mu);
                }
            }
        }
        let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply<T: Scalar>(&self, raw: &Array2<f64>) -> Result<Array2<T>, StandardizeError> {
        if raw.ncols() != self.dim() {
            return Err(StandardizeError::Width { expected: self.dim(), got: raw.ncols() });
        }
        let mut out = Array2::<T>::zeros(raw.raw_dim());
        for (mut orow, rrow) in out.rows_mut().into_iter().zip(raw.rows()) {
            Zip::from(&mut orow)
                .and(&rrow)
                .and(&self.mean[..])
                .and(&self.std[..])
                .for_each(|o, &x, &mu, &sd| {
                    *o = if sd < STD_EPS { T::zero() } else { T::of((x - mu) / sd) };
                });
        }
        Ok(out)
    }
}
