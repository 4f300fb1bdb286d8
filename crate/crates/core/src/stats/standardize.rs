//! Column standardization with missing-value handling.
//!
//! Statistics are always fit on training rows only; the same parameters then
//! impute and scale any other rows, which is what keeps cross-validation
//! leakage-free.

use super::StatsError;
use crate::linalg::Matrix;
use alloc::vec::Vec;

/// Per-column mean and standard deviation plus the zero-variance columns
/// that were dropped. Means double as imputation values for undefined cells.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams {
    /// Mean of the defined entries of each original column.
    pub means: Vec<f64>,
    /// Sample standard deviation (n-1) of the defined entries; 0.0 marks a
    /// dropped column.
    pub sds: Vec<f64>,
    /// Original indices of retained columns, ascending.
    pub retained: Vec<usize>,
    /// Original indices of dropped zero-variance columns, ascending.
    pub dropped: Vec<usize>,
}

impl StandardizationParams {
    /// Fits on the defined entries of each column. `defined` has the same
    /// shape as `x`; pass `None` when every cell is defined.
    ///
    /// Columns with fewer than two defined entries or zero variance are
    /// dropped. Errors only if every column is dropped.
    pub fn fit(x: &Matrix, defined: Option<&[Vec<bool>]>) -> Result<Self, StatsError> {
        let (n, p) = (x.rows(), x.cols());
        if n == 0 || p == 0 {
            return Err(StatsError::EmptyMatrix);
        }
        let mut means = Vec::with_capacity(p);
        let mut sds = Vec::with_capacity(p);
        let mut retained = Vec::new();
        let mut dropped = Vec::new();
        for c in 0..p {
            let mut count = 0usize;
            let mut sum = 0.0;
            for r in 0..n {
                if is_defined(defined, r, c) {
                    count += 1;
                    sum += x.get(r, c);
                }
            }
            if count < 2 {
                means.push(if count == 1 { sum } else { 0.0 });
                sds.push(0.0);
                dropped.push(c);
                continue;
            }
            let mean = sum / count as f64;
            let mut ss = 0.0;
            for r in 0..n {
                if is_defined(defined, r, c) {
                    let d = x.get(r, c) - mean;
                    ss += d * d;
                }
            }
            let sd = libm::sqrt(ss / (count - 1) as f64);
            means.push(mean);
            if sd > 0.0 {
                sds.push(sd);
                retained.push(c);
            } else {
                sds.push(0.0);
                dropped.push(c);
            }
        }
        if retained.is_empty() {
            return Err(StatsError::AllColumnsConstant);
        }
        Ok(StandardizationParams {
            means,
            sds,
            retained,
            dropped,
        })
    }

    /// Imputes undefined cells with the column mean, centers, scales, and
    /// drops the zero-variance columns. Output has `retained.len()` columns.
    pub fn apply(&self, x: &Matrix, defined: Option<&[Vec<bool>]>) -> Result<Matrix, StatsError> {
        if x.cols() != self.means.len() {
            return Err(StatsError::SchemaMismatch {
                expected: self.means.len(),
                got: x.cols(),
            });
        }
        let mut out = Matrix::zeros(x.rows(), self.retained.len());
        for r in 0..x.rows() {
            for (j, &c) in self.retained.iter().enumerate() {
                let raw = if is_defined(defined, r, c) {
                    x.get(r, c)
                } else {
                    self.means[c]
                };
                out.set(r, j, (raw - self.means[c]) / self.sds[c]);
            }
        }
        Ok(out)
    }

    /// Imputation-only variant: undefined cells get the column mean, nothing
    /// is scaled or dropped.
    pub fn impute(&self, x: &Matrix, defined: Option<&[Vec<bool>]>) -> Matrix {
        let mut out = x.clone();
        for r in 0..x.rows() {
            for c in 0..x.cols() {
                if !is_defined(defined, r, c) {
                    out.set(r, c, self.means[c]);
                }
            }
        }
        out
    }
}

#[inline]
fn is_defined(defined: Option<&[Vec<bool>]>, r: usize, c: usize) -> bool {
    defined.is_none_or(|m| m[r][c])
}

/// Mean and sample SD (n-1) of a full vector; SD is 0 for n < 2.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn standardizes_to_zero_mean_unit_sd() {
        let x = Matrix::from_rows(&[vec![1.0, 10.0], vec![2.0, 20.0], vec![3.0, 30.0]]);
        let params = StandardizationParams::fit(&x, None).unwrap();
        let z = params.apply(&x, None).unwrap();
        for c in 0..2 {
            let col = z.column(c);
            let (mean, sd) = mean_sd(&col);
            assert!(mean.abs() < 1e-12);
            assert!((sd - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn drops_constant_columns() {
        let x = Matrix::from_rows(&[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]]);
        let params = StandardizationParams::fit(&x, None).unwrap();
        assert_eq!(params.retained, vec![0]);
        assert_eq!(params.dropped, vec![1]);
        let z = params.apply(&x, None).unwrap();
        assert_eq!(z.cols(), 1);
    }

    #[test]
    fn all_constant_errors() {
        let x = Matrix::from_rows(&[vec![5.0], vec![5.0]]);
        assert_eq!(
            StandardizationParams::fit(&x, None).unwrap_err(),
            StatsError::AllColumnsConstant
        );
    }

    #[test]
    fn imputes_with_training_mean() {
        let x = Matrix::from_rows(&[vec![1.0], vec![0.0], vec![3.0]]);
        let defined = vec![vec![true], vec![false], vec![true]];
        let params = StandardizationParams::fit(&x, Some(&defined)).unwrap();
        assert_eq!(params.means[0], 2.0);
        let z = params.apply(&x, Some(&defined)).unwrap();
        // The imputed row sits exactly at the mean, i.e. standardized 0.
        assert_eq!(z.get(1, 0), 0.0);
    }

    #[test]
    fn mean_sd_sample_convention() {
        let (mean, sd) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(mean, 5.0);
        // Sample SD with n-1 denominator: sqrt(32/7).
        assert!((sd - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_value_sd_zero() {
        let (mean, sd) = mean_sd(&[10.0]);
        assert_eq!(mean, 10.0);
        assert_eq!(sd, 0.0);
    }
}
