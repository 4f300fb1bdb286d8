//! Leading principal component by power iteration.

use super::StatsError;
use crate::linalg::{dot, norm2, Matrix};
use crate::rng::SplitMix64;
use alloc::vec::Vec;

const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 1000;

/// Leading eigenvector (unit norm) of the column covariance of an
/// already-standardized matrix, by power iteration on X^T X / (n-1).
///
/// The start vector is a fixed pseudo-random direction so runs are
/// deterministic. The sign of the result is arbitrary; callers orient it.
pub fn pca_first_component(x: &Matrix) -> Result<Vec<f64>, StatsError> {
    let (n, p) = (x.rows(), x.cols());
    if n < 2 || p < 2 {
        return Err(StatsError::InsufficientSample {
            n: n.min(p),
            required: 2,
        });
    }
    // Covariance of standardized columns, built once; p is small here.
    let mut cov = Matrix::zeros(p, p);
    let denom = (n - 1) as f64;
    for i in 0..p {
        let ci = x.column(i);
        for j in i..p {
            let cj = x.column(j);
            let v = dot(&ci, &cj) / denom;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    let total_variance: f64 = (0..p).map(|i| cov.get(i, i)).sum();
    if total_variance <= 0.0 {
        return Err(StatsError::AllColumnsConstant);
    }

    let mut rng = SplitMix64::new(0x9ca1_0f1e);
    let mut v: Vec<f64> = (0..p).map(|_| rng.next_gaussian()).collect();
    let norm = norm2(&v);
    for x in v.iter_mut() {
        *x /= norm;
    }
    for _ in 1..=MAX_ITERATIONS {
        let mut next = cov.mul_vec(&v);
        let norm = norm2(&next);
        if norm < 1e-300 {
            // Landed in the null space; restart from a fresh direction.
            for x in next.iter_mut() {
                *x = rng.next_gaussian();
            }
            let n2 = norm2(&next);
            for x in next.iter_mut() {
                *x /= n2;
            }
            v = next;
            continue;
        }
        for x in next.iter_mut() {
            *x /= norm;
        }
        // Converged when the iterate stops moving (up to sign). The step
        // norm is linear in the remaining error, unlike the cosine
        // alignment, which is quadratic and stalls early.
        let step = {
            let mut d_plus = 0.0;
            let mut d_minus = 0.0;
            for (a, b) in next.iter().zip(&v) {
                d_plus += (a - b) * (a - b);
                d_minus += (a + b) * (a + b);
            }
            libm::sqrt(d_plus.min(d_minus))
        };
        v = next;
        if step < TOLERANCE {
            return Ok(v);
        }
    }
    Err(StatsError::PowerIterationDiverged {
        iterations: MAX_ITERATIONS,
    })
}
