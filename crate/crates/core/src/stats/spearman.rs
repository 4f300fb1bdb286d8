//! Spearman rank correlation with tie handling and the no-correlation test.

use super::special::t_two_sided_p;
use super::StatsError;
use alloc::vec;
use alloc::vec::Vec;

/// Default significance level; every report table in this project uses it.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// One cell of a correlation table.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub rho: f64,
    pub n: usize,
    pub p_value: f64,
    /// `p_value < alpha` for the alpha this report was computed with.
    pub significant: bool,
}

/// Average ranks (1-based); tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share rank mean of (i+1)..=(j+1).
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = shared;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        num += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(num / libm::sqrt(sxx * syy))
}

/// Spearman's rho: average-rank transform then Pearson on the ranks.
///
/// The two-sided p-value uses the t approximation
/// `t = rho * sqrt((n-2)/(1-rho^2))` with `n-2` degrees of freedom;
/// `rho = ±1` maps to `p = 0`.
pub fn spearman(x: &[f64], y: &[f64], alpha: f64) -> Result<CorrelationReport, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::InsufficientSample { n, required: 3 });
    }
    let rank_x = average_ranks(x);
    let rank_y = average_ranks(y);
    let rho = match pearson(&rank_x, &rank_y) {
        Some(r) => r.clamp(-1.0, 1.0),
        None => return Err(StatsError::ConstantInput),
    };
    let p_value = if 1.0 - libm::fabs(rho) < 1e-12 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = rho * libm::sqrt(df / (1.0 - rho * rho));
        t_two_sided_p(t, df)
    };
    Ok(CorrelationReport {
        rho,
        n,
        p_value,
        significant: p_value < alpha,
    })
}
