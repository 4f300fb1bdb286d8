//! PLS1 regression fit by NIPALS.
//!
//! Per component: `w = X^T y / ||X^T y||`, `t = X w`, `p = X^T t / (t^T t)`,
//! `q = y^T t / (t^T t)`, then deflate `X <- X - t p^T`, `y <- y - q t`.
//! Extraction stops early once `||X^T y|| < 1e-12`, recording the effective
//! component count. Exactly collinear columns are handled by construction:
//! deflation never divides by a column norm.

use super::standardize::{mean_sd, StandardizationParams};
use super::StatsError;
use crate::linalg::{dot, norm2, solve_dense, Matrix};
use alloc::vec;
use alloc::vec::Vec;

const DEFLATION_EPS: f64 = 1e-12;

/// A trained PLS1 model: standardization parameters, per-component weights,
/// loadings and score scales, and the equivalent regression coefficients in
/// the original feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct PlsModel {
    /// Requested component count.
    pub n_components: usize,
    /// Components actually extracted before deflation exhausted the signal.
    pub effective_components: usize,
    /// Unit-norm weight vectors, one per component, in retained-column space.
    pub weights: Vec<Vec<f64>>,
    /// X loadings, one per component.
    pub loadings: Vec<Vec<f64>>,
    /// Score-scale coefficient per component (regression of y on t).
    pub q: Vec<f64>,
    /// Coefficients in the original (unstandardized, undropped) feature
    /// space; dropped columns carry 0.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub x_params: StandardizationParams,
    pub y_mean: f64,
    pub y_sd: f64,
}

impl PlsModel {
    /// Number of original feature columns the model expects.
    pub fn input_cols(&self) -> usize {
        self.x_params.means.len()
    }

    /// Upper bound on components for a training set shape.
    pub fn component_bound(n_train: usize, retained: usize) -> usize {
        retained.min(n_train.saturating_sub(1))
    }
}

/// Fits PLS1 with `k` components. X and y are standardized internally and the
/// fit-time parameters are stored on the model.
pub fn pls_fit(x: &Matrix, y: &[f64], k: usize) -> Result<PlsModel, StatsError> {
    let n = x.rows();
    if n != y.len() {
        return Err(StatsError::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if n < 3 {
        return Err(StatsError::InsufficientSample { n, required: 3 });
    }
    if k == 0 {
        return Err(StatsError::ComponentBound { k, max: 0 });
    }
    let x_params = StandardizationParams::fit(x, None)?;
    let bound = PlsModel::component_bound(n, x_params.retained.len());
    if k > bound {
        return Err(StatsError::ComponentBound { k, max: bound });
    }
    let (y_mean, y_sd) = mean_sd(y);
    if y_sd == 0.0 {
        return Err(StatsError::ConstantTarget);
    }

    let mut xd = x_params.apply(x, None)?;
    let mut yd: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_sd).collect();

    let mut weights = Vec::with_capacity(k);
    let mut loadings = Vec::with_capacity(k);
    let mut q = Vec::with_capacity(k);
    for _ in 0..k {
        let xty = xd.transpose_mul_vec(&yd);
        let cov_norm = norm2(&xty);
        if cov_norm < DEFLATION_EPS {
            break;
        }
        let w: Vec<f64> = xty.iter().map(|v| v / cov_norm).collect();
        let t = xd.mul_vec(&w);
        let tt = dot(&t, &t);
        if tt < DEFLATION_EPS {
            break;
        }
        let p: Vec<f64> = xd.transpose_mul_vec(&t).iter().map(|v| v / tt).collect();
        let qk = dot(&yd, &t) / tt;
        xd.subtract_outer(&t, &p);
        for (yi, &ti) in yd.iter_mut().zip(&t) {
            *yi -= qk * ti;
        }
        weights.push(w);
        loadings.push(p);
        q.push(qk);
    }
    let effective = weights.len();
    let coef_std = standardized_coefficients(&weights, &loadings, &q);
    // Map back to original feature space.
    let p_orig = x.cols();
    let mut coefficients = vec![0.0; p_orig];
    for (j, &c) in x_params.retained.iter().enumerate() {
        coefficients[c] = coef_std[j] * y_sd / x_params.sds[c];
    }
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&x_params.means)
            .map(|(b, m)| b * m)
            .sum::<f64>();

    Ok(PlsModel {
        n_components: k,
        effective_components: effective,
        weights,
        loadings,
        q,
        coefficients,
        intercept,
        x_params,
        y_mean,
        y_sd,
    })
}

/// `B = W (P^T W)^{-1} q` in standardized space.
fn standardized_coefficients(weights: &[Vec<f64>], loadings: &[Vec<f64>], q: &[f64]) -> Vec<f64> {
    let k = weights.len();
    if k == 0 {
        return Vec::new();
    }
    let p = weights[0].len();
    let mut ptw = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            ptw.set(i, j, dot(&loadings[i], &weights[j]));
        }
    }
    let r = match solve_dense(&ptw, q) {
        Some(r) => r,
        // P^T W is unit upper triangular for NIPALS so this cannot happen in
        // exact arithmetic; fall back to the last component scale.
        None => q.to_vec(),
    };
    let mut coef = vec![0.0; p];
    for (wi, &ri) in weights.iter().zip(&r) {
        for (c, &w) in coef.iter_mut().zip(wi) {
            *c += w * ri;
        }
    }
    coef
}

/// Predicts with the first `k` components (clamped to the effective count)
/// by replaying the NIPALS transform on the new rows.
pub fn pls_predict_at_k(
    model: &PlsModel,
    x_new: &Matrix,
    k: usize,
) -> Result<Vec<f64>, StatsError> {
    if x_new.cols() != model.input_cols() {
        return Err(StatsError::SchemaMismatch {
            expected: model.input_cols(),
            got: x_new.cols(),
        });
    }
    let k = k.min(model.effective_components);
    let z = model.x_params.apply(x_new, None)?;
    let mut out = Vec::with_capacity(z.rows());
    let mut xd = vec![0.0; z.cols()];
    for r in 0..z.rows() {
        xd.copy_from_slice(z.row(r));
        let mut y_std = 0.0;
        for i in 0..k {
            let t = dot(&xd, &model.weights[i]);
            y_std += model.q[i] * t;
            for (xv, &pv) in xd.iter_mut().zip(&model.loadings[i]) {
                *xv -= t * pv;
            }
        }
        out.push(model.y_mean + model.y_sd * y_std);
    }
    Ok(out)
}

/// Predicts with all effective components.
pub fn pls_predict(model: &PlsModel, x_new: &Matrix) -> Result<Vec<f64>, StatsError> {
    pls_predict_at_k(model, x_new, model.effective_components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_matrix(rng: &mut SplitMix64, n: usize, p: usize) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.next_gaussian()).collect())
            .collect();
        Matrix::from_rows(&rows)
    }

    #[test]
    fn single_linear_column_recovered_with_one_component() {
        // Orthogonal centered columns: the first weight vector is then the
        // axis of the one informative column, so one component suffices.
        let mut rng = SplitMix64::new(21);
        let raw = random_matrix(&mut rng, 30, 4);
        let mut cols: Vec<Vec<f64>> = (0..4).map(|c| raw.column(c)).collect();
        for c in 0..4 {
            let mean = cols[c].iter().sum::<f64>() / 30.0;
            for v in cols[c].iter_mut() {
                *v -= mean;
            }
            for prev in 0..c {
                let proj = dot(&cols[c], &cols[prev]) / dot(&cols[prev], &cols[prev]);
                let prev_col = cols[prev].clone();
                for (v, p) in cols[c].iter_mut().zip(&prev_col) {
                    *v -= proj * p;
                }
            }
        }
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|r| (0..4).map(|c| cols[c][r]).collect())
            .collect();
        let x = Matrix::from_rows(&rows);
        let y: Vec<f64> = (0..30).map(|r| 3.0 * x.get(r, 2) + 1.0).collect();
        let model = pls_fit(&x, &y, 1).unwrap();
        let pred = pls_predict(&model, &x).unwrap();
        let residual: f64 = pred
            .iter()
            .zip(&y)
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>()
            .sqrt();
        assert!(residual < 1e-8, "residual {residual}");
    }

    #[test]
    fn duplicated_column_fits_without_failure() {
        let mut rng = SplitMix64::new(8);
        let base = random_matrix(&mut rng, 25, 3);
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|r| {
                let mut row = base.row(r).to_vec();
                row.push(base.get(r, 0)); // exact collinearity
                row
            })
            .collect();
        let x = Matrix::from_rows(&rows);
        let y: Vec<f64> = (0..25)
            .map(|r| x.get(r, 0) - 0.5 * x.get(r, 1) + 0.1 * rng.next_gaussian())
            .collect();
        let model = pls_fit(&x, &y, 3).unwrap();
        let pred = pls_predict(&model, &x).unwrap();
        assert!(pred.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn constant_target_rejected() {
        let mut rng = SplitMix64::new(2);
        let x = random_matrix(&mut rng, 10, 3);
        let y = vec![5.0; 10];
        assert_eq!(pls_fit(&x, &y, 1).unwrap_err(), StatsError::ConstantTarget);
    }

    #[test]
    fn component_bound_enforced() {
        let mut rng = SplitMix64::new(3);
        let x = random_matrix(&mut rng, 5, 3);
        let y: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let err = pls_fit(&x, &y, 5).unwrap_err();
        assert!(matches!(err, StatsError::ComponentBound { k: 5, max: 3 }));
    }

    #[test]
    fn mean_row_predicts_mean_target() {
        let mut rng = SplitMix64::new(4);
        let x = random_matrix(&mut rng, 20, 3);
        let y: Vec<f64> = (0..20).map(|_| rng.next_gaussian() * 2.0 + 7.0).collect();
        let model = pls_fit(&x, &y, 2).unwrap();
        let means = Matrix::from_rows(&[model.x_params.means.clone()]);
        let pred = pls_predict(&model, &means).unwrap();
        assert!((pred[0] - model.y_mean).abs() < 1e-9);
    }

    #[test]
    fn schema_mismatch_rejected() {
        let mut rng = SplitMix64::new(5);
        let x = random_matrix(&mut rng, 10, 2);
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let model = pls_fit(&x, &y, 1).unwrap();
        let wide = random_matrix(&mut rng, 4, 3);
        let err = pls_predict(&model, &wide).unwrap_err();
        assert!(matches!(
            err,
            StatsError::SchemaMismatch {
                expected: 2,
                got: 3
            }
        ));
    }

    #[test]
    fn coefficient_route_matches_iterative_route() {
        let mut rng = SplitMix64::new(6);
        let x = random_matrix(&mut rng, 40, 5);
        let y: Vec<f64> = (0..40)
            .map(|r| x.get(r, 0) + 2.0 * x.get(r, 3) + 0.3 * rng.next_gaussian())
            .collect();
        let model = pls_fit(&x, &y, 4).unwrap();
        let x_new = random_matrix(&mut rng, 12, 5);
        let iterative = pls_predict(&model, &x_new).unwrap();
        for r in 0..12 {
            let direct: f64 = model.intercept + dot(x_new.row(r), &model.coefficients);
            assert!(
                (direct - iterative[r]).abs() < 1e-9,
                "row {r}: {direct} vs {}",
                iterative[r]
            );
        }
    }

    #[test]
    fn residual_non_increasing_in_k() {
        let mut rng = SplitMix64::new(7);
        let x = random_matrix(&mut rng, 30, 6);
        let y: Vec<f64> = (0..30)
            .map(|r| x.get(r, 1) - x.get(r, 4) + 0.5 * rng.next_gaussian())
            .collect();
        let model = pls_fit(&x, &y, 6).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..=model.effective_components {
            let pred = pls_predict_at_k(&model, &x, k).unwrap();
            let residual: f64 = pred.iter().zip(&y).map(|(p, t)| (p - t) * (p - t)).sum();
            assert!(residual <= last + 1e-9, "k={k}: {residual} > {last}");
            last = residual;
        }
    }

    #[test]
    fn weights_are_unit_norm() {
        let mut rng = SplitMix64::new(9);
        let x = random_matrix(&mut rng, 25, 4);
        let y: Vec<f64> = (0..25).map(|r| x.get(r, 0) + rng.next_gaussian()).collect();
        let model = pls_fit(&x, &y, 3).unwrap();
        for w in &model.weights {
            assert!((norm2(w) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn column_order_invariance() {
        let mut rng = SplitMix64::new(10);
        let x = random_matrix(&mut rng, 30, 4);
        let y: Vec<f64> = (0..30)
            .map(|r| x.get(r, 0) - x.get(r, 2) + 0.2 * rng.next_gaussian())
            .collect();
        let permuted = x.select_columns(&[3, 1, 0, 2]);
        let a = pls_fit(&x, &y, 3).unwrap();
        let b = pls_fit(&permuted, &y, 3).unwrap();
        let x_new = random_matrix(&mut rng, 8, 4);
        let x_new_perm = x_new.select_columns(&[3, 1, 0, 2]);
        let pa = pls_predict(&a, &x_new).unwrap();
        let pb = pls_predict(&b, &x_new_perm).unwrap();
        for (l, r) in pa.iter().zip(&pb) {
            assert!((l - r).abs() < 1e-9);
        }
    }
}
