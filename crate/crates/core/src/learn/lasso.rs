//! Weighted LASSO by cyclic coordinate descent.
//!
//! Minimizes `Σ w_i (aᵀx_i + b − y_i)² + λ‖a‖₁`. Columns are centered by
//! their weighted means, so the intercept is `b = ȳ_w − aᵀx̄_w` in closed form
//! and each coordinate update is an exact soft-threshold.

use serde::{Deserialize, Serialize};

use crate::error::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LassoParams {
    pub lambda: f64,
    /// Stop when no coefficient moves by more than this in a sweep.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for LassoParams {
    fn default() -> Self {
        LassoParams {
            lambda: 1.0,
            tol: 1e-8,
            max_sweeps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub a: Vec<f64>,
    pub b: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Objective after each sweep.
    pub objective_trace: Vec<f64>,
}

pub fn lasso_objective(
    x: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
    a: &[f64],
    b: f64,
    lambda: f64,
) -> f64 {
    let fit: f64 = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((xi, yi), wi)| {
            wi * (xi.iter().zip(a).map(|(u, v)| u * v).sum::<f64>() + b - yi).powi(2)
        })
        .sum();
    fit + lambda * a.iter().map(|v| v.abs()).sum::<f64>()
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

pub fn weighted_lasso(
    x: &[Vec<f64>],
    y: &[f64],
    weights: &[f64],
    params: &LassoParams,
) -> Result<LassoFit, LearnError> {
    let n = x.len();
    if n == 0 {
        return Err(LearnError::EmptyDataset);
    }
    if y.len() != n || weights.len() != n {
        return Err(LearnError::DimensionMismatch {
            expected: n,
            got: if y.len() != n { y.len() } else { weights.len() },
        });
    }
    let d = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(LearnError::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(LearnError::InvalidParameter(
            "sample weights must be finite and non-negative".into(),
        ));
    }
    if params.lambda.is_nan() || params.lambda < 0.0 {
        return Err(LearnError::InvalidParameter(format!(
            "lasso lambda must be >= 0, got {}",
            params.lambda
        )));
    }
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 {
        return Err(LearnError::AllZeroWeights);
    }

    let x_mean: Vec<f64> = (0..d)
        .map(|j| x.iter().zip(weights).map(|(r, w)| w * r[j]).sum::<f64>() / wsum)
        .collect();
    let y_mean = y.iter().zip(weights).map(|(v, w)| w * v).sum::<f64>() / wsum;
    // column-major centered design
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|j| x.iter().map(|r| r[j] - x_mean[j]).collect())
        .collect();
    let col_norm: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().zip(weights).map(|(v, w)| w * v * v).sum())
        .collect();
    let mut resid: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut a = vec![0.0; d];
    let half_lambda = params.lambda / 2.0;

    let intercept = |a: &[f64]| y_mean - a.iter().zip(&x_mean).map(|(u, v)| u * v).sum::<f64>();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < params.max_sweeps {
        sweeps += 1;
        let mut max_change = 0.0f64;
        for j in 0..d {
            if col_norm[j] <= 0.0 {
                continue;
            }
            let col = &cols[j];
            let rho: f64 = col
                .iter()
                .zip(&resid)
                .zip(weights)
                .map(|((c, r), w)| w * c * (r + a[j] * c))
                .sum();
            let new = soft_threshold(rho, half_lambda) / col_norm[j];
            let delta = new - a[j];
            if delta != 0.0 {
                for (r, c) in resid.iter_mut().zip(col) {
                    *r -= delta * c;
                }
                a[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        trace.push(lasso_objective(
            x,
            y,
            weights,
            &a,
            intercept(&a),
            params.lambda,
        ));
        if max_change < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "lasso hit the sweep cap ({}) before converging",
            params.max_sweeps
        );
    }
    let b = intercept(&a);
    Ok(LassoFit {
        a,
        b,
        sweeps,
        converged,
        objective_trace: trace,
    })
}

/// Smallest λ at which every coefficient is zero.
pub fn lambda_max(x: &[Vec<f64>], y: &[f64], weights: &[f64]) -> f64 {
    let wsum: f64 = weights.iter().sum();
    if x.is_empty() || wsum <= 0.0 {
        return 0.0;
    }
    let d = x[0].len();
    let y_mean = y.iter().zip(weights).map(|(v, w)| w * v).sum::<f64>() / wsum;
    (0..d)
        .map(|j| {
            let m = x.iter().zip(weights).map(|(r, w)| w * r[j]).sum::<f64>() / wsum;
            let g: f64 = x
                .iter()
                .zip(y)
                .zip(weights)
                .map(|((r, yi), w)| w * (r[j] - m) * (yi - y_mean))
                .sum();
            2.0 * g.abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn problem(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let y = x
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(j, v)| (j as f64 - 1.0) * v)
                    .sum::<f64>()
                    + 0.3
                    + rng.gen_range(-0.1..0.1)
            })
            .collect();
        let w = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
        (x, y, w)
    }

    #[test]
    fn one_dimensional_ols() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10)
            .map(|i| 2.0 * i as f64 + 1.0 + if i % 2 == 0 { 0.5 } else { -0.5 })
            .collect();
        let fit = weighted_lasso(
            &x,
            &y,
            &[1.0; 10],
            &LassoParams {
                lambda: 0.0,
                ..Default::default()
            },
        )
        .unwrap();
        // closed-form slope cov(x, y) / var(x)
        let mx = 4.5;
        let my = y.iter().sum::<f64>() / 10.0;
        let sxy: f64 = (0..10).map(|i| (i as f64 - mx) * (y[i] - my)).sum();
        let sxx: f64 = (0..10).map(|i| (i as f64 - mx).powi(2)).sum();
        assert!((fit.a[0] - sxy / sxx).abs() < 1e-8);
        assert!((fit.b - (my - fit.a[0] * mx)).abs() < 1e-8);
    }

    #[test]
    fn kill_threshold_zeroes_everything() {
        let (x, y, w) = problem(3, 30, 4);
        let lm = lambda_max(&x, &y, &w);
        let fit = weighted_lasso(
            &x,
            &y,
            &w,
            &LassoParams {
                lambda: lm * 1.0001,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(fit.a.iter().all(|v| *v == 0.0));
        let ybar = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>();
        assert!((fit.b - ybar).abs() < 1e-12);
        let below = weighted_lasso(
            &x,
            &y,
            &w,
            &LassoParams {
                lambda: lm * 0.9,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(below.a.iter().any(|v| *v != 0.0));
    }

    #[test]
    fn zero_weight_equals_deletion() {
        let (x, y, mut w) = problem(5, 20, 3);
        w[7] = 0.0;
        let p = LassoParams {
            lambda: 0.5,
            ..Default::default()
        };
        let full = weighted_lasso(&x, &y, &w, &p).unwrap();
        let keep: Vec<usize> = (0..20).filter(|&i| i != 7).collect();
        let xs: Vec<Vec<f64>> = keep.iter().map(|&i| x[i].clone()).collect();
        let ys: Vec<f64> = keep.iter().map(|&i| y[i]).collect();
        let ws: Vec<f64> = keep.iter().map(|&i| w[i]).collect();
        let cut = weighted_lasso(&xs, &ys, &ws, &p).unwrap();
        for (u, v) in full.a.iter().zip(&cut.a) {
            assert!((u - v).abs() < 1e-9);
        }
        assert!((full.b - cut.b).abs() < 1e-9);
    }

    #[test]
    fn all_zero_weights() {
        let (x, y, _) = problem(1, 5, 2);
        assert!(matches!(
            weighted_lasso(&x, &y, &[0.0; 5], &LassoParams::default()),
            Err(LearnError::AllZeroWeights)
        ));
    }

    proptest! {
        #[test]
        fn objective_non_increasing(seed in 0u64..500, lambda in 0.0f64..5.0) {
            let (x, y, w) = problem(seed, 25, 5);
            let fit = weighted_lasso(&x, &y, &w, &LassoParams { lambda, ..Default::default() }).unwrap();
            let start = lasso_objective(&x, &y, &w, &[0.0; 5], {
                y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>()
            }, lambda);
            prop_assert!(fit.objective_trace[0] <= start + 1e-9);
            for pair in fit.objective_trace.windows(2) {
                prop_assert!(pair[1] <= pair[0] + 1e-9 * pair[0].abs().max(1.0));
            }
        }

        #[test]
        fn l1_norm_shrinks_along_lambda_ladder(seed in 0u64..200) {
            let (x, y, w) = problem(seed, 30, 4);
            let mut last = f64::INFINITY;
            for lambda in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
                let fit = weighted_lasso(&x, &y, &w, &LassoParams { lambda, ..Default::default() }).unwrap();
                let l1: f64 = fit.a.iter().map(|v| v.abs()).sum();
                prop_assert!(l1 <= last + 1e-6);
                last = l1;
            }
        }
    }
}
