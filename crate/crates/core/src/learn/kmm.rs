//! Kernel mean matching.
//!
//! Source weights β solve `min ½ βᵀΦβ − φᵀβ` subject to `0 ≤ β_i ≤ B` and
//! `|Σβ_i − N'| ≤ N'ε`, where `Φ_ij = k(x'_i, x'_j)` over the source and
//! `φ_i = (N'/N) Σ_j k(x'_i, x_j)` against the target, with an RBF kernel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmmParams {
    /// Upper bound on every weight.
    pub b: f64,
    /// Relative half-width of the band around `Σβ = N'`.
    pub epsilon: f64,
    /// RBF bandwidth; `None` uses the median pairwise distance.
    pub sigma: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for KmmParams {
    fn default() -> Self {
        KmmParams {
            b: 1000.0,
            epsilon: 1.0,
            sigma: None,
            max_iters: 10_000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmmWeights {
    pub beta: Vec<f64>,
    pub b: f64,
    pub epsilon: f64,
    pub kernel_sigma: f64,
    pub objective: f64,
    /// Objective at the all-ones start, projected onto the feasible set.
    pub baseline_objective: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit; `beta` is then the best feasible iterate.
    pub converged: bool,
}

const DIAG_JITTER: f64 = 1e-8;
const MEDIAN_POOL_CAP: usize = 2000;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Median pairwise Euclidean distance over the pooled points. Large pools are
/// thinned with a fixed stride first.
pub fn median_heuristic(source: &[Vec<f64>], target: &[Vec<f64>]) -> f64 {
    let pooled: Vec<&Vec<f64>> = source.iter().chain(target).collect();
    let stride = pooled.len().div_ceil(MEDIAN_POOL_CAP).max(1);
    let pts: Vec<&Vec<f64>> = pooled.into_iter().step_by(stride).collect();
    let mut d: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let pts = &pts;
            (i + 1..pts.len()).map(move |j| sq_dist(pts[i], pts[j]).sqrt())
        })
        .collect();
    d.retain(|v| *v > 0.0);
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    }
}

/// Feasible set of the weight problem: a box intersected with a sum band.
#[derive(Debug, Clone, Copy)]
struct Feasible {
    upper: f64,
    lo: f64,
    hi: f64,
}

impl Feasible {
    fn sum_at(&self, v: &[f64], tau: f64) -> f64 {
        v.iter().map(|x| (x - tau).clamp(0.0, self.upper)).sum()
    }

    /// Euclidean projection: `clip(v − τ, 0, B)` with the scalar shift `τ`
    /// found by bisection so the sum lands inside the band.
    fn project(&self, v: &[f64]) -> Vec<f64> {
        let s0 = self.sum_at(v, 0.0);
        let tau = if s0 > self.hi {
            self.solve_shift(v, self.hi, true)
        } else if s0 < self.lo {
            self.solve_shift(v, self.lo, false)
        } else {
            0.0
        };
        v.iter().map(|x| (x - tau).clamp(0.0, self.upper)).collect()
    }

    /// Shift giving `sum_at = target`; the returned end of the bracket is the
    /// one on the feasible side of `target`.
    fn solve_shift(&self, v: &[f64], target: f64, too_big: bool) -> f64 {
        let (vmin, vmax) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                (a.min(x), b.max(x))
            });
        // sum is non-increasing in tau; at vmax the sum is 0, at vmin − B it is n·B
        let (mut below, mut above) = if too_big {
            (0.0, vmax)
        } else {
            (vmin - self.upper, 0.0)
        };
        for _ in 0..200 {
            let mid = 0.5 * (below + above);
            if mid <= below || mid >= above {
                break;
            }
            if self.sum_at(v, mid) > target {
                below = mid;
            } else {
                above = mid;
            }
        }
        // `above` has sum ≤ target, `below` has sum > target
        if too_big {
            above
        } else {
            below
        }
    }

    fn contains(&self, beta: &[f64]) -> bool {
        let s: f64 = beta.iter().sum();
        let slack = if self.hi > self.lo {
            0.0
        } else {
            1e-9 * self.hi.max(1.0)
        };
        beta.iter().all(|b| (0.0..=self.upper).contains(b))
            && s >= self.lo - slack
            && s <= self.hi + slack
    }
}

fn rbf_matrix(a: &[Vec<f64>], b: &[Vec<f64>], sigma: f64) -> Vec<Vec<f64>> {
    let g = 1.0 / (2.0 * sigma * sigma);
    a.par_iter()
        .map(|x| b.iter().map(|y| (-g * sq_dist(x, y)).exp()).collect())
        .collect()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.par_iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `½βᵀΦβ − κᵀβ` given the precomputed product `pb = Φβ`.
fn objective_with(pb: &[f64], kappa: &[f64], beta: &[f64]) -> f64 {
    0.5 * pb.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>()
        - kappa.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>()
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
fn spectral_norm(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w = mat_vec(m, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-12 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}

pub fn kmm_weights(
    source: &[Vec<f64>],
    target: &[Vec<f64>],
    params: &KmmParams,
) -> Result<KmmWeights, LearnError> {
    let (np, n) = (source.len(), target.len());
    if np == 0 || n == 0 {
        return Err(LearnError::EmptyDataset);
    }
    let d = source[0].len();
    if let Some(bad) = source.iter().chain(target).find(|x| x.len() != d) {
        return Err(LearnError::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    if params.b.is_nan()
        || params.b <= 0.0
        || params.epsilon.is_nan()
        || params.epsilon < 0.0
        || params.max_iters == 0
    {
        return Err(LearnError::InvalidParameter(format!(
            "kmm needs B > 0, epsilon >= 0 and a positive iteration cap (B={}, epsilon={})",
            params.b, params.epsilon
        )));
    }
    let sigma = match params.sigma {
        Some(s) if s > 0.0 && s.is_finite() => s,
        Some(s) => {
            return Err(LearnError::InvalidParameter(format!(
                "kernel sigma must be positive, got {s}"
            )))
        }
        None => median_heuristic(source, target),
    };

    let mut phi = rbf_matrix(source, source, sigma);
    for (i, row) in phi.iter_mut().enumerate() {
        row[i] += DIAG_JITTER;
    }
    let ratio = np as f64 / n as f64;
    let kappa: Vec<f64> = rbf_matrix(source, target, sigma)
        .into_iter()
        .map(|row| ratio * row.iter().sum::<f64>())
        .collect();

    let set = Feasible {
        upper: params.b,
        lo: np as f64 * (1.0 - params.epsilon),
        hi: np as f64 * (1.0 + params.epsilon),
    };
    let step = 1.0 / spectral_norm(&phi).max(1e-12);

    // accelerated projected gradient, keeping the best iterate seen; Φ·y is
    // carried along by linearity so each step costs one product
    let start = set.project(&vec![1.0; np]);
    let p_start = mat_vec(&phi, &start);
    let baseline = objective_with(&p_start, &kappa, &start);
    let (mut x, mut y) = (start.clone(), start.clone());
    let (mut px, mut py) = (p_start.clone(), p_start.clone());
    let (mut best, mut p_best, mut best_obj) = (start, p_start, baseline);
    let mut t = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..params.max_iters {
        iterations = it + 1;
        let stepped: Vec<f64> = y
            .iter()
            .zip(py.iter().zip(&kappa))
            .map(|(v, (g, k))| v - step * (g - k))
            .collect();
        let next = set.project(&stepped);
        let p_next = mat_vec(&phi, &next);
        let obj = objective_with(&p_next, &kappa, &next);
        let moved = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if obj < best_obj {
            best_obj = obj;
            best.clone_from(&next);
            p_best.clone_from(&p_next);
        }
        if obj > best_obj + 1e-12 * best_obj.abs().max(1.0) {
            // restart momentum when the objective goes up
            t = 1.0;
            y.clone_from(&best);
            x.clone_from(&best);
            py.clone_from(&p_best);
            px.clone_from(&p_best);
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        y = next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + mom * (a - b))
            .collect();
        py = p_next
            .iter()
            .zip(&px)
            .map(|(a, b)| a + mom * (a - b))
            .collect();
        x = next;
        px = p_next;
        t = t_next;
        if moved <= params.tol * params.b.max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "kmm stopped at the iteration cap ({}) before converging",
            params.max_iters
        );
    }
    assert!(
        set.contains(&best),
        "kmm returned an infeasible weight vector"
    );
    assert!(
        best_obj <= baseline,
        "kmm objective above the all-ones baseline"
    );
    Ok(KmmWeights {
        beta: best,
        b: params.b,
        epsilon: params.epsilon,
        kernel_sigma: sigma,
        objective: best_obj,
        baseline_objective: baseline,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect()
    }

    #[test]
    fn identical_sets_give_unit_weights() {
        let x = grid_points(40, 3, 1);
        let w = kmm_weights(&x, &x, &KmmParams::default()).unwrap();
        let dev = w.beta.iter().map(|b| (b - 1.0).abs()).sum::<f64>() / 40.0;
        assert!(dev < 0.1, "{dev}");
    }

    #[test]
    fn near_point_outweighs_far_point() {
        let src = vec![vec![0.0], vec![10.0]];
        let tgt = vec![vec![0.0]; 5];
        let params = KmmParams {
            sigma: Some(1.0),
            ..KmmParams::default()
        };
        let w = kmm_weights(&src, &tgt, &params).unwrap();
        assert!(w.beta[0] > w.beta[1], "{:?}", w.beta);
        // grid-search oracle over the feasible box
        let obj = |a: f64, b: f64| {
            let k01 = (-50.0f64).exp();
            0.5 * ((1.0 + DIAG_JITTER) * (a * a + b * b) + 2.0 * k01 * a * b)
                - 2.0 / 5.0 * 5.0 * (a * 1.0 + b * (-50.0f64).exp())
        };
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=400 {
            for j in 0..=400 {
                let (a, b) = (i as f64 * 0.01, j as f64 * 0.01);
                if a + b <= 4.0 && obj(a, b) < best.0 {
                    best = (obj(a, b), a, b);
                }
            }
        }
        assert!(
            (w.beta[0] - best.1).abs() < 0.02 && (w.beta[1] - best.2).abs() < 0.02,
            "{:?} vs {best:?}",
            w.beta
        );
    }

    #[test]
    fn projection_hits_band() {
        let set = Feasible {
            upper: 3.0,
            lo: 2.0,
            hi: 4.0,
        };
        let p = set.project(&[5.0, 5.0, 5.0]);
        assert!(set.contains(&p));
        assert!((p.iter().sum::<f64>() - 4.0).abs() < 1e-9);
        let q = set.project(&[-1.0, -2.0, 0.1]);
        assert!(set.contains(&q));
        assert!((q.iter().sum::<f64>() - 2.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn projection_is_feasible_and_closest(v in prop::collection::vec(-5.0f64..5.0, 2..12), eps in 0.05f64..1.0) {
            let n = v.len() as f64;
            let set = Feasible { upper: 2.0, lo: n * (1.0 - eps), hi: n * (1.0 + eps) };
            let p = set.project(&v);
            prop_assert!(set.contains(&p));
            // no feasible point from a simple family is closer than p
            let dist = |a: &[f64]| a.iter().zip(&v).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
            for s in [0.0, 0.5, 1.0, 1.5] {
                let c = set.project(&vec![s; v.len()]);
                prop_assert!(dist(&p) <= dist(&c) + 1e-9);
            }
        }

        #[test]
        fn weights_respect_constraints(seed in 0u64..1000, b in 1.0f64..50.0, eps in 0.0f64..1.0) {
            let src = grid_points(15, 2, seed);
            let tgt: Vec<Vec<f64>> = grid_points(10, 2, seed + 1).into_iter().map(|p| vec![p[0] * 0.3 + 1.0, p[1] * 0.3]).collect();
            let w = kmm_weights(&src, &tgt, &KmmParams { b, epsilon: eps, ..KmmParams::default() }).unwrap();
            prop_assert!(w.beta.iter().all(|x| (0.0..=b).contains(x)));
            let s: f64 = w.beta.iter().sum();
            prop_assert!((s - 15.0).abs() <= 15.0 * eps + 1e-9);
            prop_assert!(w.objective <= w.baseline_objective);
        }
    }
}
