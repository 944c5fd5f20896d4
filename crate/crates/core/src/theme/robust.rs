//! Outlier-aware (robust) K-means on weighted points.
//!
//! Minimizes
//!
//! ```text
//! Σ_i c_i [ w_i ||x_i - m_k(i) - o_i||² + λ ||o_i|| ]
//! ```
//!
//! over assignments, centroids `m` and per-point outlier vectors `o`, where
//! `c_i` is the multiplicity of a deduplicated point (1 for raw input). Each
//! sweep minimizes exactly over one block of variables at a time, so the
//! objective never increases:
//!
//! 1. assignment to the nearest `m_k + o_i`,
//! 2. group soft-thresholding `o_i = r_i · max(0, 1 - λ / (2 w_i ||r_i||))`
//!    with `r_i = x_i - m_k(i)`,
//! 3. centroids as the `c·w`-weighted mean of `x_i - o_i`.
//!
//! With `λ → ∞` every `o_i` stays zero and the procedure is weighted Lloyd.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{lab_distance_sq, Lab};
use crate::error::ClusterError;

/// Lab points with positive weights and integer-like multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoints {
    points: Vec<Lab>,
    weights: Vec<f64>,
    multiplicity: Vec<f64>,
}

impl WeightedPoints {
    pub fn new(points: Vec<Lab>, weights: Vec<f64>) -> Result<Self, ClusterError> {
        let multiplicity = vec![1.0; points.len()];
        WeightedPoints::with_multiplicity(points, weights, multiplicity)
    }

    pub fn unweighted(points: Vec<Lab>) -> Self {
        let n = points.len();
        WeightedPoints {
            points,
            weights: vec![1.0; n],
            multiplicity: vec![1.0; n],
        }
    }

    /// Point `i` stands for `multiplicity[i]` identical copies of `(x_i, w_i)`.
    pub fn with_multiplicity(
        points: Vec<Lab>,
        weights: Vec<f64>,
        multiplicity: Vec<f64>,
    ) -> Result<Self, ClusterError> {
        if points.len() != weights.len() || points.len() != multiplicity.len() {
            return Err(ClusterError::LengthMismatch);
        }
        if weights
            .iter()
            .chain(&multiplicity)
            .any(|w| !w.is_finite() || *w <= 0.0)
        {
            return Err(ClusterError::InvalidWeights);
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ClusterError::InvalidWeights);
        }
        Ok(WeightedPoints {
            points,
            weights,
            multiplicity,
        })
    }

    /// Merges identical `(point, weight)` pairs. Returns the compact set and,
    /// for every input point, the index of its representative.
    pub fn dedup(&self) -> (WeightedPoints, Vec<usize>) {
        let mut index: HashMap<[u64; 4], usize> = HashMap::new();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut multiplicity = Vec::new();
        let mut map = Vec::with_capacity(self.points.len());
        for i in 0..self.points.len() {
            let p = self.points[i];
            let key = [
                p[0].to_bits(),
                p[1].to_bits(),
                p[2].to_bits(),
                self.weights[i].to_bits(),
            ];
            let slot = *index.entry(key).or_insert_with(|| {
                points.push(p);
                weights.push(self.weights[i]);
                multiplicity.push(0.0);
                points.len() - 1
            });
            multiplicity[slot] += self.multiplicity[i];
            map.push(slot);
        }
        (
            WeightedPoints {
                points,
                weights,
                multiplicity,
            },
            map,
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Lab] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn multiplicity(&self) -> &[f64] {
        &self.multiplicity
    }

    /// Total number of represented points.
    pub fn count(&self) -> f64 {
        self.multiplicity.iter().sum()
    }

    fn mass(&self, i: usize) -> f64 {
        self.weights[i] * self.multiplicity[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustKMeansParams {
    pub k: usize,
    pub lambda: f64,
    pub max_iters: usize,
    /// Relative objective change that counts as converged.
    pub tol: f64,
    /// Independent restarts; the lowest objective wins.
    pub restarts: usize,
}

impl Default for RobustKMeansParams {
    fn default() -> Self {
        RobustKMeansParams {
            k: 5,
            lambda: 70.0,
            max_iters: 300,
            tol: 1e-6,
            restarts: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub centroids: Vec<Lab>,
    /// Cluster index per input point.
    pub assignments: Vec<usize>,
    pub outlier_vectors: Vec<Lab>,
    pub objective: f64,
    /// Mean pixel `(x, y)` per cluster; empty unless filled by theme extraction.
    pub positions: Vec<[f64; 2]>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every sweep of the winning restart.
    pub objective_trace: Vec<f64>,
    pub empty_clusters_reseeded: usize,
}

impl ClusteringResult {
    pub fn outlier_count(&self) -> usize {
        self.outlier_vectors
            .iter()
            .filter(|o| o.iter().any(|v| *v != 0.0))
            .count()
    }
}

/// Single-restart robust K-means.
pub fn robust_kmeans(
    data: &WeightedPoints,
    k: usize,
    lambda: f64,
    rng_seed: u64,
    max_iters: usize,
) -> Result<ClusteringResult, ClusterError> {
    let params = RobustKMeansParams {
        k,
        lambda,
        max_iters,
        restarts: 1,
        ..RobustKMeansParams::default()
    };
    robust_kmeans_with(data, &params, rng_seed)
}

pub fn robust_kmeans_with(
    data: &WeightedPoints,
    params: &RobustKMeansParams,
    rng_seed: u64,
) -> Result<ClusteringResult, ClusterError> {
    validate(data, params.k)?;
    if !params.lambda.is_finite() || params.lambda < 0.0 {
        return Err(ClusterError::InvalidLambda);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best: Option<ClusteringResult> = None;
    for _ in 0..params.restarts.max(1) {
        let init = kmeanspp_init(data, params.k, &mut rng);
        let run = descend(data, init, params);
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

pub(crate) fn validate(data: &WeightedPoints, k: usize) -> Result<(), ClusterError> {
    let n = data.count();
    if k == 0 || data.is_empty() || n < k as f64 {
        return Err(ClusterError::TooFewPoints {
            n: n as usize,
            k: k.max(1),
        });
    }
    Ok(())
}

/// Weighted k-means++ seeding: the first center with probability ∝ `c·w`,
/// later ones ∝ `c·w·D²`.
pub fn kmeanspp_init<R: Rng + ?Sized>(data: &WeightedPoints, k: usize, rng: &mut R) -> Vec<Lab> {
    let n = data.len();
    let mut centers = Vec::with_capacity(k);
    let mass: Vec<f64> = (0..n).map(|i| data.mass(i)).collect();
    let first = weighted_pick(&mass, rng);
    centers.push(data.points[first]);
    let mut d2: Vec<f64> = data
        .points
        .iter()
        .map(|p| lab_distance_sq(p, &centers[0]))
        .collect();
    while centers.len() < k {
        let score: Vec<f64> = (0..n).map(|i| mass[i] * d2[i]).collect();
        let pick = if score.iter().sum::<f64>() > 0.0 {
            weighted_pick(&score, rng)
        } else {
            // fewer distinct points than clusters
            weighted_pick(&mass, rng)
        };
        let c = data.points[pick];
        centers.push(c);
        for (d, p) in d2.iter_mut().zip(&data.points) {
            *d = d.min(lab_distance_sq(p, &c));
        }
    }
    centers
}

fn weighted_pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut target = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if target < w {
                return i;
            }
            target -= w;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

#[inline]
fn sub(a: &Lab, b: &Lab) -> Lab {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn norm(a: &Lab) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn nearest(target: &Lab, centroids: &[Lab]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, m) in centroids.iter().enumerate() {
        let d = lab_distance_sq(target, m);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

fn soft_threshold(r: Lab, weight: f64, lambda: f64) -> Lab {
    let len = norm(&r);
    if len == 0.0 {
        return [0.0; 3];
    }
    let shrink = 1.0 - lambda / (2.0 * weight * len);
    if shrink <= 0.0 {
        [0.0; 3]
    } else {
        [r[0] * shrink, r[1] * shrink, r[2] * shrink]
    }
}

/// Objective value for a given state.
pub fn robust_objective(
    data: &WeightedPoints,
    centroids: &[Lab],
    assignments: &[usize],
    outliers: &[Lab],
    lambda: f64,
) -> f64 {
    let terms: Vec<f64> = (0..data.len())
        .into_par_iter()
        .map(|i| {
            let r = sub(
                &sub(&data.points[i], &centroids[assignments[i]]),
                &outliers[i],
            );
            data.multiplicity[i]
                * (data.weights[i] * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
                    + lambda * norm(&outliers[i]))
        })
        .collect();
    terms.iter().sum()
}

fn descend(
    data: &WeightedPoints,
    mut centroids: Vec<Lab>,
    params: &RobustKMeansParams,
) -> ClusteringResult {
    let n = data.len();
    let k = centroids.len();
    let lambda = params.lambda;
    let mut outliers = vec![[0.0; 3]; n];
    let mut assignments = vec![0usize; n];
    let mut trace = Vec::new();
    let mut reseeded = 0;
    let mut prev = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..params.max_iters.max(1) {
        iterations += 1;
        let step: Vec<(usize, Lab)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = &data.points[i];
                let shifted = sub(x, &outliers[i]);
                let a = nearest(&shifted, &centroids);
                let o = soft_threshold(sub(x, &centroids[a]), data.weights[i], lambda);
                (a, o)
            })
            .collect();
        for (i, (a, o)) in step.into_iter().enumerate() {
            assignments[i] = a;
            outliers[i] = o;
        }

        let mut sums = vec![[0.0; 3]; k];
        let mut mass = vec![0.0; k];
        for i in 0..n {
            let a = assignments[i];
            let m = data.mass(i);
            let v = sub(&data.points[i], &outliers[i]);
            sums[a][0] += m * v[0];
            sums[a][1] += m * v[1];
            sums[a][2] += m * v[2];
            mass[a] += m;
        }
        let mut empty = Vec::new();
        for c in 0..k {
            if mass[c] > 0.0 {
                centroids[c] = [
                    sums[c][0] / mass[c],
                    sums[c][1] / mass[c],
                    sums[c][2] / mass[c],
                ];
            } else {
                empty.push(c);
            }
        }

        let objective = robust_objective(data, &centroids, &assignments, &outliers, lambda);
        debug_assert!(
            objective <= prev + 1e-9 * prev.abs().max(1.0),
            "objective increased: {prev} -> {objective}"
        );
        trace.push(objective);

        if !empty.is_empty() {
            reseeded += reseed_empty(data, &mut centroids, &assignments, &outliers, &empty);
        }

        let done = prev.is_finite() && prev - objective <= params.tol * objective.abs().max(1.0);
        prev = objective;
        if done && empty.is_empty() {
            converged = true;
            break;
        }
    }

    ClusteringResult {
        centroids,
        assignments,
        outlier_vectors: outliers,
        objective: prev,
        positions: Vec::new(),
        iterations,
        converged,
        objective_trace: trace,
        empty_clusters_reseeded: reseeded,
    }
}

/// Moves each empty centroid onto the point with the largest residual.
/// Returns how many clusters were actually moved.
fn reseed_empty(
    data: &WeightedPoints,
    centroids: &mut [Lab],
    assignments: &[usize],
    outliers: &[Lab],
    empty: &[usize],
) -> usize {
    let mut residual: Vec<(f64, usize)> = (0..data.len())
        .map(|i| {
            let r = sub(
                &sub(&data.points[i], &centroids[assignments[i]]),
                &outliers[i],
            );
            (norm(&r), i)
        })
        .collect();
    residual.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut moved = 0;
    for (&c, &(r, i)) in empty.iter().zip(&residual) {
        if r <= 0.0 {
            break;
        }
        centroids[c] = data.points[i];
        moved += 1;
    }
    moved
}

/// Plain weighted K-means (Lloyd), seeded exactly like [`robust_kmeans_with`].
pub fn weighted_kmeans(
    data: &WeightedPoints,
    params: &RobustKMeansParams,
    rng_seed: u64,
) -> Result<ClusteringResult, ClusterError> {
    validate(data, params.k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best: Option<ClusteringResult> = None;
    for _ in 0..params.restarts.max(1) {
        let init = kmeanspp_init(data, params.k, &mut rng);
        let run = lloyd(data, init, params.max_iters, params.tol);
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn lloyd(
    data: &WeightedPoints,
    mut centroids: Vec<Lab>,
    max_iters: usize,
    tol: f64,
) -> ClusteringResult {
    let n = data.len();
    let k = centroids.len();
    let mut assign = vec![0usize; n];
    let mut prev = f64::INFINITY;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut reseeded = 0;
    let zeros = vec![[0.0; 3]; n];
    for _ in 0..max_iters.max(1) {
        iterations += 1;
        assign = data
            .points
            .par_iter()
            .map(|x| nearest(x, &centroids))
            .collect();
        let mut acc = vec![([0.0; 3], 0.0); k];
        for i in 0..n {
            let w = data.weights[i] * data.multiplicity[i];
            let (s, m) = &mut acc[assign[i]];
            for d in 0..3 {
                s[d] += w * data.points[i][d];
            }
            *m += w;
        }
        let mut empty = Vec::new();
        for (c, (s, m)) in acc.iter().enumerate() {
            if *m > 0.0 {
                centroids[c] = [s[0] / m, s[1] / m, s[2] / m];
            } else {
                empty.push(c);
            }
        }
        let sse: Vec<f64> = (0..n)
            .map(|i| {
                data.multiplicity[i]
                    * data.weights[i]
                    * lab_distance_sq(&data.points[i], &centroids[assign[i]])
            })
            .collect();
        let objective: f64 = sse.iter().sum();
        trace.push(objective);
        if !empty.is_empty() {
            reseeded += reseed_empty(data, &mut centroids, &assign, &zeros, &empty);
        }
        let done = prev.is_finite() && prev - objective <= tol * objective.abs().max(1.0);
        prev = objective;
        if done && empty.is_empty() {
            converged = true;
            break;
        }
    }
    ClusteringResult {
        centroids,
        assignments: assign,
        outlier_vectors: zeros,
        objective: prev,
        positions: Vec::new(),
        iterations,
        converged,
        objective_trace: trace,
        empty_clusters_reseeded: reseeded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(center: Lab, n: usize, spread: f64, rng: &mut ChaCha8Rng) -> Vec<Lab> {
        (0..n)
            .map(|_| {
                [
                    center[0] + spread * (rng.gen::<f64>() - 0.5),
                    center[1] + spread * (rng.gen::<f64>() - 0.5),
                    center[2] + spread * (rng.gen::<f64>() - 0.5),
                ]
            })
            .collect()
    }

    #[test]
    fn single_point() {
        let data = WeightedPoints::unweighted(vec![[40.0, 10.0, -5.0]]);
        let r = robust_kmeans(&data, 1, 3.0, 0, 50).unwrap();
        assert_eq!(r.centroids, vec![[40.0, 10.0, -5.0]]);
        assert_eq!(r.outlier_vectors, vec![[0.0; 3]]);
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn too_few_points() {
        let data = WeightedPoints::unweighted(vec![[0.0; 3]; 3]);
        assert!(matches!(
            robust_kmeans(&data, 5, 70.0, 0, 10),
            Err(ClusterError::TooFewPoints { n: 3, k: 5 })
        ));
    }

    #[test]
    fn invalid_inputs() {
        assert!(WeightedPoints::new(vec![[0.0; 3]], vec![0.0]).is_err());
        assert!(WeightedPoints::new(vec![[0.0; 3]], vec![1.0, 2.0]).is_err());
        let data = WeightedPoints::unweighted(vec![[0.0; 3]; 3]);
        assert!(robust_kmeans(&data, 1, -1.0, 0, 10).is_err());
    }

    // Minimizing w||r - o||² + λ||o|| along the direction of r: o = t·r/|r|.
    fn numeric_outlier_length(r_len: f64, w: f64, lambda: f64) -> f64 {
        let f = |t: f64| w * (r_len - t).powi(2) + lambda * t.abs();
        let mut best = (f(0.0), 0.0);
        for s in 0..=200_000 {
            let t = r_len * s as f64 / 200_000.0;
            if f(t) < best.0 {
                best = (f(t), t);
            }
        }
        best.1
    }

    #[test]
    fn soft_threshold_matches_numeric_minimizer() {
        for &(len, w, lambda) in &[
            (10.0, 1.0, 70.0),
            (50.0, 1.0, 70.0),
            (50.0, 3.0, 70.0),
            (5.0, 2.0, 1.0),
        ] {
            let o = soft_threshold([len, 0.0, 0.0], w, lambda);
            let expected = numeric_outlier_length(len, w, lambda);
            assert!(
                (o[0] - expected).abs() < 1e-3,
                "len={len} w={w}: {o:?} vs {expected}"
            );
        }
        assert_eq!(soft_threshold([6.0, 8.0, 0.0], 1.0, 70.0), [0.0; 3]);
    }

    #[test]
    fn far_point_becomes_outlier() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pts = blob([30.0, 0.0, 0.0], 40, 2.0, &mut rng);
        pts.extend(blob([70.0, 0.0, 0.0], 40, 2.0, &mut rng));
        pts.push([50.0, 80.0, 0.0]);
        let data = WeightedPoints::unweighted(pts.clone());
        let r = robust_kmeans_with(
            &data,
            &RobustKMeansParams {
                k: 2,
                lambda: 5.0,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        assert!(norm(&r.outlier_vectors[80]) > 0.0);
        let mean = |s: &[Lab]| {
            let n = s.len() as f64;
            [
                s.iter().map(|p| p[0]).sum::<f64>() / n,
                s.iter().map(|p| p[1]).sum::<f64>() / n,
                s.iter().map(|p| p[2]).sum::<f64>() / n,
            ]
        };
        let inlier_means = [mean(&pts[..40]), mean(&pts[40..80])];
        for m in &inlier_means {
            let closest = r
                .centroids
                .iter()
                .map(|c| lab_distance_sq(c, m).sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!(closest < 0.5, "centroid drifted {closest}");
        }
        // The same assignment with all outlier vectors zeroed is worse.
        let no_outliers = robust_objective(
            &data,
            &r.centroids,
            &r.assignments,
            &vec![[0.0; 3]; 81],
            5.0,
        );
        assert!(r.objective < no_outliers);
    }

    #[test]
    fn huge_lambda_is_kmeans() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pts = blob([20.0, 10.0, 10.0], 30, 15.0, &mut rng);
        pts.extend(blob([60.0, -20.0, 30.0], 30, 15.0, &mut rng));
        pts.extend(blob([80.0, 40.0, -30.0], 30, 15.0, &mut rng));
        let weights: Vec<f64> = (0..90).map(|i| 1.0 + (i % 4) as f64).collect();
        let data = WeightedPoints::new(pts, weights).unwrap();
        let params = RobustKMeansParams {
            k: 3,
            lambda: 1e9,
            ..Default::default()
        };
        let robust = robust_kmeans_with(&data, &params, 5).unwrap();
        let plain = weighted_kmeans(&data, &params, 5).unwrap();
        assert_eq!(robust.outlier_count(), 0);
        for (a, b) in robust.centroids.iter().zip(&plain.centroids) {
            assert!(lab_distance_sq(a, b).sqrt() < 1e-6);
        }
    }

    #[test]
    fn objective_trace_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<Lab> = blob([50.0, 0.0, 0.0], 300, 80.0, &mut rng);
        let data = WeightedPoints::unweighted(pts);
        let r = robust_kmeans(&data, 5, 20.0, 4, 200).unwrap();
        for w in r.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn unit_weights_equal_unweighted() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<Lab> = blob([50.0, 0.0, 0.0], 100, 60.0, &mut rng);
        let a = robust_kmeans(&WeightedPoints::unweighted(pts.clone()), 4, 30.0, 2, 100).unwrap();
        let b = robust_kmeans(
            &WeightedPoints::new(pts, vec![1.0; 100]).unwrap(),
            4,
            30.0,
            2,
            100,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dedup_preserves_objective_terms() {
        let pts = vec![
            [1.0, 2.0, 3.0],
            [1.0, 2.0, 3.0],
            [9.0, 9.0, 9.0],
            [1.0, 2.0, 3.0],
        ];
        let data = WeightedPoints::new(pts, vec![2.0, 2.0, 1.0, 3.0]).unwrap();
        let (compact, map) = data.dedup();
        assert_eq!(compact.len(), 3);
        assert_eq!(map, vec![0, 0, 1, 2]);
        assert_eq!(compact.multiplicity(), &[2.0, 1.0, 1.0]);
        let c = vec![[0.0; 3]];
        let lhs = robust_objective(&data, &c, &[0; 4], &[[0.5, 0.0, 0.0]; 4], 7.0);
        let rhs = robust_objective(&compact, &c, &[0; 3], &[[0.5, 0.0, 0.0]; 3], 7.0);
        assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn outliers_shrink_with_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pts = blob([40.0, 0.0, 0.0], 200, 10.0, &mut rng);
        pts.extend(blob([50.0, 0.0, 0.0], 20, 150.0, &mut rng));
        let data = WeightedPoints::unweighted(pts);
        let mut last = usize::MAX;
        for lambda in [1.0, 5.0, 20.0, 70.0, 200.0, 1e4] {
            let r = robust_kmeans(&data, 2, lambda, 9, 200).unwrap();
            let count = r.outlier_count();
            assert!(count <= last, "lambda {lambda}: {count} > {last}");
            last = count;
        }
        assert_eq!(last, 0);
    }

    #[test]
    fn coincident_points_fill_all_clusters() {
        let data =
            WeightedPoints::with_multiplicity(vec![[100.0, 0.0, 0.0]], vec![1.0], vec![50.0])
                .unwrap();
        let r = robust_kmeans_with(&data, &RobustKMeansParams::default(), 0).unwrap();
        assert_eq!(r.centroids.len(), 5);
        assert!(r.centroids.iter().all(|c| *c == [100.0, 0.0, 0.0]));
        assert_eq!(r.objective, 0.0);
    }
}
