use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::FeatureError;

/// Principal axes fitted on a feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// One row per component, unit length, sign fixed so the largest entry is positive.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub feature_names: Vec<String>,
    pub schema_version: String,
    /// True when fewer than the requested components carry variance.
    pub rank_deficient: bool,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>, FeatureError> {
        if x.len() != self.mean.len() {
            return Err(FeatureError::DimensionMismatch {
                expected: self.mean.len(),
                got: x.len(),
            });
        }
        Ok(self
            .components
            .iter()
            .map(|c| {
                c.iter()
                    .zip(x)
                    .zip(&self.mean)
                    .map(|((w, v), m)| w * (v - m))
                    .sum()
            })
            .collect())
    }

    pub fn transform_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, FeatureError> {
        rows.iter().map(|r| self.transform(r)).collect()
    }

    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, s) in self.components.iter().zip(z) {
            for (o, w) in out.iter_mut().zip(c) {
                *o += s * w;
            }
        }
        out
    }
}

/// Fits `k` principal components on `rows` (samples by features).
///
/// Components with numerically zero variance are dropped and flagged via
/// `rank_deficient`, so the model may hold fewer than `k` axes.
pub fn fit_pca(
    rows: &[Vec<f64>],
    k: usize,
    feature_names: &[String],
    schema_version: &str,
) -> Result<PcaModel, FeatureError> {
    let n = rows.len();
    if n < 2 {
        return Err(FeatureError::TooFewSamples { need: 2, got: n });
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(FeatureError::DimensionMismatch {
            expected: d,
            got: rows.iter().map(Vec::len).find(|&l| l != d).unwrap_or(d),
        });
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(FeatureError::NonFinite);
    }
    if k == 0 || k > d.min(n - 1) {
        return Err(FeatureError::TooManyComponents {
            k,
            max: d.min(n - 1),
        });
    }

    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n as f64;
        }
    }
    let centered = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let top = eig.eigenvalues[idx[0]].max(0.0);
    let floor = top * 1e-12;

    let mut components = Vec::with_capacity(k);
    let mut explained = Vec::with_capacity(k);
    for &i in idx.iter().take(k) {
        let lambda = eig.eigenvalues[i];
        if lambda <= floor || lambda <= 0.0 {
            break;
        }
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let lead = (0..d)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap();
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        explained.push(lambda);
    }
    let rank_deficient = components.len() < k;
    if rank_deficient {
        log::warn!(
            "only {} of {k} principal components carry variance",
            components.len()
        );
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance: explained,
        feature_names: feature_names.to_vec(),
        schema_version: schema_version.to_string(),
        rank_deficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn recovers_dominant_axis() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| {
                let t = i as f64 - 25.0;
                vec![3.0 * t, 4.0 * t, 0.01 * ((i * 7) % 5) as f64]
            })
            .collect();
        let m = fit_pca(&rows, 1, &names(3), "t").unwrap();
        let c = &m.components[0];
        assert!(
            (c[0] - 0.6).abs() < 1e-4 && (c[1] - 0.8).abs() < 1e-4,
            "{c:?}"
        );
    }

    #[test]
    fn rank_deficient_is_flagged() {
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64, 2.0 * i as f64, 5.0])
            .collect();
        let m = fit_pca(&rows, 2, &names(3), "t").unwrap();
        assert!(m.rank_deficient);
        assert_eq!(m.n_components(), 1);
    }

    #[test]
    fn too_many_components() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![0.0, 0.0]];
        assert!(matches!(
            fit_pca(&rows, 3, &names(2), "t"),
            Err(FeatureError::TooManyComponents { .. })
        ));
    }

    proptest! {
        #[test]
        fn components_orthonormal_and_variance_sorted(
            rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 4), 8..20)
        ) {
            let m = fit_pca(&rows, 3, &names(4), "t").unwrap();
            for (i, a) in m.components.iter().enumerate() {
                for (j, b) in m.components.iter().enumerate() {
                    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-8);
                }
            }
            prop_assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1]));
            // full-rank projection round-trips
            let full = fit_pca(&rows, 4, &names(4), "t").unwrap();
            if !full.rank_deficient {
                let z = full.transform(&rows[0]).unwrap();
                let back = full.inverse(&z);
                for (a, b) in back.iter().zip(&rows[0]) {
                    prop_assert!((a - b).abs() < 1e-7);
                }
            }
        }
    }
}
