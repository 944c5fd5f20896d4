use std::path::Path;

use serde::{Deserialize, Serialize};

use rand::seq::SliceRandom;

use super::kmm::KmmWeights;
use crate::error::{Error, LearnError};
use crate::features::{schema_tag, FeatureTable, FeatureVector, PcaModel};
use crate::rng::{stream_rng, Stream};

/// Rated source samples (online themes and their scores).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDataset {
    pub names: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub origin: String,
}

/// Unlabeled target samples (themes of web pages).
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDataset {
    pub names: Vec<String>,
    pub x: Vec<Vec<f64>>,
}

fn check_rows(names: &[String], x: &[Vec<f64>]) -> Result<(), LearnError> {
    if x.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    match x.iter().find(|r| r.len() != names.len()) {
        Some(bad) => Err(LearnError::DimensionMismatch {
            expected: names.len(),
            got: bad.len(),
        }),
        None => Ok(()),
    }
}

impl SourceDataset {
    pub fn new(
        names: Vec<String>,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
        origin: impl Into<String>,
    ) -> Result<Self, LearnError> {
        check_rows(&names, &x)?;
        if y.len() != x.len() {
            return Err(LearnError::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        Ok(SourceDataset {
            names,
            x,
            y,
            origin: origin.into(),
        })
    }

    pub fn from_table(table: FeatureTable, origin: impl Into<String>) -> Result<Self, LearnError> {
        let Some(y) = table.ratings else {
            return Err(LearnError::InvalidParameter(
                "source table needs a rating column".into(),
            ));
        };
        Self::new(table.names, table.rows, y, origin)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn schema_version(&self) -> String {
        schema_tag(&self.names)
    }

    /// Random train/holdout partition with `round(fraction·n)` held out
    /// (at least one sample stays on each side). Deterministic in `seed`.
    pub fn split(
        &self,
        fraction: f64,
        seed: u64,
    ) -> Result<(SourceDataset, SourceDataset), LearnError> {
        if !(fraction > 0.0 && fraction < 1.0) || self.len() < 2 {
            return Err(LearnError::InvalidParameter(format!(
                "holdout needs a fraction in (0, 1) and at least 2 samples (fraction={fraction}, n={})",
                self.len()
            )));
        }
        let n = self.len();
        let held = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut stream_rng(seed, Stream::Split, 0));
        let (test, train) = order.split_at(held);
        let pick = |idx: &[usize]| {
            let mut idx = idx.to_vec();
            idx.sort_unstable();
            SourceDataset {
                names: self.names.clone(),
                x: idx.iter().map(|&i| self.x[i].clone()).collect(),
                y: idx.iter().map(|&i| self.y[i]).collect(),
                origin: self.origin.clone(),
            }
        };
        Ok((pick(train), pick(test)))
    }
}

impl TargetDataset {
    pub fn new(names: Vec<String>, x: Vec<Vec<f64>>) -> Result<Self, LearnError> {
        check_rows(&names, &x)?;
        Ok(TargetDataset { names, x })
    }

    pub fn from_table(table: FeatureTable) -> Result<Self, LearnError> {
        Self::new(table.names, table.rows)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// One affine scorer `aᵀx + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingMethod {
    /// One LASSO fit with unit weights.
    Plain,
    /// One LASSO fit weighted by the source weights.
    Weighted,
    /// Bagged LASSO fits over weight-driven resamples.
    Ensemble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmmSummary {
    pub b: f64,
    pub epsilon: f64,
    pub kernel_sigma: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_beta: f64,
    pub mean_beta: f64,
}

impl From<&KmmWeights> for KmmSummary {
    fn from(w: &KmmWeights) -> Self {
        KmmSummary {
            b: w.b,
            epsilon: w.epsilon,
            kernel_sigma: w.kernel_sigma,
            iterations: w.iterations,
            converged: w.converged,
            max_beta: w.beta.iter().copied().fold(0.0, f64::max),
            mean_beta: w.beta.iter().sum::<f64>() / w.beta.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub method: TrainingMethod,
    pub lasso_lambda: f64,
    pub members: usize,
    pub seed: Option<u64>,
    pub weighted_bags: bool,
    pub kmm: Option<KmmSummary>,
    pub bag_sizes: Vec<usize>,
    /// Bags redrawn because they came out empty.
    pub bag_retries: usize,
    pub source_origin: String,
    pub source_count: usize,
    pub target_count: usize,
}

/// Averaged linear scorer over rated color themes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentModel {
    pub feature_names: Vec<String>,
    pub schema_version: String,
    /// Applied to raw features before scoring when present.
    pub pca: Option<PcaModel>,
    pub members: Vec<Member>,
    pub a: Vec<f64>,
    pub b: f64,
    pub metadata: TrainingMetadata,
}

impl AssessmentModel {
    /// Builds the model from its members; the coefficients are their average.
    pub fn from_members(
        feature_names: Vec<String>,
        pca: Option<PcaModel>,
        members: Vec<Member>,
        metadata: TrainingMetadata,
    ) -> Self {
        let l = members.len() as f64;
        let dim = members.first().map_or(0, |m| m.a.len());
        let mut a = vec![0.0; dim];
        let mut b = 0.0;
        for m in &members {
            for (acc, v) in a.iter_mut().zip(&m.a) {
                *acc += v;
            }
            b += m.b;
        }
        a.iter_mut().for_each(|v| *v /= l);
        AssessmentModel {
            schema_version: schema_tag(&feature_names),
            feature_names,
            pca,
            members,
            a,
            b: b / l,
            metadata,
        }
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    /// Score of a raw feature row.
    pub fn predict(&self, x: &[f64]) -> Result<f64, LearnError> {
        if x.len() != self.dim() {
            return Err(LearnError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let z;
        let input = match &self.pca {
            Some(p) => {
                z = p.transform(x).map_err(|_| LearnError::DimensionMismatch {
                    expected: p.mean.len(),
                    got: x.len(),
                })?;
                &z[..]
            }
            None => x,
        };
        Ok(self.a.iter().zip(input).map(|(u, v)| u * v).sum::<f64>() + self.b)
    }

    pub fn predict_vector(&self, v: &FeatureVector) -> Result<f64, LearnError> {
        if v.schema_version != self.schema_version {
            return Err(LearnError::SchemaMismatch {
                expected: self.schema_version.clone(),
                got: v.schema_version.clone(),
            });
        }
        self.predict(&v.values)
    }

    /// Checks that a table's columns are the ones this model was trained on.
    pub fn check_names(&self, names: &[String]) -> Result<(), LearnError> {
        if names != self.feature_names {
            return Err(LearnError::SchemaMismatch {
                expected: self.schema_version.clone(),
                got: schema_tag(names),
            });
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}

/// Residual sum of squares of the model's predictions.
pub fn rsse(model: &AssessmentModel, x: &[Vec<f64>], y: &[f64]) -> Result<f64, LearnError> {
    if x.len() != y.len() {
        return Err(LearnError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    x.iter()
        .zip(y)
        .map(|(r, t)| Ok((model.predict(r)? - t).powi(2)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_partitions_rows() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let src = SourceDataset::new(vec!["x".into()], x, y, "t").unwrap();
        let (train, test) = src.split(0.3, 9).unwrap();
        assert_eq!((train.len(), test.len()), (7, 3));
        let mut all: Vec<f64> = train.y.iter().chain(&test.y).copied().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, src.y);
        assert_eq!(src.split(0.3, 9).unwrap(), (train, test));
        assert!(src.split(1.0, 9).is_err());
    }

    fn meta() -> TrainingMetadata {
        TrainingMetadata {
            method: TrainingMethod::Plain,
            lasso_lambda: 0.0,
            members: 1,
            seed: None,
            weighted_bags: false,
            kmm: None,
            bag_sizes: vec![],
            bag_retries: 0,
            source_origin: "test".into(),
            source_count: 0,
            target_count: 0,
        }
    }

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    #[test]
    fn constant_model() {
        let m = AssessmentModel::from_members(
            names(3),
            None,
            vec![Member {
                a: vec![0.0; 3],
                b: 3.2,
            }],
            meta(),
        );
        assert_eq!(m.predict(&[5.0, -1.0, 9.0]).unwrap(), 3.2);
    }

    #[test]
    fn averaged_members_and_hand_dot_product() {
        let m = AssessmentModel::from_members(
            names(2),
            None,
            vec![
                Member {
                    a: vec![1.0, 2.0],
                    b: 0.5,
                },
                Member {
                    a: vec![3.0, 0.0],
                    b: 1.5,
                },
            ],
            meta(),
        );
        assert_eq!(m.a, vec![2.0, 1.0]);
        // 2*0.5 + 1*4 + 1
        assert!((m.predict(&[0.5, 4.0]).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rsse_algebra() {
        let b = 0.7;
        let m =
            AssessmentModel::from_members(names(1), None, vec![Member { a: vec![0.0], b }], meta());
        let y = [1.0, -2.0, 0.5, 0.5];
        let x: Vec<Vec<f64>> = y.iter().map(|_| vec![0.0]).collect();
        let want =
            y.iter().map(|v| v * v).sum::<f64>() + 4.0 * b * b - 2.0 * b * y.iter().sum::<f64>();
        assert!((rsse(&m, &x, &y).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn wrong_dimension() {
        let m = AssessmentModel::from_members(
            names(2),
            None,
            vec![Member {
                a: vec![0.0; 2],
                b: 0.0,
            }],
            meta(),
        );
        assert!(m.predict(&[1.0]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn json_round_trip_is_exact(a in proptest::collection::vec(-1e3f64..1e3, 1..6), b in -1e6f64..1e6) {
            let m = AssessmentModel::from_members(names(a.len()), None, vec![Member { a: a.clone(), b }], meta());
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.json");
            m.save(&path).unwrap();
            proptest::prop_assert_eq!(AssessmentModel::load(&path).unwrap(), m);
        }
    }
}
