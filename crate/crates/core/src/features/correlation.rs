use serde::{Deserialize, Serialize};

use crate::error::FeatureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationSign {
    Positive,
    Negative,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub name: String,
    pub r: f64,
    pub sign: CorrelationSign,
}

/// Pearson correlation; zero when either side has no variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.is_empty() {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Correlation of every feature column with the ratings, strongest first.
/// Equal magnitudes keep schema order.
pub fn rank_correlations(
    rows: &[Vec<f64>],
    ratings: &[f64],
    names: &[String],
) -> Result<Vec<FeatureCorrelation>, FeatureError> {
    if rows.len() != ratings.len() {
        return Err(FeatureError::DimensionMismatch {
            expected: rows.len(),
            got: ratings.len(),
        });
    }
    if rows.len() < 2 {
        return Err(FeatureError::TooFewSamples {
            need: 2,
            got: rows.len(),
        });
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != names.len()) {
        return Err(FeatureError::DimensionMismatch {
            expected: names.len(),
            got: bad.len(),
        });
    }
    let mut out: Vec<FeatureCorrelation> = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            let r = pearson(&column, ratings);
            let sign = if r > 0.0 {
                CorrelationSign::Positive
            } else if r < 0.0 {
                CorrelationSign::Negative
            } else {
                CorrelationSign::None
            };
            FeatureCorrelation {
                name: name.clone(),
                r,
                sign,
            }
        })
        .collect();
    // stable sort keeps schema order on ties
    out.sort_by(|a, b| b.r.abs().total_cmp(&a.r.abs()));
    Ok(out)
}
