//! Bagged LASSO over weight-driven resamples.
//!
//! Every bag draws, for each source sample, `d ~ U[0, max β)` and keeps the
//! sample when `d < β_i`, so sample `i` enters with probability `β_i / max β`.
//! The averaged coefficients of the per-bag fits form the model.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmm::{kmm_weights, KmmParams, KmmWeights};
use super::lasso::{weighted_lasso, LassoParams};
use super::model::{
    AssessmentModel, KmmSummary, Member, SourceDataset, TargetDataset, TrainingMetadata,
    TrainingMethod,
};
use crate::error::{Error, LearnError};
use crate::features::{fit_pca, schema_tag, PcaModel};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub lasso: LassoParams,
    /// Ensemble size L.
    pub members: usize,
    pub kmm: KmmParams,
    /// With `false` every source weight is 1.
    pub use_kmm: bool,
    /// Fit each bag with the source weights instead of unit weights.
    pub weighted_bags: bool,
    /// Project features onto this many principal axes first.
    pub pca_components: Option<usize>,
    pub max_bag_attempts: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            lasso: LassoParams::default(),
            members: 50,
            kmm: KmmParams::default(),
            use_kmm: true,
            weighted_bags: false,
            pca_components: None,
            max_bag_attempts: 100,
        }
    }
}

/// One resample: indices `i` with `d_i < β_i`, `d_i` uniform on `[0, max β)`.
pub fn sample_bag<R: Rng>(beta: &[f64], max_beta: f64, rng: &mut R) -> Vec<usize> {
    (0..beta.len())
        .filter(|&i| {
            let d = rng.gen::<f64>() * max_beta;
            d < beta[i]
        })
        .collect()
}

fn check_schema(src: &SourceDataset, tgt: &TargetDataset) -> Result<(), LearnError> {
    if src.names != tgt.names {
        return Err(LearnError::SchemaMismatch {
            expected: src.schema_version(),
            got: schema_tag(&tgt.names),
        });
    }
    Ok(())
}

/// Optional PCA model plus the (projected) source and target rows.
type Projected = (Option<PcaModel>, Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Optional PCA fitted on the pooled source and target rows.
fn project(
    src: &SourceDataset,
    tgt: Option<&TargetDataset>,
    k: Option<usize>,
) -> Result<Projected, Error> {
    let tx = tgt.map_or(Vec::new(), |t| t.x.clone());
    let Some(k) = k else {
        return Ok((None, src.x.clone(), tx));
    };
    let pooled: Vec<Vec<f64>> = src.x.iter().chain(&tx).cloned().collect();
    let pca = fit_pca(&pooled, k, &src.names, &src.schema_version())?;
    let sx = pca.transform_rows(&src.x)?;
    let tz = pca.transform_rows(&tx)?;
    Ok((Some(pca), sx, tz))
}

fn metadata(
    method: TrainingMethod,
    src: &SourceDataset,
    tgt_len: usize,
    params: &TrainParams,
) -> TrainingMetadata {
    TrainingMetadata {
        method,
        lasso_lambda: params.lasso.lambda,
        members: 1,
        seed: None,
        weighted_bags: params.weighted_bags,
        kmm: None,
        bag_sizes: Vec::new(),
        bag_retries: 0,
        source_origin: src.origin.clone(),
        source_count: src.len(),
        target_count: tgt_len,
    }
}

/// Single unit-weight LASSO on the source.
pub fn train_plain(src: &SourceDataset, params: &TrainParams) -> Result<AssessmentModel, Error> {
    let (pca, sx, _) = project(src, None, params.pca_components)?;
    let fit = weighted_lasso(&sx, &src.y, &vec![1.0; src.len()], &params.lasso)?;
    let mut meta = metadata(TrainingMethod::Plain, src, 0, params);
    meta.bag_sizes = vec![src.len()];
    Ok(AssessmentModel::from_members(
        src.names.clone(),
        pca,
        vec![Member { a: fit.a, b: fit.b }],
        meta,
    ))
}

/// Single LASSO weighted by kernel-mean-matching weights.
pub fn train_weighted(
    src: &SourceDataset,
    tgt: &TargetDataset,
    params: &TrainParams,
) -> Result<AssessmentModel, Error> {
    check_schema(src, tgt)?;
    let (pca, sx, tx) = project(src, Some(tgt), params.pca_components)?;
    let w = kmm_weights(&sx, &tx, &params.kmm)?;
    let fit = weighted_lasso(&sx, &src.y, &w.beta, &params.lasso)?;
    let mut meta = metadata(TrainingMethod::Weighted, src, tgt.len(), params);
    meta.kmm = Some(KmmSummary::from(&w));
    meta.bag_sizes = vec![src.len()];
    Ok(AssessmentModel::from_members(
        src.names.clone(),
        pca,
        vec![Member { a: fit.a, b: fit.b }],
        meta,
    ))
}

/// The ensemble trainer: weights, `L` resampled bags, one LASSO per bag,
/// averaged coefficients. Bit-reproducible for a fixed seed.
pub fn ensemble_train(
    src: &SourceDataset,
    tgt: &TargetDataset,
    params: &TrainParams,
    seed: u64,
) -> Result<AssessmentModel, Error> {
    check_schema(src, tgt)?;
    if params.members == 0 {
        return Err(
            LearnError::InvalidParameter("ensemble needs at least one member".into()).into(),
        );
    }
    let (pca, sx, tx) = project(src, Some(tgt), params.pca_components)?;
    let weights: Option<KmmWeights> = if params.use_kmm {
        Some(kmm_weights(&sx, &tx, &params.kmm)?)
    } else {
        None
    };
    let beta = weights
        .as_ref()
        .map_or_else(|| vec![1.0; src.len()], |w| w.beta.clone());
    let members = fit_bags(&sx, &src.y, &beta, params, seed)?;

    let mut meta = metadata(TrainingMethod::Ensemble, src, tgt.len(), params);
    meta.members = params.members;
    meta.seed = Some(seed);
    meta.kmm = weights.as_ref().map(KmmSummary::from);
    meta.bag_sizes = members.iter().map(|(_, size, _)| *size).collect();
    meta.bag_retries = members.iter().map(|(_, _, retries)| *retries).sum();
    Ok(AssessmentModel::from_members(
        src.names.clone(),
        pca,
        members.into_iter().map(|(m, _, _)| m).collect(),
        meta,
    ))
}

/// Per-bag fits, each with its own random stream, gathered in bag order.
fn fit_bags(
    x: &[Vec<f64>],
    y: &[f64],
    beta: &[f64],
    params: &TrainParams,
    seed: u64,
) -> Result<Vec<(Member, usize, usize)>, LearnError> {
    let max_beta = beta.iter().copied().fold(0.0, f64::max);
    if max_beta <= 0.0 {
        return Err(LearnError::AllZeroWeights);
    }
    (0..params.members)
        .into_par_iter()
        .map(|l| {
            let mut rng = stream_rng(seed, Stream::Bagging, l as u64);
            let mut attempts = 0;
            let bag = loop {
                attempts += 1;
                let bag = sample_bag(beta, max_beta, &mut rng);
                if !bag.is_empty() {
                    break bag;
                }
                if attempts >= params.max_bag_attempts {
                    return Err(LearnError::EmptyBag { bag: l, attempts });
                }
            };
            let bx: Vec<Vec<f64>> = bag.iter().map(|&i| x[i].clone()).collect();
            let by: Vec<f64> = bag.iter().map(|&i| y[i]).collect();
            let bw: Vec<f64> = if params.weighted_bags {
                bag.iter().map(|&i| beta[i]).collect()
            } else {
                vec![1.0; bag.len()]
            };
            let fit = weighted_lasso(&bx, &by, &bw, &params.lasso)?;
            Ok((Member { a: fit.a, b: fit.b }, bag.len(), attempts - 1))
        })
        .collect()
}
