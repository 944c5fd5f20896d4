use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::collection::ReferenceCollection;
use super::{ColorTransfer, FixedPartMask};
use crate::color::{delta_e, ColorTheme, THEME_SIZE};
use crate::error::{Error, TransferError};
use crate::features::extract_features;
use crate::ingest::PageImage;
use crate::learn::AssessmentModel;
use crate::rng::{derive_seed, Stream};
use crate::theme::{extract_theme_masked, permutations, ThemeParams};

#[derive(Debug, Clone, Copy)]
pub struct RankOptions {
    pub top_n: usize,
    /// Keep only references whose theme is within this distance of the source theme.
    pub similarity_threshold: Option<f64>,
    pub theme: ThemeParams,
    pub seed: u64,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            top_n: 5,
            similarity_threshold: None,
            theme: ThemeParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransferResult {
    pub reference_id: String,
    pub image: PageImage,
    pub theme: ColorTheme,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRecord {
    pub reference_id: String,
    pub score: f64,
    pub rank: usize,
    pub image: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RankOutcome {
    pub source_theme: ColorTheme,
    pub source_score: f64,
    pub results: Vec<TransferResult>,
    /// References whose transfer failed, with the reason.
    pub skipped: Vec<(String, String)>,
    /// References removed by the similarity gate.
    pub filtered: usize,
}

/// Mean per-slot ΔE under the best matching of the two themes' colors.
pub fn theme_distance(a: &ColorTheme, b: &ColorTheme) -> f64 {
    permutations()
        .iter()
        .map(|p| {
            (0..THEME_SIZE)
                .map(|i| delta_e(a.colors[i], b.colors[p[i]]))
                .sum::<f64>()
                / THEME_SIZE as f64
        })
        .fold(f64::INFINITY, f64::min)
}

/// Transfers the source's fixed part toward every reference, scores each
/// result's re-extracted theme, and keeps the best `top_n`.
pub fn transfer_and_rank(
    source: &PageImage,
    mask: &FixedPartMask,
    collection: &ReferenceCollection,
    model: &AssessmentModel,
    opts: &RankOptions,
    operator: &dyn ColorTransfer,
) -> Result<RankOutcome, Error> {
    if opts.top_n == 0 {
        return Err(TransferError::InvalidTopN.into());
    }
    mask.check_against(source)?;
    let seed = derive_seed(opts.seed, Stream::Clustering, 0);
    let score_of = |image: &PageImage| -> Result<(ColorTheme, f64), Error> {
        let (theme, _) = extract_theme_masked(image, mask.as_slice(), &opts.theme, seed)?;
        let score = model.predict_vector(&extract_features(&theme))?;
        Ok((theme, score))
    };
    let (source_theme, source_score) = score_of(source)?;

    let candidates: Vec<_> = collection
        .entries
        .iter()
        .filter(|e| {
            opts.similarity_threshold
                .is_none_or(|t| theme_distance(&source_theme, &e.theme) <= t)
        })
        .collect();
    let filtered = collection.len() - candidates.len();

    let jobs: Vec<Result<TransferResult, (String, String)>> = candidates
        .par_iter()
        .map(|entry| {
            let run = || -> Result<TransferResult, Error> {
                let out = operator.transfer(source, mask, &entry.reference_pixels)?;
                let (theme, score) = score_of(&out.image)?;
                Ok(TransferResult {
                    reference_id: entry.id.clone(),
                    image: out.image,
                    theme,
                    score,
                    rank: 0,
                })
            };
            run().map_err(|e| (entry.id.clone(), e.to_string()))
        })
        .collect();

    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for job in jobs {
        match job {
            Ok(r) => results.push(r),
            Err(s) => skipped.push(s),
        }
    }
    if !skipped.is_empty() {
        log::warn!("{} reference(s) skipped during transfer", skipped.len());
    }
    results.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.reference_id.cmp(&b.reference_id))
    });
    results.truncate(opts.top_n);
    for (i, r) in results.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(RankOutcome {
        source_theme,
        source_score,
        results,
        skipped,
        filtered,
    })
}

fn file_safe(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes one PNG per result and `ranking.json` into `dir`.
pub fn write_results(dir: &Path, outcome: &RankOutcome) -> Result<Vec<RankingRecord>, Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut records = Vec::with_capacity(outcome.results.len());
    for r in &outcome.results {
        let name = PathBuf::from(format!("{:02}_{}.png", r.rank, file_safe(&r.reference_id)));
        r.image.save_png(dir.join(&name))?;
        records.push(RankingRecord {
            reference_id: r.reference_id.clone(),
            score: r.score,
            rank: r.rank,
            image: name,
        });
    }
    let path = dir.join("ranking.json");
    let json = serde_json::to_string_pretty(&records).map_err(|e| Error::json(&path, e))?;
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(records)
}
