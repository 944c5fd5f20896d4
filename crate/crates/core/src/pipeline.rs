//! A complete run on generated fixtures: train a model, locate a page's fixed
//! part, transfer it toward a reference collection and rank the results.
//! `selftest` runs it twice and compares every output byte for byte.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::color::{delta_e, ColorTheme};
use crate::config::{Config, DefaultCheck};
use crate::error::Error;
use crate::features::{extract_features, FeatureTable};
use crate::fixed::locate_by_block_sampling;
use crate::ingest::load_snapshot_set;
use crate::learn::{ensemble_train, SourceDataset, TargetDataset, TrainParams};
use crate::rng::{derive_seed, stream_rng, Stream};
use crate::synthetic::{banner_page, random_palette, stripe_page};
use crate::theme::{extract_theme, extract_theme_whole};
use crate::transfer::{
    build_collection, transfer_and_rank, write_results, CollectionParams, FixedPartMask,
    GlobalStatsTransfer, RankOptions,
};

/// Rating of a generated theme: smooth neighbor transitions score higher.
pub fn fixture_rating(theme: &ColorTheme) -> f64 {
    let adj: f64 = theme
        .colors
        .windows(2)
        .map(|w| delta_e(w[0], w[1]))
        .sum::<f64>()
        / 4.0;
    5.0 - adj / 25.0
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoSummary {
    pub source_theme: ColorTheme,
    pub source_score: f64,
    pub ranking: Vec<(String, f64)>,
    pub files: Vec<PathBuf>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

fn mkdir(path: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Runs the whole pipeline, writing everything under `out`.
pub fn run_demo(out: &Path, config: &Config) -> Result<DemoSummary, Error> {
    let seed = config.seed;
    let mut rng = stream_rng(seed, Stream::Synthetic, 0);
    let noise = Normal::new(0.0, 0.1).expect("valid normal");
    mkdir(out)?;

    // rated source themes
    let mut source = FeatureTable::themes();
    for i in 0..120 {
        let mut props = [0.0; 5];
        props.iter_mut().for_each(|p| *p = rng.gen_range(0.05..1.0));
        let theme = ColorTheme::new(random_palette(&mut rng, 10.0), props, format!("src{i:03}"))?;
        let rating = fixture_rating(&theme) + noise.sample(&mut rng);
        source.push_vector(
            format!("src{i:03}"),
            &extract_features(&theme),
            Some(rating),
        )?;
    }
    source.write_csv(&out.join("source.csv"))?;

    // unlabeled page themes
    let mut target = FeatureTable::themes();
    for i in 0..30 {
        let page = stripe_page(&random_palette(&mut rng, 20.0), 50, 10);
        let (theme, _) = extract_theme_whole(
            &page,
            &config.theme,
            derive_seed(seed, Stream::Clustering, i),
        )?;
        target.push_vector(format!("page{i:03}"), &extract_features(&theme), None)?;
    }
    target.write_csv(&out.join("target.csv"))?;

    let src =
        SourceDataset::from_table(FeatureTable::read_csv(&out.join("source.csv"))?, "fixture")?;
    let tgt = TargetDataset::from_table(FeatureTable::read_csv(&out.join("target.csv"))?)?;
    let params = TrainParams {
        members: 10,
        ..config.train
    };
    let model = ensemble_train(&src, &tgt, &params, derive_seed(seed, Stream::Bagging, 0))?;
    model.save(&out.join("model.json"))?;

    // source page: snapshots on disk, fixed part by block sampling
    let page = banner_page(&mut rng, config.snapshots.max(2));
    let snap_dir = out.join("source_snapshots");
    page.snapshots.save(&snap_dir)?;
    let set = load_snapshot_set(&snap_dir)?;
    let loc = locate_by_block_sampling(
        &set,
        &config.sampling,
        derive_seed(seed, Stream::Locator, 0),
    )?;
    let mask = FixedPartMask::from_location(&loc)?;
    mask.to_image().save_png(out.join("mask.png"))?;
    loc.similarity
        .to_image(&loc.grid)
        .save_png(out.join("similarity.png"))?;
    let (theme, _) = extract_theme(
        set.first(),
        &loc.grid,
        &loc.sampled,
        &config.theme,
        derive_seed(seed, Stream::Clustering, 1000),
    )?;
    write_json(&out.join("source_theme.json"), &theme)?;

    // references
    let coll_dir = out.join("collection");
    mkdir(&coll_dir)?;
    for i in 0..6 {
        stripe_page(&random_palette(&mut rng, 20.0), 40, 20)
            .save_png(coll_dir.join(format!("ref{i}.png")))?;
    }
    let only_theme = ColorTheme::uniform(random_palette(&mut rng, 20.0), "");
    std::fs::write(coll_dir.join("palette.json"), only_theme.to_json())
        .map_err(|e| Error::io(&coll_dir, e))?;
    let collection = build_collection(
        &coll_dir,
        &CollectionParams {
            theme: config.theme,
            sampling: config.sampling,
            seed,
        },
    )?;

    let opts = RankOptions {
        top_n: 3,
        theme: config.theme,
        seed,
        ..RankOptions::default()
    };
    let outcome = transfer_and_rank(
        set.first(),
        &mask,
        &collection,
        &model,
        &opts,
        &GlobalStatsTransfer,
    )?;
    write_results(&out.join("results"), &outcome)?;

    let files = list_files(out)?;
    Ok(DemoSummary {
        source_theme: outcome.source_theme.clone(),
        source_score: outcome.source_score,
        ranking: outcome
            .results
            .iter()
            .map(|r| (r.reference_id.clone(), r.score))
            .collect(),
        files,
    })
}

/// Regular files below `root`, relative and sorted.
pub fn list_files(root: &Path) -> Result<Vec<PathBuf>, Error> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let path = e.map_err(|e| Error::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).expect("below root").to_path_buf());
            }
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfTestReport {
    pub seed: u64,
    pub files_compared: usize,
    pub mismatched: Vec<PathBuf>,
    pub defaults: Vec<DefaultCheck>,
    pub seconds: f64,
    pub passed: bool,
}

/// Runs the demo twice with the same seed and diffs the outputs.
pub fn selftest(config: &Config) -> Result<SelfTestReport, Error> {
    let start = Instant::now();
    let a = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let b = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let first = run_demo(a.path(), config)?;
    let second = run_demo(b.path(), config)?;

    let mut mismatched = Vec::new();
    if first.files != second.files {
        mismatched.push(PathBuf::from("<file list>"));
    }
    for rel in &first.files {
        let x = std::fs::read(a.path().join(rel)).map_err(|e| Error::io(rel, e))?;
        let y = std::fs::read(b.path().join(rel)).ok();
        if y.as_deref() != Some(&x[..]) {
            mismatched.push(rel.clone());
        }
    }
    let defaults = Config::default().default_checks();
    let passed = mismatched.is_empty() && defaults.iter().all(DefaultCheck::ok);
    Ok(SelfTestReport {
        seed: config.seed,
        files_compared: first.files.len(),
        mismatched,
        defaults,
        seconds: start.elapsed().as_secs_f64(),
        passed,
    })
}
