use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use webcolor::color::ColorTheme;
use webcolor::config::Config;
use webcolor::features::{extract_features, rank_correlations, FeatureTable};
use webcolor::fixed::{locate_by_block_sampling, synthesize_fixed_image};
use webcolor::ingest::{load_snapshot_set, ArchiveClient, PageImage, SnapshotSet};
use webcolor::learn::{ensemble_train, rsse, AssessmentModel, SourceDataset, TargetDataset};
use webcolor::pipeline::selftest;
use webcolor::rng::{derive_seed, Stream};
use webcolor::theme::{acs, extract_theme, extract_theme_whole, theme_swatch};
use webcolor::transfer::{
    build_collection, transfer_and_rank, write_results, CollectionParams, FixedPartMask,
    GlobalStatsTransfer, RankOptions,
};

use crate::{
    AssessArgs, Cli, Command, CorrelateArgs, EvalAcsArgs, EvalRsseArgs, ExtractThemeArgs,
    FeaturesArgs, FetchArgs, LocateFixedArgs, Locator, TrainArgs, TransferArgs,
};

#[derive(Debug)]
pub enum CliError {
    Lib(webcolor::Error),
    Usage(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.code(),
            CliError::Usage(_) => "invalid_arguments",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => e.fmt(f),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl<E: Into<webcolor::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Lib(e.into())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

pub fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match cli.command {
        Command::ExtractTheme(a) => extract_theme_cmd(a, &config),
        Command::LocateFixed(a) => locate_fixed_cmd(a, &config),
        Command::Features(a) => features_cmd(a),
        Command::Train(a) => train_cmd(a, &config),
        Command::Assess(a) => assess_cmd(a),
        Command::Transfer(a) => transfer_cmd(a, &config),
        Command::EvalAcs(a) => eval_acs_cmd(a),
        Command::EvalRsse(a) => eval_rsse_cmd(a),
        Command::Correlate(a) => correlate_cmd(a),
        Command::FetchSnapshots(a) => fetch_cmd(a),
        Command::Selftest => selftest_cmd(&config),
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable output")
    );
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| webcolor::Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| webcolor::Error::io(path, e))?;
    Ok(())
}

fn read_theme(path: &Path) -> Result<ColorTheme> {
    let text = std::fs::read_to_string(path).map_err(|e| webcolor::Error::io(path, e))?;
    Ok(ColorTheme::from_json(&text).map_err(|e| webcolor::Error::json(path, e))?)
}

/// A directory is a snapshot set; anything else is one image.
fn read_page(path: &Path) -> Result<SnapshotSet> {
    if path.is_dir() {
        Ok(load_snapshot_set(path)?)
    } else {
        let img = PageImage::load_png(path)?;
        Ok(SnapshotSet::new(path.display().to_string(), vec![img])?)
    }
}

fn extract_theme_cmd(a: ExtractThemeArgs, config: &Config) -> Result<()> {
    let set = read_page(&a.input)?;
    let locator = a.locator.unwrap_or(if a.input.is_dir() {
        Locator::BlockSampling
    } else {
        Locator::None
    });
    let mut params = config.theme;
    if let Some(l) = a.lambda {
        params.lambda = l;
    }
    params.plain_kmeans |= a.plain;
    let cluster_seed = derive_seed(config.seed, Stream::Clustering, 0);
    let (theme, _) = match locator {
        Locator::BlockSampling => {
            let loc = locate_by_block_sampling(
                &set,
                &config.sampling,
                derive_seed(config.seed, Stream::Locator, 0),
            )?;
            extract_theme(set.first(), &loc.grid, &loc.sampled, &params, cluster_seed)?
        }
        Locator::Synthesize => {
            extract_theme_whole(&synthesize_fixed_image(&set)?, &params, cluster_seed)?
        }
        Locator::None => extract_theme_whole(set.first(), &params, cluster_seed)?,
    };
    match &a.output {
        Some(p) => write_text(p, &theme.to_json())?,
        None => println!("{}", theme.to_json()),
    }
    if let Some(p) = &a.swatch {
        theme_swatch(&theme, 250, 50).save_png(p)?;
    }
    Ok(())
}

fn locate_fixed_cmd(a: LocateFixedArgs, config: &Config) -> Result<()> {
    let set = load_snapshot_set(&a.input)?;
    let out = &a.output;
    std::fs::create_dir_all(out).map_err(|e| webcolor::Error::io(out, e))?;
    match a.locator {
        Locator::BlockSampling => {
            let loc = locate_by_block_sampling(
                &set,
                &config.sampling,
                derive_seed(config.seed, Stream::Locator, 0),
            )?;
            let mask = FixedPartMask::from_location(&loc)?;
            mask.to_image().save_png(out.join("mask.png"))?;
            loc.similarity
                .to_image(&loc.grid)
                .save_png(out.join("similarity.png"))?;
            let location = json!({
                "n1": loc.grid.n1,
                "n2": loc.grid.n2,
                "similarity": loc.similarity,
                "sampled": loc.sampled,
            });
            write_text(
                &out.join("location.json"),
                &(serde_json::to_string_pretty(&location).expect("json") + "\n"),
            )?;
            let (w, h) = mask.dimensions();
            print_json(&json!({
                "snapshots": set.images().len(),
                "fixed_pixels": mask.count(),
                "total_pixels": w * h,
            }));
        }
        Locator::Synthesize => {
            synthesize_fixed_image(&set)?.save_png(out.join("synthesized.png"))?;
            print_json(&json!({ "snapshots": set.images().len(), "image": "synthesized.png" }));
        }
        Locator::None => return usage("locate-fixed needs a locator other than none"),
    }
    Ok(())
}

fn theme_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| webcolor::Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.extension()
                        .is_some_and(|x| x.eq_ignore_ascii_case("json"))
                })
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return usage("no theme files found");
    }
    Ok(out)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn read_ratings(path: &Path) -> Result<HashMap<String, f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(webcolor::Error::from)?;
    let headers = reader.headers().map_err(webcolor::Error::from)?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(id), Some(rating)) = (col("id"), col("rating")) else {
        return usage(format!(
            "{}: ratings need `id` and `rating` columns",
            path.display()
        ));
    };
    let mut out = HashMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(webcolor::Error::from)?;
        let value: f64 = rec[rating].trim().parse().map_err(|_| {
            CliError::Usage(format!("{}: bad rating `{}`", path.display(), &rec[rating]))
        })?;
        out.insert(rec[id].to_string(), value);
    }
    Ok(out)
}

fn features_cmd(a: FeaturesArgs) -> Result<()> {
    let files = theme_files(&a.inputs)?;
    let ratings = a.ratings.as_deref().map(read_ratings).transpose()?;
    let mut table = FeatureTable::themes();
    for f in &files {
        let id = stem(f);
        let rating = match &ratings {
            Some(r) => match r.get(&id) {
                Some(v) => Some(*v),
                None => return usage(format!("no rating for theme `{id}`")),
            },
            None => None,
        };
        table.push_vector(id, &extract_features(&read_theme(f)?), rating)?;
    }
    table.write_csv(&a.output)?;
    print_json(
        &json!({ "rows": table.len(), "columns": table.dim(), "schema_version": table.schema_version() }),
    );
    Ok(())
}

fn train_cmd(a: TrainArgs, config: &Config) -> Result<()> {
    let mut params = config.train;
    if let Some(l) = a.lambda {
        params.lasso.lambda = l;
    }
    if let Some(l) = a.members {
        params.members = l;
    }
    if let Some(b) = a.b {
        params.kmm.b = b;
    }
    if let Some(e) = a.epsilon {
        params.kmm.epsilon = e;
    }
    if a.sigma.is_some() {
        params.kmm.sigma = a.sigma;
    }
    params.use_kmm &= !a.no_kmm;
    params.weighted_bags |= a.weighted_bags;
    if a.pca.is_some() {
        params.pca_components = a.pca;
    }

    let source = SourceDataset::from_table(FeatureTable::read_csv(&a.source)?, stem(&a.source))?;
    let target = match &a.target {
        Some(p) => TargetDataset::from_table(FeatureTable::read_csv(p)?)?,
        None if !params.use_kmm => TargetDataset::new(source.names.clone(), source.x.clone())?,
        None => return usage("train needs --target unless --no-kmm is given"),
    };
    let (train, holdout) = match a.holdout {
        Some(f) => {
            let (t, h) = source.split(f, config.seed)?;
            (t, Some(h))
        }
        None => (source, None),
    };
    let model = ensemble_train(&train, &target, &params, config.seed)?;
    model.save(&a.output)?;

    let mut summary = json!({
        "model": a.output,
        "members": model.members.len(),
        "source_count": train.len(),
        "target_count": target.len(),
        "schema_version": model.schema_version,
    });
    if let Some(h) = holdout {
        summary["holdout_count"] = json!(h.len());
        summary["holdout_rsse"] = json!(rsse(&model, &h.x, &h.y)?);
    }
    print_json(&summary);
    Ok(())
}

fn is_csv(p: &Path) -> bool {
    p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv"))
}

fn assess_cmd(a: AssessArgs) -> Result<()> {
    let model = AssessmentModel::load(&a.model)?;
    let mut scores: Vec<(String, f64)> = Vec::new();
    for input in &a.inputs {
        if is_csv(input) {
            let table = FeatureTable::read_csv(input)?;
            model.check_names(&table.names)?;
            for (id, row) in table.ids.iter().zip(&table.rows) {
                scores.push((id.clone(), model.predict(row)?));
            }
        } else {
            let v = extract_features(&read_theme(input)?);
            scores.push((stem(input), model.predict_vector(&v)?));
        }
    }
    match scores.as_slice() {
        [(_, s)] => println!("{s}"),
        _ => scores.iter().for_each(|(id, s)| println!("{id}\t{s}")),
    }
    Ok(())
}

fn transfer_cmd(a: TransferArgs, config: &Config) -> Result<()> {
    let set = read_page(&a.source)?;
    let source = set.first();
    let mask = match (&a.mask, a.auto_mask) {
        (Some(_), true) => return usage("pass either --mask or --auto-mask, not both"),
        (Some(p), false) => FixedPartMask::from_png(p)?,
        (None, true) => {
            let loc = locate_by_block_sampling(
                &set,
                &config.sampling,
                derive_seed(config.seed, Stream::Locator, 0),
            )?;
            FixedPartMask::from_location(&loc)?
        }
        (None, false) => {
            return usage("transfer needs --mask, or --auto-mask with a snapshot directory")
        }
    };
    let model = AssessmentModel::load(&a.model)?;
    let collection = build_collection(
        &a.collection,
        &CollectionParams {
            theme: config.theme,
            sampling: config.sampling,
            seed: config.seed,
        },
    )?;
    let opts = RankOptions {
        top_n: a.top.unwrap_or(config.top_n),
        similarity_threshold: a.threshold,
        theme: config.theme,
        seed: config.seed,
    };
    let outcome = transfer_and_rank(
        source,
        &mask,
        &collection,
        &model,
        &opts,
        &GlobalStatsTransfer,
    )?;
    let records = write_results(&a.output, &outcome)?;
    for (id, why) in &outcome.skipped {
        log::warn!("skipped reference {id}: {why}");
    }
    print_json(&json!({
        "source_score": outcome.source_score,
        "results": records,
        "skipped": outcome.skipped.len(),
        "filtered": outcome.filtered,
    }));
    Ok(())
}

fn eval_acs_cmd(a: EvalAcsArgs) -> Result<()> {
    let set = read_page(&a.image)?;
    let image = set.first();
    let theme = read_theme(&a.theme)?;
    let lab = image.to_lab();
    let pixels = match &a.mask {
        Some(p) => {
            let mask = FixedPartMask::from_png(p)?;
            mask.check_against(image)?;
            lab.into_iter()
                .zip(mask.as_slice())
                .filter(|(_, &m)| m)
                .map(|(p, _)| p)
                .collect()
        }
        None => lab,
    };
    println!("{}", acs(&pixels, &theme)?);
    Ok(())
}

fn rated(path: &Path) -> Result<FeatureTable> {
    let table = FeatureTable::read_csv(path)?;
    if table.ratings.is_none() {
        return usage(format!("{}: table has no rating column", path.display()));
    }
    Ok(table)
}

fn eval_rsse_cmd(a: EvalRsseArgs) -> Result<()> {
    let model = AssessmentModel::load(&a.model)?;
    let table = rated(&a.data)?;
    model.check_names(&table.names)?;
    let y = table.ratings.as_deref().expect("checked above");
    println!("{}", rsse(&model, &table.rows, y)?);
    Ok(())
}

fn correlate_cmd(a: CorrelateArgs) -> Result<()> {
    let table = rated(&a.data)?;
    let y = table.ratings.as_deref().expect("checked above");
    let mut corr = rank_correlations(&table.rows, y, &table.names)?;
    if let Some(n) = a.top {
        corr.truncate(n);
    }
    print_json(&corr);
    Ok(())
}

fn fetch_cmd(a: FetchArgs) -> Result<()> {
    let mut client = ArchiveClient {
        timeout: std::time::Duration::from_secs(a.timeout),
        ..ArchiveClient::default()
    };
    if let Some(t) = a.list_template {
        client.list_template = t;
    }
    if let Some(t) = a.image_template {
        client.image_template = t;
    }
    let saved = client.fetch(&a.url, a.count, &a.output)?;
    print_json(&saved);
    Ok(())
}

fn selftest_cmd(config: &Config) -> Result<()> {
    let report = selftest(config)?;
    print_json(&report);
    if !report.passed {
        return Err(webcolor::Error::SelfTest(format!(
            "{} mismatched outputs, defaults ok: {}",
            report.mismatched.len(),
            report.defaults.iter().all(|d| d.ok())
        ))
        .into());
    }
    Ok(())
}
