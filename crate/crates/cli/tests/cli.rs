use std::path::Path;
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use webcolor::color::{ColorRGB, ColorTheme};
use webcolor::features::{extract_features, FeatureTable};
use webcolor::learn::{train_plain, AssessmentModel, SourceDataset, TrainParams};
use webcolor::rng::{derive_seed, Stream};
use webcolor::synthetic::{banner_page, random_palette, stripe_page};
use webcolor::theme::{extract_theme_whole, ThemeParams};
use webcolor::transfer::{FixedPartMask, MaskSource};

fn webcolor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_webcolor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = webcolor(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_json(out: &Output) -> serde_json::Value {
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("an error line");
    serde_json::from_str(line).unwrap_or_else(|_| panic!("not JSON: {stderr}"))
}

fn rated_table(dir: &Path, n: usize) -> std::path::PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut table = FeatureTable::themes();
    for i in 0..n {
        let theme = ColorTheme::uniform(random_palette(&mut rng, 10.0), "");
        let rating = theme.colors.iter().map(|c| c.r).sum::<f64>();
        table
            .push_vector(format!("t{i}"), &extract_features(&theme), Some(rating))
            .unwrap();
    }
    let path = dir.join("source.csv");
    table.write_csv(&path).unwrap();
    path
}

#[test]
fn extracts_theme_from_snapshot_dir() {
    let dir = tempfile::tempdir().unwrap();
    let page = banner_page(&mut ChaCha8Rng::seed_from_u64(1), 5);
    let snaps = dir.path().join("snaps");
    page.snapshots.save(&snaps).unwrap();
    let theme_path = dir.path().join("theme.json");
    let swatch = dir.path().join("swatch.png");
    ok(&[
        "extract-theme",
        s(&snaps),
        "-o",
        s(&theme_path),
        "--swatch",
        s(&swatch),
    ]);
    let theme = ColorTheme::from_json(&std::fs::read_to_string(&theme_path).unwrap()).unwrap();
    assert_eq!(theme.colors.len(), 5);
    assert!((theme.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(swatch.is_file());
}

#[test]
fn single_image_without_locator_uses_whole_image() {
    let dir = tempfile::tempdir().unwrap();
    let palette = random_palette(&mut ChaCha8Rng::seed_from_u64(2), 25.0);
    let img = stripe_page(&palette, 50, 20);
    let png = dir.path().join("page.png");
    img.save_png(&png).unwrap();
    let out = ok(&["extract-theme", s(&png), "--locator", "none", "--seed", "9"]);
    let got = ColorTheme::from_json(&out).unwrap();
    let reloaded = webcolor::ingest::PageImage::load_png(&png).unwrap();
    let (want, _) = extract_theme_whole(
        &reloaded,
        &ThemeParams::default(),
        derive_seed(9, Stream::Clustering, 0),
    )
    .unwrap();
    assert_eq!(got.colors, want.colors);
}

#[test]
fn missing_input_reports_json_error() {
    let out = webcolor(&["extract-theme", "/nonexistent/snapshots"]);
    let err = error_json(&out);
    assert!(err["error"].is_string());
    assert!(err["message"]
        .as_str()
        .unwrap()
        .contains("/nonexistent/snapshots"));
}

#[test]
fn bad_arguments_report_json_error() {
    let out = webcolor(&["train", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "invalid_arguments");
}

#[test]
fn assess_matches_dot_product() {
    let dir = tempfile::tempdir().unwrap();
    let src_path = rated_table(dir.path(), 40);
    let src = SourceDataset::from_table(FeatureTable::read_csv(&src_path).unwrap(), "t").unwrap();
    let model = train_plain(&src, &TrainParams::default()).unwrap();
    let model_path = dir.path().join("model.json");
    model.save(&model_path).unwrap();

    let colors = [
        ColorRGB::new(0.9, 0.1, 0.1),
        ColorRGB::new(0.1, 0.8, 0.2),
        ColorRGB::new(0.2, 0.2, 0.7),
        ColorRGB::new(0.95, 0.95, 0.9),
        ColorRGB::new(0.1, 0.1, 0.1),
    ];
    let theme = ColorTheme::new(colors, [0.4, 0.2, 0.2, 0.1, 0.1], "fixture").unwrap();
    let theme_path = dir.path().join("fixture.json");
    std::fs::write(&theme_path, theme.to_json()).unwrap();

    let printed: f64 = ok(&["assess", "--model", s(&model_path), s(&theme_path)])
        .trim()
        .parse()
        .unwrap();
    let x = extract_features(&theme).values;
    let by_hand: f64 = model.a.iter().zip(&x).map(|(a, v)| a * v).sum::<f64>() + model.b;
    assert!(
        (printed - by_hand).abs() <= 1e-9 * by_hand.abs().max(1.0),
        "{printed} vs {by_hand}"
    );
}

#[test]
fn single_member_without_kmm_is_plain_lasso() {
    let dir = tempfile::tempdir().unwrap();
    let src_path = rated_table(dir.path(), 40);
    let model_path = dir.path().join("model.json");
    ok(&[
        "train",
        "--source",
        s(&src_path),
        "--no-kmm",
        "--L",
        "1",
        "-o",
        s(&model_path),
    ]);
    let got = AssessmentModel::load(&model_path).unwrap();
    let src = SourceDataset::from_table(FeatureTable::read_csv(&src_path).unwrap(), "t").unwrap();
    let want = train_plain(&src, &TrainParams::default()).unwrap();
    assert_eq!(got.a, want.a);
    assert_eq!(got.b, want.b);
}

#[test]
fn train_reports_holdout_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let src_path = rated_table(dir.path(), 40);
    let tgt_path = dir.path().join("target.csv");
    let mut tgt = FeatureTable::themes();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..15 {
        let theme = ColorTheme::uniform(random_palette(&mut rng, 10.0), "");
        tgt.push_vector(format!("p{i}"), &extract_features(&theme), None)
            .unwrap();
    }
    tgt.write_csv(&tgt_path).unwrap();
    let run = |name: &str| {
        let m = dir.path().join(name);
        let out = ok(&[
            "train",
            "--source",
            s(&src_path),
            "--target",
            s(&tgt_path),
            "--L",
            "5",
            "--holdout",
            "0.25",
            "--seed",
            "4",
            "-o",
            s(&m),
        ]);
        (
            std::fs::read(&m).unwrap(),
            serde_json::from_str::<serde_json::Value>(&out).unwrap(),
        )
    };
    let (a, summary) = run("m1.json");
    let (b, _) = run("m2.json");
    assert_eq!(a, b);
    assert_eq!(summary["holdout_count"], 10);
    assert!(summary["holdout_rsse"].as_f64().unwrap() >= 0.0);

    let rsse: f64 = ok(&[
        "eval-rsse",
        "--model",
        s(&dir.path().join("m1.json")),
        "--data",
        s(&src_path),
    ])
    .trim()
    .parse()
    .unwrap();
    assert!(rsse.is_finite() && rsse >= 0.0);
    let corr: serde_json::Value =
        serde_json::from_str(&ok(&["correlate", "--data", s(&src_path), "--top", "3"])).unwrap();
    assert_eq!(corr.as_array().unwrap().len(), 3);
}

#[test]
fn kmm_requires_a_target() {
    let dir = tempfile::tempdir().unwrap();
    let src_path = rated_table(dir.path(), 10);
    let out = webcolor(&[
        "train",
        "--source",
        s(&src_path),
        "-o",
        s(&dir.path().join("m.json")),
    ]);
    assert_eq!(error_json(&out)["error"], "invalid_arguments");
}

#[test]
fn transfer_keeps_top_three() {
    let dir = tempfile::tempdir().unwrap();
    let src_path = rated_table(dir.path(), 40);
    let model_path = dir.path().join("model.json");
    ok(&[
        "train",
        "--source",
        s(&src_path),
        "--no-kmm",
        "--L",
        "1",
        "-o",
        s(&model_path),
    ]);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let coll = dir.path().join("refs");
    std::fs::create_dir_all(&coll).unwrap();
    for i in 0..10 {
        stripe_page(&random_palette(&mut rng, 20.0), 40, 20)
            .save_png(coll.join(format!("r{i}.png")))
            .unwrap();
    }
    let source = stripe_page(&random_palette(&mut rng, 20.0), 60, 30);
    let source_path = dir.path().join("source.png");
    source.save_png(&source_path).unwrap();
    let mask = FixedPartMask::new(
        60,
        30,
        (0..1800).map(|i| i % 60 < 40).collect(),
        MaskSource::Manual,
    )
    .unwrap();
    let mask_path = dir.path().join("mask.png");
    mask.to_image().save_png(&mask_path).unwrap();

    let out_dir = dir.path().join("out");
    ok(&[
        "transfer",
        "--source",
        s(&source_path),
        "--mask",
        s(&mask_path),
        "--collection",
        s(&coll),
        "--model",
        s(&model_path),
        "--top",
        "3",
        "-o",
        s(&out_dir),
    ]);
    let mut files: Vec<String> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    assert_eq!(files.len(), 4, "{files:?}");
    assert!(files.contains(&"ranking.json".to_string()));
    assert_eq!(files.iter().filter(|f| f.ends_with(".png")).count(), 3);
    let ranking: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("ranking.json")).unwrap())
            .unwrap();
    let ranks: Vec<u64> = ranking
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["rank"].as_u64().unwrap())
        .collect();
    assert_eq!(ranks, [1, 2, 3]);
}

#[test]
fn eval_acs_prints_a_distance() {
    let dir = tempfile::tempdir().unwrap();
    let palette = random_palette(&mut ChaCha8Rng::seed_from_u64(6), 25.0);
    let png = dir.path().join("page.png");
    stripe_page(&palette, 50, 20).save_png(&png).unwrap();
    let theme_path = dir.path().join("theme.json");
    std::fs::write(&theme_path, ColorTheme::uniform(palette, "p").to_json()).unwrap();
    let v: f64 = ok(&["eval-acs", s(&png), "--theme", s(&theme_path)])
        .trim()
        .parse()
        .unwrap();
    // every palette color is present in the 8-bit page, up to quantization
    assert!(v < 0.5, "{v}");
}

#[test]
fn features_command_builds_a_rated_table() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let themes = dir.path().join("themes");
    std::fs::create_dir_all(&themes).unwrap();
    let mut ratings = String::from("id,rating\n");
    for i in 0..4 {
        let t = ColorTheme::uniform(random_palette(&mut rng, 10.0), "");
        std::fs::write(themes.join(format!("t{i}.json")), t.to_json()).unwrap();
        ratings += &format!("t{i},{}\n", i as f64 * 0.5);
    }
    let ratings_path = dir.path().join("ratings.csv");
    std::fs::write(&ratings_path, ratings).unwrap();
    let out = dir.path().join("table.csv");
    ok(&[
        "features",
        s(&themes),
        "--ratings",
        s(&ratings_path),
        "-o",
        s(&out),
    ]);
    let table = FeatureTable::read_csv(&out).unwrap();
    assert_eq!(table.ids, ["t0", "t1", "t2", "t3"]);
    assert_eq!(table.ratings.unwrap(), [0.0, 0.5, 1.0, 1.5]);
}

#[test]
fn locate_fixed_writes_mask_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let page = banner_page(&mut ChaCha8Rng::seed_from_u64(1), 3);
    let snaps = dir.path().join("snaps");
    page.snapshots.save(&snaps).unwrap();
    let out = dir.path().join("loc");
    let summary: serde_json::Value =
        serde_json::from_str(&ok(&["locate-fixed", s(&snaps), "-o", s(&out)])).unwrap();
    assert_eq!(summary["snapshots"], 3);
    for f in ["mask.png", "similarity.png", "location.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn selftest_passes() {
    let report: serde_json::Value =
        serde_json::from_str(&ok(&["selftest", "--seed", "3"])).unwrap();
    assert_eq!(report["passed"], true);
}
