use std::path::PathBuf;

use webcolor::config::Config;
use webcolor::pipeline::{run_demo, selftest};

#[test]
fn demo_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_demo(dir.path(), &Config::default()).unwrap();
    for f in [
        "source.csv",
        "target.csv",
        "model.json",
        "mask.png",
        "similarity.png",
        "source_theme.json",
        "results/ranking.json",
    ] {
        assert!(summary.files.contains(&PathBuf::from(f)), "missing {f}");
    }
    assert_eq!(summary.ranking.len(), 3);
    assert!(summary.ranking.windows(2).all(|w| w[0].1 >= w[1].1));
}

#[test]
fn selftest_is_deterministic() {
    let report = selftest(&Config {
        seed: 11,
        ..Config::default()
    })
    .unwrap();
    assert!(report.passed, "{:?}", report.mismatched);
    assert!(report.files_compared > 10);
    assert!(report.defaults.iter().all(|d| d.ok()));
}
