//! End-to-end runs on the bundled synthetic dataset.

use std::fs;
use std::time::SystemTime;

use sleeptopo::config::FeatureSet;
use sleeptopo::synthetic::{write_dataset, SyntheticSpec};
use sleeptopo::{CliError, Pipeline, Stage};
use sleeptopo_core::dimred::Method;

mod common;
use common::{fixture_config, fixture_dir, run_all, snapshot};

fn mtimes(root: &std::path::Path) -> Vec<(std::path::PathBuf, SystemTime)> {
    sleeptopo::artifact::tree(root)
        .unwrap()
        .into_iter()
        .map(|p| {
            let t = fs::metadata(root.join(&p)).unwrap().modified().unwrap();
            (p, t)
        })
        .collect()
}

#[test]
fn bundled_dataset_matches_its_generator() {
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &SyntheticSpec::default()).unwrap();
    for name in [
        "config.json",
        "s01.edf",
        "s01_hypnogram.csv",
        "s02.edf",
        "s02_hypnogram.csv",
    ] {
        let fresh = fs::read(dir.path().join(name)).unwrap();
        let bundled = fs::read(fixture_dir().join(name)).unwrap();
        assert!(fresh == bundled, "{name} differs from the generator output");
    }
}

#[test]
fn run_all_writes_every_artifact_and_reuses_fresh_ones() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let cfg = fixture_config(&out, 1);
    let pipeline = Pipeline::new(cfg.clone(), false).unwrap();
    pipeline.run_all().unwrap();

    for set in [
        FeatureSet::Spectral,
        FeatureSet::Topological,
        FeatureSet::Combined,
    ] {
        assert!(pipeline.trace_path(set).exists());
        assert!(pipeline.kept_path(set).exists());
        for m in [Method::Pca, Method::Tsne, Method::Umap] {
            assert!(pipeline.embedding_path(set, m).exists());
            assert!(pipeline
                .embedding_path(set, m)
                .with_extension("json")
                .exists());
        }
    }
    assert!(pipeline.spectral_path().exists() && pipeline.topological_path().exists());
    let svgs = fs::read_dir(out.join("plots"))
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "svg")
        })
        .count();
    assert!(svgs >= 3, "{svgs} svgs");

    let report = fs::read_to_string(pipeline.report_path()).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert!(lines[0].starts_with("# config-hash: "));
    assert!(lines[1].starts_with("method,feature_set,ACC,MF1,kappa,W,N1,N2,N3,REM,"));
    assert_eq!(lines.len(), 2 + 3 * 4);
    assert!(lines.iter().any(|l| l.starts_with("Original,combined,")));
    let text = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(text.contains("Original / combined"));
    assert!(text.contains("t-SNE / topological"));

    let rows = pipeline.report_rows().unwrap();
    assert!(rows.iter().any(|r| r.tag() == "Original / combined"));
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.report.acc_mean));
        assert_eq!(r.report.variance_source, "subjects");
    }

    // A second run finds everything fresh and rewrites nothing.
    let before = mtimes(&out);
    let first = snapshot(&out);
    run_all(cfg.clone());
    assert_eq!(mtimes(&out), before);

    // A different thread count gives the same bytes.
    let other = dir.path().join("b");
    run_all(fixture_config(&other, 3));
    assert!(
        first == snapshot(&other),
        "artifact trees differ between thread counts"
    );

    // Changing the display filter only touches the diagram plots.
    let mut display = cfg.clone();
    display.tda.k0 = 50;
    run_all(display);
    for (path, t) in mtimes(&out) {
        let was = before.iter().find(|(p, _)| *p == path).unwrap().1;
        let name = path.to_string_lossy();
        assert_eq!(t != was, name.contains("diagram_"), "{name}");
    }
}

#[test]
fn stale_and_missing_upstream_artifacts_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path(), 0);
    let pipeline = Pipeline::new(cfg.clone(), false).unwrap();
    let err = pipeline.run(Stage::Features).unwrap_err();
    assert!(
        matches!(&err, CliError::MissingArtifact { path, .. } if path.ends_with("epochs.csv")),
        "{err}"
    );
    assert_eq!(err.exit_code(), 2);

    pipeline.run(Stage::Ingest).unwrap();
    let epochs = pipeline.epochs_path();
    let text = fs::read_to_string(&epochs).unwrap();
    let (_, body) = text.split_once('\n').unwrap();
    fs::write(&epochs, format!("# config-hash: 0000\n{body}")).unwrap();
    let err = pipeline.run(Stage::Persistence).unwrap_err();
    assert!(matches!(err, CliError::StaleArtifact { .. }), "{err}");

    // Rerunning the stage recomputes the stale artifact.
    pipeline.run(Stage::Ingest).unwrap();
    assert_eq!(fs::read_to_string(&epochs).unwrap(), text);
    pipeline.run(Stage::Persistence).unwrap();
    assert!(pipeline.persistence_index_path().exists());
}

#[test]
fn a_changed_seed_invalidates_seeded_artifacts_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fixture_config(dir.path(), 0);
    cfg.features.sets = vec![FeatureSet::Spectral];
    cfg.reduce.methods = vec!["pca".into()];
    let p = Pipeline::new(cfg.clone(), false).unwrap();
    p.run(Stage::Ingest).unwrap();
    p.run(Stage::Features).unwrap();
    let spectral = fs::read(p.spectral_path()).unwrap();
    cfg.seed = 99;
    let q = Pipeline::new(cfg, false).unwrap();
    q.run(Stage::Ingest).unwrap();
    q.run(Stage::Features).unwrap();
    assert_eq!(fs::read(q.spectral_path()).unwrap(), spectral);
    let err = q.run(Stage::Reduce).unwrap_err();
    assert!(matches!(err, CliError::MissingArtifact { .. }), "{err}");
}
