//! Exit codes and messages of the binary.

use std::fs;

mod common;
use common::{fixture_dir, sleeptopo};

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_lists_every_subcommand() {
    let o = sleeptopo(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for cmd in [
        "ingest",
        "features",
        "persistence",
        "select",
        "reduce",
        "evaluate",
        "plot",
        "run-all",
        "synth",
    ] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn unknown_keys_and_bad_values_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"inputs": [{"subject": "a", "epochs_csv": "e.csv", "sample_rate_hz": 100}], "sed": 1}"#,
    )
    .unwrap();
    let o = sleeptopo(&["-c", cfg.to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`sed`"), "{}", stderr(&o));

    fs::write(&cfg, r#"{"inputs": [{"subject": "a", "epochs_csv": "e.csv", "sample_rate_hz": 100}], "tda": {"max_eps": "huge"}}"#).unwrap();
    let o = sleeptopo(&["-c", cfg.to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tda.max_eps"), "{}", stderr(&o));

    let o = sleeptopo(&["ingest"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--config"));

    let o = sleeptopo(&["--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_upstream_exits_with_two_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_dir().join("config.json");
    let o = sleeptopo(&[
        "-c",
        cfg.to_str().unwrap(),
        "-o",
        dir.path().to_str().unwrap(),
        "select",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains(
            &dir.path()
                .join("features")
                .join("spectral.csv")
                .display()
                .to_string()
        ),
        "{}",
        stderr(&o)
    );
}

#[test]
fn overflowing_signal_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::from("subject_id,index,label\n");
    for k in 0..6 {
        rows.push_str(&format!("a,{k},W"));
        for i in 0..3000 {
            rows.push_str(if (i / (k + 2)) % 2 == 0 {
                ",1e200"
            } else {
                ",-1e200"
            });
        }
        rows.push('\n');
    }
    fs::write(dir.path().join("e.csv"), rows).unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"inputs": [{"subject": "a", "epochs_csv": "e.csv", "sample_rate_hz": 100}], "features": {"sets": ["spectral"]}}"#,
    )
    .unwrap();
    let o = sleeptopo(&["-c", cfg.to_str().unwrap(), "run-all"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("hjorth_activity"));
}

#[test]
fn unknown_channel_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_dir().join("config.json");
    let o = sleeptopo(&[
        "-c",
        cfg.to_str().unwrap(),
        "-o",
        dir.path().to_str().unwrap(),
        "--channel",
        "Pz-Oz",
        "ingest",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("EEG Fpz-Cz"), "{}", stderr(&o));
}

#[test]
fn synth_then_ingest_from_csv_epochs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let o = sleeptopo(&[
        "synth",
        data.to_str().unwrap(),
        "--subjects",
        "1",
        "--epochs",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cfg = data.join("config.json");
    let o = sleeptopo(&["-c", cfg.to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let epochs = fs::read_to_string(data.join("out").join("epochs.csv")).unwrap();
    let body: String = epochs.lines().skip(2).collect::<Vec<_>>().join("\n") + "\n";
    fs::write(dir.path().join("e.csv"), body).unwrap();
    let csv_cfg = dir.path().join("c.json");
    fs::write(
        &csv_cfg,
        r#"{"inputs": [{"subject": "s01", "epochs_csv": "e.csv", "sample_rate_hz": 100}]}"#,
    )
    .unwrap();
    let o = sleeptopo(&["-c", csv_cfg.to_str().unwrap(), "ingest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let again = fs::read_to_string(dir.path().join("out").join("epochs.csv")).unwrap();
    assert_eq!(
        again.lines().skip(1).collect::<Vec<_>>(),
        epochs.lines().skip(1).collect::<Vec<_>>()
    );
}
