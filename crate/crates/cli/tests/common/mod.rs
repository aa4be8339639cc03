//! Shared helpers for the command-line test targets.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sleeptopo::artifact;
use sleeptopo::{Pipeline, PipelineConfig};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join("synthetic")
}

/// The bundled synthetic config, writing into `out`.
pub fn fixture_config(out: &Path, threads: usize) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(&fixture_dir().join("config.json")).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg.threads = threads;
    cfg
}

pub fn run_all(cfg: PipelineConfig) {
    Pipeline::new(cfg, false).unwrap().run_all().unwrap();
}

/// Relative path and bytes of every file under `root`.
pub fn snapshot(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    artifact::tree(root)
        .unwrap()
        .into_iter()
        .map(|p| {
            let bytes = fs::read(root.join(&p)).unwrap();
            (p, bytes)
        })
        .collect()
}

pub fn sleeptopo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sleeptopo"))
        .args(args)
        .output()
        .unwrap()
}
