#![allow(dead_code)]

use std::path::{Path, PathBuf};

use lasca::synthetic::{planted_dataset, PlantedConfig};

/// Small planted dataset: 6 subjects, quick to run with 3 folds.
pub fn small_planted() -> PlantedConfig {
    PlantedConfig { subjects: 6, segments_per_subject: 8, ..Default::default() }
}

/// Write planted CSVs into `dir` plus `lasca.toml` holding `grid` (TOML body
/// of the `[grid]` table) and `extra` (appended verbatim).
pub fn planted_config(dir: &Path, cfg: &PlantedConfig, grid: &str, extra: &str) -> PathBuf {
    planted_dataset(cfg).write_csv(dir).expect("write fixture");
    let toml = format!(
        "[paths]\nfacial_frames = \"facial.csv\"\naudio_frames = \"audio.csv\"\nannotations = \"annotations.csv\"\n\
         output_dir = \"runs\"\n\n[encoder]\nbackend = \"hashing\"\ndim = 32\n\n[grid]\n{grid}\n{extra}"
    );
    let path = dir.join("lasca.toml");
    std::fs::write(&path, toml).unwrap();
    path
}

pub const SMALL_GRID: &str = r#"dimensions = ["valence"]
windows = [3.0]
taus = [0.1, 0.2]
modalities = ["visual"]
representations = ["features_only", "fused"]
folds = 3
"#;

pub fn lasca(config: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["lasca".to_string(), "--config".into(), config.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    lasca::cli::run_cli(argv)
}
