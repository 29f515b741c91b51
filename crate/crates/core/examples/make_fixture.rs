//! Write a planted synthetic dataset plus a matching `lasca.toml`.
//!
//!     cargo run --release --example make_fixture -- demo/
//!     cargo run --release --bin lasca -- --config demo/lasca.toml run

use std::path::PathBuf;

use anyhow::Context;
use lasca::synthetic::{planted_dataset, PlantedConfig};

const CONFIG: &str = r#"verbosity = "info"

[paths]
facial_frames = "facial.csv"
audio_frames = "audio.csv"
annotations = "annotations.csv"
output_dir = "runs"

[encoder]
backend = "hashing"
dim = 128

[grid]
dimensions = ["valence"]
windows = [3.0, 5.0]
taus = [0.1, 0.2]
modalities = ["visual"]
representations = ["features_only", "fused"]
folds = 15
"#;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "fixture".into()));
    let seed = match args.next() {
        Some(s) => s.parse().context("seed must be an integer")?,
        None => PlantedConfig::default().seed,
    };
    std::fs::create_dir_all(&dir)?;
    let data = planted_dataset(&PlantedConfig { seed, ..Default::default() });
    let paths = data.write_csv(&dir)?;
    std::fs::write(dir.join("lasca.toml"), CONFIG)?;
    println!("{}\n{}\n{}", paths.facial.display(), paths.audio.display(), paths.annotations.display());
    println!("{}", dir.join("lasca.toml").display());
    Ok(())
}
