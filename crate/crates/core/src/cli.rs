//! The `lasca` command-line front end.
//!
//! Everything is driven by one TOML file (see [`RunConfig`]). Grid cells are
//! numbered in expansion order (lexicon mode, modality, dimension, window,
//! tau, representation); `lasca validate` prints the numbering. Each cell's
//! fold results live under `<output>/cells/<digest>/`, where the digest covers
//! the cell config and a fingerprint of every input file, so `lasca run` only
//! recomputes what changed.
//!
//! Exit codes: 0 success, 1 data or validation error, 2 usage or config error.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context as _};
use clap::{ArgAction, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{
    batch_encode_str, BackendKind, EmbeddingRecord, EncoderSpec, ExternalEncoder, HashingEncoder, Pooling,
    PrecomputedStore, SentenceEncoder, TemplateDumpRecord, DEFAULT_HASHING_DIM,
};
use crate::ingest::{
    build_window_set, fit_normalizer, load_annotations, load_frames, AnnotationRecord, FeatureWindow, FrameRecord,
    Modality, NormStats, WindowSet,
};
use crate::io::{atomic_write, read_jsonl, sha256_hex, to_jsonl};
use crate::learner::{self, PreferenceHead};
use crate::lexicon::{load_lexicon, validate_coverage, LexiconMode, SemanticLexicon, Strictness};
use crate::preference::{audit_pairs, build_pairs, AffectDimension};
use crate::protocol::experiment::{pairs_with_norm, window_views};
use crate::protocol::{
    fit_head, prepare_fold, render_report, run_experiment, CellResult, ExperimentConfig, ExperimentData,
    ExperimentModality, ExperimentOutcome, Lexicons, Report, Representation, SplitMode, SubjectSplit, TrainingConfig,
};

pub const RUN_DIR_ENV: &str = "LASCA_RUN_DIR";
pub const MODEL_FORMAT: &str = "lasca-model/1";
const COMPLETE_MARKER: &str = "COMPLETE";

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation or configuration (exit 2).
    #[error("{0:#}")]
    Usage(anyhow::Error),
    /// Bad or incomplete data, or a failed computation (exit 1).
    #[error("{0:#}")]
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

trait Classify<T> {
    fn usage(self) -> CliResult<T>;
    fn data(self) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> CliResult<T> {
        self.map_err(|e| CliError::Usage(e.into()))
    }
    fn data(self) -> CliResult<T> {
        self.map_err(|e| CliError::Data(e.into()))
    }
}

// ---------------------------------------------------------------------------
// configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub strict_lexicon: bool,
    /// Log level when no `-v` is given: error, warn, info, debug or trace.
    #[serde(default = "default_verbosity")]
    pub verbosity: String,
    pub paths: PathsConfig,
    #[serde(default)]
    pub encoder: EncoderConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub training: TrainingConfig,
}

fn default_verbosity() -> String {
    "warn".into()
}

/// Input and output locations; relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub facial_frames: Option<PathBuf>,
    pub audio_frames: Option<PathBuf>,
    pub annotations: PathBuf,
    /// Custom lexicon files; the bundled lexicons are used when absent.
    pub facial_lexicon: Option<PathBuf>,
    pub audio_lexicon: Option<PathBuf>,
    /// Precomputed-embedding JSON Lines file (precomputed backend).
    pub embedding_store: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderConfig {
    #[serde(default = "default_backend")]
    pub backend: BackendKind,
    /// Encoder name; required for the precomputed and external backends.
    pub name: Option<String>,
    pub dim: Option<usize>,
    pub pooling: Option<Pooling>,
    /// Exporter program for the external backend.
    pub command: Option<PathBuf>,
    /// Value passed to the exporter's `--model`; defaults to `name`.
    pub model: Option<String>,
}

fn default_backend() -> BackendKind {
    BackendKind::Hashing
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self { backend: default_backend(), name: None, dim: None, pooling: None, command: None, model: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dimensions: Vec<AffectDimension>,
    pub windows: Vec<f64>,
    pub taus: Vec<f64>,
    pub modalities: Vec<ExperimentModality>,
    pub representations: Vec<Representation>,
    pub lexicon_modes: Vec<LexiconMode>,
    pub folds: usize,
    pub split: SplitMode,
    pub test_fraction: f64,
    pub seed_base: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dimensions: vec![AffectDimension::Arousal, AffectDimension::Valence],
            windows: vec![3.0, 5.0],
            taus: vec![0.10, 0.20],
            modalities: vec![ExperimentModality::Visual, ExperimentModality::Audio, ExperimentModality::Multimodal],
            representations: vec![Representation::FeaturesOnly, Representation::TextOnly, Representation::Fused],
            lexicon_modes: vec![LexiconMode::AffectAware],
            folds: 15,
            split: SplitMode::Kfold,
            test_fraction: 0.2,
            seed_base: 0,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> CliResult<Self> {
        let mut cfg: RunConfig = toml::from_str(text).context("invalid config").usage()?;
        cfg.resolve_paths(base_dir);
        cfg.check().usage()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))
            .usage()?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            CliError::Usage(e) => CliError::Usage(e.context(format!("config {}", path.display()))),
            other => other,
        })
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        for opt in [&mut p.facial_frames, &mut p.audio_frames, &mut p.facial_lexicon, &mut p.audio_lexicon, &mut p.embedding_store] {
            if let Some(path) = opt.as_mut() {
                fix(path);
            }
        }
        fix(&mut p.annotations);
        fix(&mut p.output_dir);
        // a bare program name is looked up on PATH
        if let Some(cmd) = self.encoder.command.as_mut() {
            if cmd.components().count() > 1 {
                fix(cmd);
            }
        }
    }

    fn check(&self) -> anyhow::Result<()> {
        let g = &self.grid;
        let empty = [
            ("dimensions", g.dimensions.is_empty()),
            ("windows", g.windows.is_empty()),
            ("taus", g.taus.is_empty()),
            ("modalities", g.modalities.is_empty()),
            ("representations", g.representations.is_empty()),
            ("lexicon_modes", g.lexicon_modes.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            anyhow::bail!("grid.{name} must not be empty");
        }
        let needs = |m: Modality| g.modalities.iter().any(|x| x.blocks().contains(&m));
        if needs(Modality::Facial) && self.paths.facial_frames.is_none() {
            anyhow::bail!("the grid uses facial features but paths.facial_frames is not set");
        }
        if needs(Modality::Audio) && self.paths.audio_frames.is_none() {
            anyhow::bail!("the grid uses audio features but paths.audio_frames is not set");
        }
        if self.uses_text() {
            match self.encoder.backend {
                BackendKind::Precomputed if self.paths.embedding_store.is_none() => {
                    anyhow::bail!("the precomputed backend needs paths.embedding_store")
                }
                BackendKind::External if self.encoder.command.is_none() => {
                    anyhow::bail!("the external backend needs encoder.command")
                }
                _ => {}
            }
        }
        log_level(&self.verbosity)?;
        self.cells()?;
        Ok(())
    }

    pub fn uses_text(&self) -> bool {
        self.grid.representations.iter().any(|r| r.uses_text())
    }

    pub fn strictness(&self) -> Strictness {
        if self.strict_lexicon {
            Strictness::Strict
        } else {
            Strictness::Lenient
        }
    }

    pub fn encoder_spec(&self) -> anyhow::Result<EncoderSpec> {
        let e = &self.encoder;
        let spec = match e.backend {
            BackendKind::Hashing => EncoderSpec::hashing(e.dim.unwrap_or(DEFAULT_HASHING_DIM).max(1)),
            backend => {
                let name = e.name.as_deref().ok_or_else(|| anyhow!("encoder.name is required for this backend"))?;
                match EncoderSpec::pretrained(name, backend) {
                    Some(mut spec) => {
                        if let Some(dim) = e.dim {
                            spec.dim = dim;
                        }
                        spec
                    }
                    None => EncoderSpec {
                        name: name.to_string(),
                        dim: e.dim.ok_or_else(|| anyhow!("encoder.dim is required for unknown encoder `{name}`"))?,
                        pooling: e.pooling.unwrap_or(Pooling::Mean),
                        backend,
                    },
                }
            }
        };
        if e.backend == BackendKind::Hashing && e.dim == Some(0) {
            anyhow::bail!("encoder.dim must be positive");
        }
        spec.validate().map_err(|m| anyhow!(m))?;
        Ok(spec)
    }

    /// Every grid cell in a fixed order. Feature-only cells do not depend on
    /// the lexicon, so they appear once, under the first lexicon mode.
    pub fn cells(&self) -> anyhow::Result<Vec<ExperimentConfig>> {
        let g = &self.grid;
        let encoder = self.encoder_spec()?;
        let mut out = Vec::new();
        for (li, &mode) in g.lexicon_modes.iter().enumerate() {
            for &modality in &g.modalities {
                for &dimension in &g.dimensions {
                    for &window in &g.windows {
                        for &tau in &g.taus {
                            for &representation in &g.representations {
                                if representation == Representation::FeaturesOnly && li > 0 {
                                    continue;
                                }
                                let mut c = ExperimentConfig::new(dimension, window, tau, modality, representation);
                                c.encoder = encoder.clone();
                                c.lexicon_mode = mode;
                                c.folds = g.folds;
                                c.split = g.split;
                                c.test_fraction = g.test_fraction;
                                c.seed_base = g.seed_base;
                                c.training = self.training.clone();
                                c.strictness = self.strictness();
                                c.validate()?;
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One-line description of a cell for logs and listings.
pub fn describe_cell(c: &ExperimentConfig) -> String {
    format!(
        "{} {} {}s tau={} {} [{} / {}]",
        c.modality.as_str(),
        c.dimension.as_str(),
        c.window_len,
        c.tau,
        c.representation.as_str(),
        c.encoder.name,
        c.lexicon_mode.as_str()
    )
}

fn log_level(name: &str) -> anyhow::Result<log::LevelFilter> {
    name.parse().map_err(|_| anyhow!("unknown verbosity `{name}`"))
}

// ---------------------------------------------------------------------------
// context

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub force: bool,
    pub strict_lexicon: bool,
    pub seed_base: Option<u64>,
    pub jobs: Option<usize>,
    /// Replaces `paths.output_dir` (normally from `LASCA_RUN_DIR`).
    pub run_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn with_env(mut self) -> Self {
        if self.run_dir.is_none() {
            self.run_dir = std::env::var_os(RUN_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        }
        self
    }
}

pub struct Context {
    pub config: RunConfig,
    pub output_root: PathBuf,
    pub force: bool,
    pub jobs: Option<usize>,
}

impl Context {
    pub fn new(mut config: RunConfig, overrides: &Overrides) -> CliResult<Self> {
        if overrides.strict_lexicon {
            config.strict_lexicon = true;
        }
        if let Some(seed) = overrides.seed_base {
            config.grid.seed_base = seed;
        }
        if overrides.jobs == Some(0) {
            return Err(CliError::Usage(anyhow!("--jobs must be at least 1")));
        }
        config.check().usage()?;
        let output_root = overrides.run_dir.clone().unwrap_or_else(|| config.paths.output_dir.clone());
        Ok(Self { config, output_root, force: overrides.force, jobs: overrides.jobs })
    }

    pub fn load(config_path: &Path, overrides: &Overrides) -> CliResult<Self> {
        Self::new(RunConfig::load(config_path)?, overrides)
    }

    pub fn cells(&self) -> CliResult<Vec<ExperimentConfig>> {
        self.config.cells().usage()
    }

    fn cell(&self, index: usize) -> CliResult<ExperimentConfig> {
        let cells = self.cells()?;
        let n = cells.len();
        cells
            .into_iter()
            .nth(index)
            .ok_or_else(|| CliError::Usage(anyhow!("cell {index} does not exist; the grid has {n} cells")))
    }

    fn cells_dir(&self) -> PathBuf {
        self.output_root.join("cells")
    }
}

// ---------------------------------------------------------------------------
// data

/// Frames and annotations named by the config, plus a digest of their bytes.
pub struct LoadedData {
    pub facial: Option<Vec<FrameRecord>>,
    pub audio: Option<Vec<FrameRecord>>,
    pub annotations: Vec<AnnotationRecord>,
    pub fingerprint: String,
}

fn needed_blocks(grid: &GridConfig) -> Vec<Modality> {
    let mut out: Vec<Modality> = Vec::new();
    for m in grid.modalities.iter().flat_map(|m| m.blocks()) {
        if !out.contains(m) {
            out.push(*m);
        }
    }
    out.sort();
    out
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display())).data()
}

pub fn load_data(cfg: &RunConfig) -> CliResult<LoadedData> {
    let mut fp = Vec::new();
    let mut add = |tag: &str, bytes: &[u8]| {
        fp.extend_from_slice(tag.as_bytes());
        fp.extend_from_slice(sha256_hex(bytes).as_bytes());
    };
    let blocks = needed_blocks(&cfg.grid);
    let mut facial = None;
    let mut audio = None;
    for m in &blocks {
        let path = match m {
            Modality::Facial => cfg.paths.facial_frames.as_ref(),
            Modality::Audio => cfg.paths.audio_frames.as_ref(),
        }
        .ok_or_else(|| CliError::Usage(anyhow!("no frame file for {} features", m.as_str())))?;
        add(m.as_str(), &read_bytes(path)?);
        let frames = load_frames(path, *m).with_context(|| format!("{}", path.display())).data()?;
        match m {
            Modality::Facial => facial = Some(frames),
            Modality::Audio => audio = Some(frames),
        }
    }
    add("annotations", &read_bytes(&cfg.paths.annotations)?);
    let annotations = load_annotations(&cfg.paths.annotations)
        .with_context(|| format!("{}", cfg.paths.annotations.display()))
        .data()?;
    for (tag, path) in [("facial_lexicon", &cfg.paths.facial_lexicon), ("audio_lexicon", &cfg.paths.audio_lexicon)] {
        if let Some(p) = path {
            add(tag, &read_bytes(p)?);
        }
    }
    if cfg.uses_text() {
        match cfg.encoder.backend {
            BackendKind::Precomputed => {
                if let Some(p) = &cfg.paths.embedding_store {
                    // a missing store is reported by `validate`; hash what exists
                    add("store", &std::fs::read(p).unwrap_or_default());
                }
            }
            BackendKind::External => {
                let cmd = cfg.encoder.command.as_deref().map(|c| c.display().to_string()).unwrap_or_default();
                add("exporter", format!("{cmd}\n{:?}", cfg.encoder.model).as_bytes());
            }
            BackendKind::Hashing => {}
        }
    }
    Ok(LoadedData { facial, audio, annotations, fingerprint: sha256_hex(&fp) })
}

impl LoadedData {
    pub fn window_set(&self, window_len: f64) -> CliResult<WindowSet> {
        let mut blocks: Vec<(Modality, &[FrameRecord])> = Vec::new();
        if let Some(f) = &self.facial {
            blocks.push((Modality::Facial, f));
        }
        if let Some(a) = &self.audio {
            blocks.push((Modality::Audio, a));
        }
        build_window_set(&blocks, &self.annotations, window_len).data()
    }

    /// Window sets for every window length, keyed by the length's bits.
    fn window_sets(&self, lengths: impl IntoIterator<Item = f64>) -> CliResult<BTreeMap<u64, WindowSet>> {
        let mut out = BTreeMap::new();
        for len in lengths {
            if let std::collections::btree_map::Entry::Vacant(e) = out.entry(len.to_bits()) {
                e.insert(self.window_set(len)?);
            }
        }
        Ok(out)
    }
}

pub fn load_lexicons(cfg: &RunConfig, mode: LexiconMode) -> CliResult<Lexicons> {
    let get = |m: Modality, path: &Option<PathBuf>| -> CliResult<SemanticLexicon> {
        let lex = match path {
            Some(p) => load_lexicon(p, mode).with_context(|| format!("lexicon {}", p.display())).data()?,
            None => SemanticLexicon::builtin(m, mode),
        };
        if lex.modality != m {
            return Err(CliError::Data(anyhow!(
                "lexicon for {} features declares modality `{}`",
                m.as_str(),
                lex.modality.as_str()
            )));
        }
        Ok(lex)
    };
    Ok(Lexicons {
        facial: get(Modality::Facial, &cfg.paths.facial_lexicon)?,
        audio: get(Modality::Audio, &cfg.paths.audio_lexicon)?,
    })
}

pub fn build_encoder(cfg: &RunConfig) -> CliResult<Arc<dyn SentenceEncoder>> {
    let spec = cfg.encoder_spec().usage()?;
    Ok(match spec.backend {
        BackendKind::Hashing => Arc::new(HashingEncoder::new(spec.dim)),
        BackendKind::Precomputed => {
            let path = cfg.paths.embedding_store.as_ref().ok_or_else(|| CliError::Usage(anyhow!("paths.embedding_store is not set")))?;
            Arc::new(PrecomputedStore::load(spec, path).data()?)
        }
        BackendKind::External => {
            let cmd = cfg.encoder.command.clone().ok_or_else(|| CliError::Usage(anyhow!("encoder.command is not set")))?;
            let model = cfg.encoder.model.clone().unwrap_or_else(|| spec.name.clone());
            Arc::new(ExternalEncoder::new(spec, cmd, model))
        }
    })
}

/// Everything a grid cell needs, loaded once.
struct Workspace {
    data: LoadedData,
    windows: BTreeMap<u64, WindowSet>,
    lexicons: BTreeMap<LexiconMode, Lexicons>,
    encoder: Arc<dyn SentenceEncoder>,
}

impl Workspace {
    fn open(ctx: &Context, with_encoder: bool) -> CliResult<Self> {
        let cfg = &ctx.config;
        let data = load_data(cfg)?;
        let windows = data.window_sets(cfg.grid.windows.iter().copied())?;
        let mut lexicons = BTreeMap::new();
        for &mode in &cfg.grid.lexicon_modes {
            lexicons.insert(mode, load_lexicons(cfg, mode)?);
        }
        let encoder: Arc<dyn SentenceEncoder> = if with_encoder && cfg.uses_text() {
            build_encoder(cfg)?
        } else {
            Arc::new(HashingEncoder::new(1))
        };
        Ok(Self { data, windows, lexicons, encoder })
    }

    fn experiment_data(&self, cell: &ExperimentConfig) -> CliResult<ExperimentData<'_>> {
        let windows = self
            .windows
            .get(&cell.window_len.to_bits())
            .ok_or_else(|| CliError::Usage(anyhow!("window length {} is not in the grid", cell.window_len)))?;
        let lexicons = self
            .lexicons
            .get(&cell.lexicon_mode)
            .ok_or_else(|| CliError::Usage(anyhow!("lexicon mode {} is not in the grid", cell.lexicon_mode.as_str())))?;
        Ok(ExperimentData { windows, lexicons, encoder: self.encoder.as_ref() })
    }

    fn subjects(&self, window_len: f64) -> Vec<String> {
        self.windows
            .get(&window_len.to_bits())
            .map(|ws| ws.windows.iter().map(|w| w.subject_id.clone()).collect::<BTreeSet<_>>().into_iter().collect())
            .unwrap_or_default()
    }
}

pub fn cell_digest(cell: &ExperimentConfig, fingerprint: &str) -> String {
    let json = serde_json::to_string(cell).expect("config serialises");
    sha256_hex(format!("{json}\n{fingerprint}").as_bytes())[..16].to_string()
}

// ---------------------------------------------------------------------------
// templates

/// Distinct templates for one (window, modality, lexicon mode) context under
/// the given normaliser, over the given windows.
fn template_texts(
    ws: &WindowSet,
    windows: &[&FeatureWindow],
    norm: &NormStats,
    modality: ExperimentModality,
    lexicons: &Lexicons,
    strictness: Strictness,
) -> CliResult<Vec<String>> {
    let views = window_views(&ws.layout, windows, norm, modality, lexicons, strictness).data()?;
    Ok(views.into_iter().map(|v| v.template.text).collect())
}

/// Template histogram over every (window, modality, lexicon mode) of the grid.
///
/// With `fold_level = false` windows are normalised with statistics of the
/// whole dataset. With `fold_level = true` every fold's training-set
/// statistics are applied to all windows as well, which yields every template
/// an experiment can ask an encoder for; counts then add up over contexts.
fn template_histogram(ctx: &Context, ws: &Workspace, fold_level: bool, modalities: &[ExperimentModality]) -> CliResult<BTreeMap<String, usize>> {
    let cfg = &ctx.config;
    let mut hist: BTreeMap<String, usize> = BTreeMap::new();
    for &window in &cfg.grid.windows {
        let set = &ws.windows[&window.to_bits()];
        if set.windows.is_empty() {
            continue;
        }
        let all: Vec<&FeatureWindow> = set.windows.iter().collect();
        let mut norms = vec![fit_normalizer(&set.windows).data()?];
        if fold_level {
            let probe = ctx.cells()?.into_iter().next().expect("grid is not empty");
            let subjects = ws.subjects(window);
            for split in probe.splits(&subjects).data()? {
                let train: Vec<FeatureWindow> =
                    set.windows.iter().filter(|w| split.train.binary_search(&w.subject_id).is_ok()).cloned().collect();
                if !train.is_empty() {
                    norms.push(fit_normalizer(&train).data()?);
                }
            }
        }
        for &mode in &cfg.grid.lexicon_modes {
            for &modality in modalities {
                for norm in &norms {
                    for t in template_texts(set, &all, norm, modality, &ws.lexicons[&mode], cfg.strictness())? {
                        *hist.entry(t).or_default() += 1;
                    }
                }
            }
        }
    }
    Ok(hist)
}

fn text_modalities(cfg: &RunConfig) -> Vec<ExperimentModality> {
    if cfg.uses_text() {
        cfg.grid.modalities.clone()
    } else {
        Vec::new()
    }
}

/// Unique templates sorted by descending count, then text.
pub fn cmd_templates(ctx: &Context, out: &Path, union_folds: bool) -> CliResult<Vec<TemplateDumpRecord>> {
    let ws = Workspace::open(ctx, false)?;
    let hist = template_histogram(ctx, &ws, union_folds, &ctx.config.grid.modalities)?;
    let mut records: Vec<TemplateDumpRecord> = hist.into_iter().map(|(text, count)| TemplateDumpRecord { text, count }).collect();
    records.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.text.cmp(&b.text)));
    atomic_write(out, to_jsonl(&records).data()?.as_bytes()).data()?;
    Ok(records)
}

/// Embed every template the grid can produce and write a precomputed store.
pub fn cmd_encode(ctx: &Context, out: &Path) -> CliResult<usize> {
    let ws = Workspace::open(ctx, true)?;
    let hist = template_histogram(ctx, &ws, true, &ctx.config.grid.modalities)?;
    let texts: Vec<&str> = hist.keys().map(String::as_str).collect();
    let encoder = if ctx.config.uses_text() { ws.encoder.clone() } else { build_encoder(&ctx.config)? };
    encoder.prefetch(&texts).data()?;
    let embedded = batch_encode_str(encoder.as_ref(), &texts).data()?;
    let spec = encoder.spec();
    let records: Vec<EmbeddingRecord> = texts
        .iter()
        .zip(embedded)
        .map(|(t, e)| EmbeddingRecord { text: t.to_string(), model: spec.name.clone(), dim: spec.dim, vector: e.vector })
        .collect();
    atomic_write(out, to_jsonl(&records).data()?.as_bytes()).data()?;
    Ok(records.len())
}

// ---------------------------------------------------------------------------
// validate

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub cells: Vec<String>,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Schema, lexicon coverage, fold feasibility and embedding-store
/// completeness. Problems land in the report; only configuration errors are
/// returned as `Err`.
pub fn cmd_validate(ctx: &Context) -> CliResult<ValidationReport> {
    let cfg = &ctx.config;
    let cells = ctx.cells()?;
    let mut report = ValidationReport {
        cells: cells.iter().enumerate().map(|(i, c)| format!("cell {i}: {}", describe_cell(c))).collect(),
        ..Default::default()
    };
    let ws = match Workspace::open(ctx, false) {
        Ok(ws) => ws,
        Err(CliError::Data(e)) => {
            report.errors.push(format!("{e:#}"));
            return Ok(report);
        }
        Err(e) => return Err(e),
    };

    let first_mode = cfg.grid.lexicon_modes[0];
    for m in needed_blocks(&cfg.grid) {
        let frames = match m {
            Modality::Facial => ws.data.facial.as_ref(),
            Modality::Audio => ws.data.audio.as_ref(),
        };
        let Some(first) = frames.and_then(|f| f.first()) else {
            report.warnings.push(format!("{} frame file has no rows", m.as_str()));
            continue;
        };
        let coverage = validate_coverage(ws.lexicons[&first_mode].get(m), first.feature_names());
        report.warnings.extend(coverage.warnings().into_iter().map(|w| format!("{} lexicon: {w}", m.as_str())));
    }

    for &window in &cfg.grid.windows {
        let set = &ws.windows[&window.to_bits()];
        let subjects = ws.subjects(window);
        if set.windows.is_empty() {
            report.errors.push(format!("no {window}s windows could be built from the data"));
            continue;
        }
        if let Err(e) = cells[0].splits(&subjects) {
            report.errors.push(format!("{window}s windows: {e}"));
        }
    }
    if !report.ok() {
        return Ok(report);
    }

    let modalities = text_modalities(cfg);
    match template_histogram(ctx, &ws, true, &modalities) {
        Err(e) => report.errors.push(e.to_string()),
        Ok(hist) if cfg.encoder.backend == BackendKind::Precomputed && !hist.is_empty() => {
            match build_encoder(cfg) {
                Err(e) => report.errors.push(e.to_string()),
                Ok(_) => {
                    let spec = cfg.encoder_spec().usage()?;
                    let path = cfg.paths.embedding_store.as_ref().expect("checked at load");
                    let store = PrecomputedStore::load(spec, path).data()?;
                    let missing: Vec<&String> = hist.keys().filter(|t| !store.contains(t)).collect();
                    if !missing.is_empty() {
                        report.errors.push(format!(
                            "embedding store {} lacks {} of {} templates, first: {:?}",
                            path.display(),
                            missing.len(),
                            hist.len(),
                            missing[0]
                        ));
                    }
                }
            }
        }
        Ok(_) => {}
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// pairs, train, eval

/// Gated pairs of one cell over the whole dataset, as audit records.
pub fn cmd_pairs(ctx: &Context, cell_index: usize, out: &Path) -> CliResult<usize> {
    let cell = ctx.cell(cell_index)?;
    let ws = Workspace::open(ctx, false)?;
    let set = &ws.windows[&cell.window_len.to_bits()];
    let reps = vec![Vec::new(); set.windows.len()];
    let pairs = build_pairs(&set.windows, &reps, &cell.pair_config()).data()?;
    let audit = audit_pairs(&set.windows, &pairs, &cell.pair_config());
    atomic_write(out, to_jsonl(&audit).data()?.as_bytes()).data()?;
    Ok(audit.len())
}

/// A trained head with what is needed to score it again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format: String,
    pub config: ExperimentConfig,
    pub split: SubjectSplit,
    pub normalizer: NormStats,
    pub data_fingerprint: String,
    pub head: PreferenceHead,
}

impl ModelBundle {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).data()?;
        let bundle: ModelBundle = serde_json::from_str(&text).with_context(|| format!("{}", path.display())).data()?;
        if bundle.format != MODEL_FORMAT {
            return Err(CliError::Data(anyhow!("{}: unsupported format `{}`", path.display(), bundle.format)));
        }
        learner::validate_head(&bundle.head).data()?;
        Ok(bundle)
    }
}

fn fold_split(ctx: &Context, ws: &Workspace, cell: &ExperimentConfig, fold: usize) -> CliResult<SubjectSplit> {
    let splits = cell.splits(&ws.subjects(cell.window_len)).data()?;
    let n = splits.len();
    splits
        .into_iter()
        .nth(fold)
        .ok_or_else(|| CliError::Usage(anyhow!("fold {fold} does not exist; {} has {n} folds", ctx.config.grid.split_name())))
}

impl GridConfig {
    fn split_name(&self) -> &'static str {
        match self.split {
            SplitMode::Kfold => "k-fold",
            SplitMode::Seeds => "seeded split",
        }
    }
}

pub fn cmd_train(ctx: &Context, cell_index: usize, fold: usize, out: &Path) -> CliResult<ModelBundle> {
    let cell = ctx.cell(cell_index)?;
    let ws = Workspace::open(ctx, true)?;
    let split = fold_split(ctx, &ws, &cell, fold)?;
    let prepared = prepare_fold(&cell, ws.experiment_data(&cell)?, &split).data()?;
    if let Some(reason) = prepared.skip_reason() {
        if prepared.train_pairs.is_empty() || prepared.norm.is_none() {
            return Err(CliError::Data(anyhow!("fold {fold} cannot be trained: {reason}")));
        }
    }
    let head = fit_head(&cell, &prepared).data()?;
    let bundle = ModelBundle {
        format: MODEL_FORMAT.into(),
        config: cell,
        split,
        normalizer: prepared.norm.expect("checked above"),
        data_fingerprint: ws.data.fingerprint.clone(),
        head,
    };
    let json = serde_json::to_string_pretty(&bundle).data()?;
    atomic_write(out, json.as_bytes()).data()?;
    Ok(bundle)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub fold: usize,
    pub accuracy: f64,
    pub test_pairs: usize,
    pub test_subjects: Vec<String>,
}

/// Score a saved head on its fold's test subjects.
pub fn cmd_eval(ctx: &Context, checkpoint: &Path) -> CliResult<EvalResult> {
    let bundle = ModelBundle::load(checkpoint)?;
    let ws = Workspace::open(ctx, true)?;
    if ws.data.fingerprint != bundle.data_fingerprint {
        log::warn!("input files changed since {} was trained", checkpoint.display());
    }
    let cell = &bundle.config;
    if cell.representation.uses_text() && ws.encoder.spec() != &cell.encoder {
        return Err(CliError::Usage(anyhow!(
            "checkpoint was trained with encoder `{}`, config provides `{}`",
            cell.encoder.name,
            ws.encoder.spec().name
        )));
    }
    let mut set = ws.windows.get(&cell.window_len.to_bits()).cloned();
    if set.is_none() {
        set = Some(ws.data.window_set(cell.window_len)?);
    }
    let set = set.expect("window set");
    let lexicons = match ws.lexicons.get(&cell.lexicon_mode) {
        Some(l) => l.clone(),
        None => load_lexicons(&ctx.config, cell.lexicon_mode)?,
    };
    let data = ExperimentData { windows: &set, lexicons: &lexicons, encoder: ws.encoder.as_ref() };
    let pairs = pairs_with_norm(cell, data, &bundle.split.test, &bundle.normalizer).data()?;
    if pairs.is_empty() {
        return Err(CliError::Data(anyhow!("fold {} has no test pairs", bundle.split.fold)));
    }
    let accuracy = learner::accuracy(&bundle.head, &pairs).data()?;
    Ok(EvalResult { fold: bundle.split.fold, accuracy, test_pairs: pairs.len(), test_subjects: bundle.split.test.clone() })
}

// ---------------------------------------------------------------------------
// run and report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub cell: usize,
    pub digest: String,
    pub description: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub cells: usize,
    pub computed: usize,
    pub reused: usize,
    pub failures: Vec<CellFailure>,
    pub report: Option<Report>,
}

#[derive(Serialize, Deserialize)]
struct CellRecord {
    digest: String,
    data_fingerprint: String,
    config: ExperimentConfig,
}

fn load_completed(dir: &Path) -> CliResult<Option<ExperimentOutcome>> {
    if !dir.join(COMPLETE_MARKER).exists() {
        return Ok(None);
    }
    let record: CellRecord = serde_json::from_str(&std::fs::read_to_string(dir.join("cell.json")).data()?).data()?;
    let folds = read_jsonl(&dir.join("folds.jsonl")).data()?;
    Ok(Some(ExperimentOutcome { config: record.config, folds }))
}

fn persist(dir: &Path, digest: &str, fingerprint: &str, outcome: &ExperimentOutcome) -> CliResult<()> {
    let marker = dir.join(COMPLETE_MARKER);
    if marker.exists() {
        std::fs::remove_file(&marker).data()?;
    }
    atomic_write(&dir.join("folds.jsonl"), to_jsonl(&outcome.folds).data()?.as_bytes()).data()?;
    let record = CellRecord { digest: digest.into(), data_fingerprint: fingerprint.into(), config: outcome.config.clone() };
    atomic_write(&dir.join("cell.json"), serde_json::to_string_pretty(&record).data()?.as_bytes()).data()?;
    atomic_write(&marker, b"").data()?;
    Ok(())
}

fn write_report(ctx: &Context, cells: &[CellResult]) -> CliResult<Option<Report>> {
    if cells.is_empty() {
        return Ok(None);
    }
    let report = render_report(cells);
    atomic_write(&ctx.output_root.join("report.md"), report.markdown.as_bytes()).data()?;
    atomic_write(&ctx.output_root.join("report.csv"), report.csv.as_bytes()).data()?;
    Ok(Some(report))
}

/// Run every grid cell not already complete (all of them with `--force`),
/// then render the report over all completed cells.
pub fn cmd_run(ctx: &Context) -> CliResult<RunSummary> {
    let cells = ctx.cells()?;
    let ws = Workspace::open(ctx, true)?;
    let fingerprint = ws.data.fingerprint.clone();
    let run_cell = |(i, cell): (usize, &ExperimentConfig)| -> (usize, bool, Result<ExperimentOutcome, CellFailure>) {
        let digest = cell_digest(cell, &fingerprint);
        let dir = ctx.cells_dir().join(&digest);
        let fail = |e: String| CellFailure { cell: i, digest: digest.clone(), description: describe_cell(cell), error: e };
        if !ctx.force {
            match load_completed(&dir) {
                Ok(Some(outcome)) => return (i, false, Ok(outcome)),
                Ok(None) => {}
                Err(e) => log::warn!("cell {i}: ignoring unreadable results: {e}"),
            }
        }
        log::info!("cell {i}: {}", describe_cell(cell));
        let outcome = ws
            .experiment_data(cell)
            .map_err(|e| e.to_string())
            .and_then(|data| run_experiment(cell, data).map_err(|e| e.to_string()));
        match outcome {
            Ok(outcome) => match persist(&dir, &digest, &fingerprint, &outcome) {
                Ok(()) => (i, true, Ok(outcome)),
                Err(e) => (i, true, Err(fail(e.to_string()))),
            },
            Err(e) => (i, true, Err(fail(e))),
        }
    };
    let indexed: Vec<(usize, &ExperimentConfig)> = cells.iter().enumerate().collect();
    let results: Vec<_> = match ctx.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .data()?
            .install(|| indexed.par_iter().copied().map(run_cell).collect()),
        None => indexed.par_iter().copied().map(run_cell).collect(),
    };

    let mut summary = RunSummary { cells: cells.len(), computed: 0, reused: 0, failures: Vec::new(), report: None };
    let mut completed = Vec::new();
    for (_, computed, r) in results {
        match r {
            Ok(outcome) => {
                if computed {
                    summary.computed += 1;
                } else {
                    summary.reused += 1;
                }
                completed.push(outcome);
            }
            Err(f) => summary.failures.push(f),
        }
    }
    let failures_path = ctx.output_root.join("failures.json");
    if summary.failures.is_empty() {
        if failures_path.exists() {
            std::fs::remove_file(&failures_path).data()?;
        }
    } else {
        let json = serde_json::to_string_pretty(&summary.failures).data()?;
        atomic_write(&failures_path, json.as_bytes()).data()?;
    }
    summary.report = write_report(ctx, &completed)?;
    Ok(summary)
}

/// Re-render the report from persisted results of the current grid.
pub fn cmd_report(ctx: &Context) -> CliResult<Report> {
    let cells = ctx.cells()?;
    let data = load_data(&ctx.config)?;
    let mut completed = Vec::new();
    for cell in &cells {
        let dir = ctx.cells_dir().join(cell_digest(cell, &data.fingerprint));
        if let Some(outcome) = load_completed(&dir)? {
            completed.push(outcome);
        }
    }
    if completed.is_empty() {
        return Err(CliError::Data(anyhow!("no completed cells under {}; run `lasca run` first", ctx.output_root.display())));
    }
    if completed.len() < cells.len() {
        log::warn!("{} of {} cells have results", completed.len(), cells.len());
    }
    Ok(write_report(ctx, &completed)?.expect("non-empty"))
}

// ---------------------------------------------------------------------------
// argument parsing

#[derive(Debug, Parser)]
#[command(name = "lasca", version, about = "Salience-masked language features for affect-change prediction")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Recompute cells that already have results.
    #[arg(long, global = true)]
    pub force: bool,
    /// Fail on active features without a lexicon label instead of skipping them.
    #[arg(long, global = true)]
    pub strict_lexicon: bool,
    /// Override grid.seed_base.
    #[arg(long, global = true)]
    pub seed_base: Option<u64>,
    /// Worker threads for grid cells and folds.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check inputs, lexicon coverage and embedding-store completeness.
    Validate,
    /// Dump unique templates with their counts, most frequent first.
    Templates {
        #[arg(long)]
        out: PathBuf,
        /// Also include templates produced under per-fold normalisation.
        #[arg(long)]
        union_folds: bool,
    },
    /// Embed every template the grid can produce into a precomputed store.
    Encode {
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the gated preference pairs of one cell.
    Pairs {
        #[arg(long)]
        cell: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one fold of one cell and save the model.
    Train {
        #[arg(long)]
        cell: usize,
        #[arg(long)]
        fold: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a saved model on its fold's test subjects.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Re-render the report from persisted results.
    Report,
    /// Run the whole grid.
    Run,
}

fn init_logging(level: log::LevelFilter) {
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env("RUST_LOG")
        .format_timestamp(None)
        .try_init();
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let config_path = cli.config.as_deref().ok_or_else(|| CliError::Usage(anyhow!("--config <path> is required")))?;
    let overrides = Overrides {
        force: cli.force,
        strict_lexicon: cli.strict_lexicon,
        seed_base: cli.seed_base,
        jobs: cli.jobs,
        run_dir: None,
    }
    .with_env();
    let ctx = Context::load(config_path, &overrides)?;
    let level = match cli.verbose {
        0 => log_level(&ctx.config.verbosity).usage()?,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    init_logging(level);

    match &cli.command {
        Command::Validate => {
            let report = cmd_validate(&ctx)?;
            for c in &report.cells {
                println!("{c}");
            }
            for w in &report.warnings {
                println!("warning: {w}");
            }
            for e in &report.errors {
                println!("error: {e}");
            }
            if !report.ok() {
                return Err(CliError::Data(anyhow!("validation failed with {} error(s)", report.errors.len())));
            }
            println!("ok: {} cells, {} warning(s)", report.cells.len(), report.warnings.len());
        }
        Command::Templates { out, union_folds } => {
            let records = cmd_templates(&ctx, out, *union_folds)?;
            let total: usize = records.iter().map(|r| r.count).sum();
            println!("{} unique templates over {total} windows -> {}", records.len(), out.display());
            for r in records.iter().take(5) {
                println!("{:>6}  {}", r.count, r.text);
            }
        }
        Command::Encode { out } => {
            let n = cmd_encode(&ctx, out)?;
            println!("{n} embeddings -> {}", out.display());
        }
        Command::Pairs { cell, out } => {
            let n = cmd_pairs(&ctx, *cell, out)?;
            println!("{n} pairs -> {}", out.display());
        }
        Command::Train { cell, fold, out } => {
            let b = cmd_train(&ctx, *cell, *fold, out)?;
            println!(
                "fold {} trained for {} epochs (loss {:.4}) -> {}",
                b.split.fold,
                b.head.meta.epochs_run,
                b.head.meta.final_loss,
                out.display()
            );
        }
        Command::Eval { checkpoint } => {
            let r = cmd_eval(&ctx, checkpoint)?;
            println!("{}", serde_json::to_string(&r).data()?);
        }
        Command::Report => {
            cmd_report(&ctx)?;
            println!("{}", ctx.output_root.join("report.md").display());
        }
        Command::Run => {
            let s = cmd_run(&ctx)?;
            println!("{} cells: {} computed, {} reused, {} failed", s.cells, s.computed, s.reused, s.failures.len());
            if s.report.is_some() {
                println!("{}", ctx.output_root.join("report.md").display());
            }
            if !s.failures.is_empty() {
                return Err(CliError::Data(anyhow!(
                    "{} cell(s) failed; see {}",
                    s.failures.len(),
                    ctx.output_root.join("failures.json").display()
                )));
            }
        }
    }
    Ok(())
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [paths]
        facial_frames = "data/facial.csv"
        annotations = "data/annotations.csv"

        [grid]
        modalities = ["visual"]
        windows = [3.0]
        taus = [0.1, 0.2]
        dimensions = ["valence"]
        representations = ["features_only", "fused"]
        lexicon_modes = ["affect_aware", "feature_name"]
    "#;

    #[test]
    fn relative_paths_follow_the_config() {
        let cfg = RunConfig::from_toml(MINIMAL, Path::new("/tmp/exp")).unwrap();
        assert_eq!(cfg.paths.annotations, PathBuf::from("/tmp/exp/data/annotations.csv"));
        assert_eq!(cfg.paths.output_dir, PathBuf::from("/tmp/exp/runs"));
        assert_eq!(cfg.training, TrainingConfig::default());
    }

    #[test]
    fn grid_expansion_dedupes_feature_cells() {
        let cfg = RunConfig::from_toml(MINIMAL, Path::new(".")).unwrap();
        let cells = cfg.cells().unwrap();
        // 2 taus x (features + fused) for the first mode, 2 taus x fused for the second
        assert_eq!(cells.len(), 6);
        assert_eq!(cells.iter().filter(|c| c.representation == Representation::FeaturesOnly).count(), 2);
        let digests: BTreeSet<String> = cells.iter().map(|c| cell_digest(c, "fp")).collect();
        assert_eq!(digests.len(), 6);
    }

    #[test]
    fn config_errors_are_usage_errors() {
        let e = RunConfig::from_toml("[paths]\nannotations = 3", Path::new(".")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let missing_audio = MINIMAL.replace("[\"visual\"]", "[\"audio\"]");
        assert_eq!(RunConfig::from_toml(&missing_audio, Path::new(".")).unwrap_err().exit_code(), 2);
        let unknown = format!("{MINIMAL}\n[training]\nmomentum = 0.9\n");
        assert!(RunConfig::from_toml(&unknown, Path::new(".")).is_err());
        let store_missing = format!("{MINIMAL}\n[encoder]\nbackend = \"precomputed\"\nname = \"all-mpnet-base-v2\"\n");
        assert!(RunConfig::from_toml(&store_missing, Path::new(".")).is_err());
    }

    #[test]
    fn encoder_specs_from_config() {
        let mut cfg = RunConfig::from_toml(MINIMAL, Path::new(".")).unwrap();
        assert_eq!(cfg.encoder_spec().unwrap(), EncoderSpec::hashing(384));
        cfg.encoder = EncoderConfig {
            backend: BackendKind::Precomputed,
            name: Some("all-MiniLM-L12-v2".into()),
            ..Default::default()
        };
        let spec = cfg.encoder_spec().unwrap();
        assert_eq!((spec.dim, spec.display_name()), (384, "MiniLM"));
        cfg.encoder.dim = Some(768);
        assert!(cfg.encoder_spec().is_err());
    }

    #[test]
    fn digest_tracks_config_and_data() {
        let cfg = RunConfig::from_toml(MINIMAL, Path::new(".")).unwrap();
        let cell = &cfg.cells().unwrap()[0];
        let mut other = cell.clone();
        other.seed_base = 9;
        assert_ne!(cell_digest(cell, "a"), cell_digest(&other, "a"));
        assert_ne!(cell_digest(cell, "a"), cell_digest(cell, "b"));
        assert_eq!(cell_digest(cell, "a"), cell_digest(&cell.clone(), "a"));
    }

    #[test]
    fn missing_config_flag_exits_two() {
        assert_eq!(run_cli(["lasca", "run"]), 2);
        assert_eq!(run_cli(["lasca", "frobnicate"]), 2);
        assert_eq!(run_cli(["lasca", "--config", "/nonexistent/lasca.toml", "validate"]), 2);
    }
}
