//! One experiment cell: a fixed (dimension, window, tau, modality,
//! representation, encoder, lexicon mode) evaluated over subject-level folds.

use std::collections::{BTreeSet, HashMap};
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{kfold_splits, seeded_splits, SubjectSplit};
use super::ProtocolError;
use crate::encoding::{batch_encode_str, EncoderSpec, SentenceEncoder};
use crate::ingest::{apply_normalizer, fit_normalizer, FeatureLayout, FeatureWindow, Modality, NormStats, WindowSet};
use crate::learner::{self, HeadConfig, PreferenceHead};
use crate::lexicon::{compose_multimodal, compose_template, LexiconMode, SemanticLexicon, Strictness, TemplateText};
use crate::preference::{build_pairs, AffectDimension, PairConfig, PreferencePair, DEFAULT_EPSILON};
use crate::salience::salience_mask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentModality {
    Visual,
    Audio,
    Multimodal,
}

impl ExperimentModality {
    /// Feature blocks the modality draws on, in concatenation order.
    pub fn blocks(self) -> &'static [Modality] {
        match self {
            ExperimentModality::Visual => &[Modality::Facial],
            ExperimentModality::Audio => &[Modality::Audio],
            ExperimentModality::Multimodal => &[Modality::Facial, Modality::Audio],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentModality::Visual => "visual",
            ExperimentModality::Audio => "audio",
            ExperimentModality::Multimodal => "multimodal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    FeaturesOnly,
    TextOnly,
    Fused,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::FeaturesOnly => "features_only",
            Representation::TextOnly => "text_only",
            Representation::Fused => "fused",
        }
    }

    pub fn uses_text(self) -> bool {
        self != Representation::FeaturesOnly
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// k-fold cross-validation over subjects.
    Kfold,
    /// Independent seeded random subject hold-outs.
    Seeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub l2_alpha: f64,
    pub max_epochs: usize,
    pub tol: f64,
    pub patience: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Floor of the gate denominator.
    pub epsilon: f64,
    /// Override the hidden widths derived from the input dimension.
    pub hidden: Option<[usize; 2]>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            l2_alpha: 1.0,
            max_epochs: 25,
            tol: 1e-3,
            patience: 3,
            learning_rate: 1e-3,
            batch_size: 200,
            epsilon: DEFAULT_EPSILON,
            hidden: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dimension: AffectDimension,
    pub window_len: f64,
    pub tau: f64,
    pub modality: ExperimentModality,
    pub representation: Representation,
    pub encoder: EncoderSpec,
    pub lexicon_mode: LexiconMode,
    /// Number of folds (k-fold) or runs (seeded splits).
    pub folds: usize,
    pub split: SplitMode,
    pub test_fraction: f64,
    pub seed_base: u64,
    pub training: TrainingConfig,
    pub strictness: Strictness,
}

impl ExperimentConfig {
    pub fn new(dimension: AffectDimension, window_len: f64, tau: f64, modality: ExperimentModality, representation: Representation) -> Self {
        Self {
            dimension,
            window_len,
            tau,
            modality,
            representation,
            encoder: EncoderSpec::default(),
            lexicon_mode: LexiconMode::AffectAware,
            folds: 15,
            split: SplitMode::Kfold,
            test_fraction: 0.2,
            seed_base: 0,
            training: TrainingConfig::default(),
            strictness: Strictness::Lenient,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::InvalidConfig(m));
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if !(self.window_len > 0.0 && self.window_len.is_finite()) {
            return bad(format!("window length must be positive, got {}", self.window_len));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if self.split == SplitMode::Seeds && !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test fraction must be in (0, 1), got {}", self.test_fraction));
        }
        if let Some([h1, h2]) = self.training.hidden {
            if !(h1 >= h2 && h2 >= 1) {
                return bad(format!("hidden sizes [{h1}, {h2}] must satisfy h1 >= h2 >= 1"));
            }
        }
        self.encoder.validate().map_err(ProtocolError::InvalidConfig)
    }

    pub fn pair_config(&self) -> PairConfig {
        PairConfig { tau: self.tau, epsilon: self.training.epsilon, dimension: self.dimension }
    }

    /// Row label in report tables: `Features`, the encoder name, or the
    /// encoder name with `(F)` for fusion.
    pub fn model_name(&self) -> String {
        let base = match self.representation {
            Representation::FeaturesOnly => return "Features".into(),
            Representation::TextOnly => self.encoder.display_name().to_string(),
            Representation::Fused => format!("{}(F)", self.encoder.display_name()),
        };
        match self.lexicon_mode {
            LexiconMode::AffectAware => base,
            LexiconMode::FeatureName => format!("{base} [feature names]"),
        }
    }

    /// Seed for the head trained in `fold`; shared by every representation so
    /// paired comparisons differ only in their inputs.
    pub fn head_seed(&self, fold: usize) -> u64 {
        self.seed_base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(fold as u64 + 1)
    }

    pub fn splits(&self, subjects: &[String]) -> Result<Vec<SubjectSplit>, ProtocolError> {
        match self.split {
            SplitMode::Kfold => kfold_splits(subjects, self.folds, self.seed_base),
            SplitMode::Seeds => seeded_splits(subjects, self.folds, self.test_fraction, self.seed_base),
        }
    }

    pub fn head_config(&self, input_dim: usize, fold: usize) -> Result<HeadConfig, ProtocolError> {
        let mut hc = match self.training.hidden {
            Some([h1, h2]) => HeadConfig::with_hidden(input_dim, h1, h2)?,
            None => HeadConfig::new(input_dim)?,
        };
        let t = &self.training;
        hc.l2_alpha = t.l2_alpha;
        hc.max_epochs = t.max_epochs;
        hc.tol = t.tol;
        hc.patience = t.patience;
        hc.learning_rate = t.learning_rate;
        hc.batch_size = t.batch_size;
        hc.seed = self.head_seed(fold);
        hc.validate()?;
        Ok(hc)
    }
}

/// Facial and audio lexicons in one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicons {
    pub facial: SemanticLexicon,
    pub audio: SemanticLexicon,
}

impl Lexicons {
    pub fn builtin(mode: LexiconMode) -> Self {
        Self {
            facial: SemanticLexicon::builtin(Modality::Facial, mode),
            audio: SemanticLexicon::builtin(Modality::Audio, mode),
        }
    }

    pub fn mode(&self) -> LexiconMode {
        self.facial.mode
    }

    pub fn get(&self, modality: Modality) -> &SemanticLexicon {
        match modality {
            Modality::Facial => &self.facial,
            Modality::Audio => &self.audio,
        }
    }
}

#[derive(Clone, Copy)]
pub struct ExperimentData<'a> {
    pub windows: &'a WindowSet,
    pub lexicons: &'a Lexicons,
    pub encoder: &'a dyn SentenceEncoder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_subjects: Vec<String>,
    pub test_subjects: Vec<String>,
    /// `None` when the fold was skipped.
    pub accuracy: Option<f64>,
    pub skipped: Option<String>,
    pub train_pairs: usize,
    pub test_pairs: usize,
    pub epochs_run: usize,
    pub final_loss: Option<f64>,
}

impl FoldResult {
    pub fn subjects_disjoint(&self) -> bool {
        self.test_subjects.iter().all(|s| !self.train_subjects.contains(s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub folds: Vec<FoldResult>,
}

impl ExperimentOutcome {
    pub fn accuracies(&self) -> Vec<f64> {
        self.folds.iter().filter_map(|f| f.accuracy).collect()
    }

    /// Mean over completed folds; skipped folds are excluded.
    pub fn mean_accuracy(&self) -> Option<f64> {
        mean_accuracy(&self.folds)
    }

    pub fn skipped(&self) -> usize {
        self.folds.iter().filter(|f| f.accuracy.is_none()).count()
    }
}

pub fn mean_accuracy(folds: &[FoldResult]) -> Option<f64> {
    let accs: Vec<f64> = folds.iter().filter_map(|f| f.accuracy).collect();
    (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64)
}

/// Column ranges of `layout` used by `modality`, with their block.
pub fn modality_columns(layout: &FeatureLayout, modality: ExperimentModality) -> Result<Vec<(Modality, Range<usize>)>, ProtocolError> {
    modality
        .blocks()
        .iter()
        .map(|&m| {
            layout
                .block(m)
                .map(|(_, r)| (m, r))
                .ok_or_else(|| ProtocolError::InvalidInput(format!("data has no {} features", m.as_str())))
        })
        .collect()
}

/// Normalised features of one window restricted to a modality, and its template.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowView {
    pub x_norm: Vec<f64>,
    pub template: TemplateText,
}

/// Normalise with `norm`, compute per-block salience masks and compose the
/// template for each window.
pub fn window_views(
    layout: &FeatureLayout,
    windows: &[&FeatureWindow],
    norm: &NormStats,
    modality: ExperimentModality,
    lexicons: &Lexicons,
    strictness: Strictness,
) -> Result<Vec<WindowView>, ProtocolError> {
    let columns = modality_columns(layout, modality)?;
    let names: Vec<&[String]> = columns
        .iter()
        .map(|(m, _)| layout.block(*m).map(|(b, _)| b.names.as_slice()).unwrap_or_default())
        .collect();
    windows
        .iter()
        .map(|w| {
            let full = apply_normalizer(norm, &w.x_raw)?;
            let mut x_norm = Vec::new();
            let mut parts = Vec::with_capacity(columns.len());
            for ((m, range), names) in columns.iter().zip(&names) {
                let block = &full[range.clone()];
                x_norm.extend_from_slice(block);
                let mask = salience_mask(block);
                parts.push(compose_template(&mask, names, lexicons.get(*m), strictness)?);
            }
            let template = match parts.as_slice() {
                [single] => single.clone(),
                [facial, audio] => compose_multimodal(facial, audio)?,
                _ => unreachable!("one or two blocks per modality"),
            };
            Ok(WindowView { x_norm, template })
        })
        .collect()
}

/// Embed each distinct template once and look the vectors up per window.
pub fn embed_views(views: &[WindowView], encoder: &dyn SentenceEncoder) -> Result<Vec<Vec<f64>>, ProtocolError> {
    let unique: BTreeSet<&str> = views.iter().map(|v| v.template.text.as_str()).collect();
    let unique: Vec<&str> = unique.into_iter().collect();
    encoder.prefetch(&unique)?;
    let embedded = batch_encode_str(encoder, &unique)?;
    let table: HashMap<&str, Vec<f64>> = unique.into_iter().zip(embedded.into_iter().map(|e| e.vector)).collect();
    Ok(views.iter().map(|v| table[v.template.text.as_str()].clone()).collect())
}

pub fn representations(
    views: &[WindowView],
    representation: Representation,
    encoder: &dyn SentenceEncoder,
) -> Result<Vec<Vec<f64>>, ProtocolError> {
    if representation == Representation::FeaturesOnly {
        return Ok(views.iter().map(|v| v.x_norm.clone()).collect());
    }
    let text = embed_views(views, encoder)?;
    Ok(match representation {
        Representation::TextOnly => text,
        _ => views
            .iter()
            .zip(text)
            .map(|(v, s)| {
                let mut z = v.x_norm.clone();
                z.extend(s);
                z
            })
            .collect(),
    })
}

fn partition<'a>(windows: &'a [FeatureWindow], subjects: &[String]) -> Vec<&'a FeatureWindow> {
    windows.iter().filter(|w| subjects.binary_search(&w.subject_id).is_ok()).collect()
}

/// Min-max statistics from the training subjects of `split` only.
pub fn fit_fold_normalizer(windows: &[FeatureWindow], split: &SubjectSplit) -> Result<NormStats, ProtocolError> {
    let train: Vec<FeatureWindow> = partition(windows, &split.train).into_iter().cloned().collect();
    Ok(fit_normalizer(&train)?)
}

fn check_disjoint(split: &SubjectSplit) -> Result<(), ProtocolError> {
    let shared: Vec<String> = split.test.iter().filter(|s| split.train.contains(s)).cloned().collect();
    if shared.is_empty() {
        Ok(())
    } else {
        Err(ProtocolError::SubjectLeakage { fold: split.fold, subjects: shared })
    }
}

/// Pairs for the windows of `subjects`, represented under a fixed normaliser.
pub fn pairs_with_norm(
    cfg: &ExperimentConfig,
    data: ExperimentData<'_>,
    subjects: &[String],
    norm: &NormStats,
) -> Result<Vec<PreferencePair>, ProtocolError> {
    let windows = partition(&data.windows.windows, subjects);
    if windows.is_empty() {
        return Ok(Vec::new());
    }
    let views = window_views(&data.windows.layout, &windows, norm, cfg.modality, data.lexicons, cfg.strictness)?;
    let reps = representations(&views, cfg.representation, data.encoder)?;
    let owned: Vec<FeatureWindow> = windows.into_iter().cloned().collect();
    Ok(build_pairs(&owned, &reps, &cfg.pair_config())?)
}

/// Everything a fold needs before training.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub split: SubjectSplit,
    /// `None` when the training side has no windows.
    pub norm: Option<NormStats>,
    pub train_pairs: Vec<PreferencePair>,
    pub test_pairs: Vec<PreferencePair>,
}

impl PreparedFold {
    /// Why the fold cannot be scored, if it cannot.
    pub fn skip_reason(&self) -> Option<&'static str> {
        if self.norm.is_none() {
            Some("no training windows")
        } else if self.test_pairs.is_empty() {
            Some("no test pairs")
        } else if self.train_pairs.is_empty() {
            Some("no training pairs")
        } else {
            None
        }
    }
}

pub fn prepare_fold(cfg: &ExperimentConfig, data: ExperimentData<'_>, split: &SubjectSplit) -> Result<PreparedFold, ProtocolError> {
    check_disjoint(split)?;
    let mut prepared = PreparedFold { split: split.clone(), norm: None, train_pairs: Vec::new(), test_pairs: Vec::new() };
    if partition(&data.windows.windows, &split.train).is_empty() {
        return Ok(prepared);
    }
    let norm = fit_fold_normalizer(&data.windows.windows, split)?;
    prepared.train_pairs = pairs_with_norm(cfg, data, &split.train, &norm)?;
    prepared.test_pairs = pairs_with_norm(cfg, data, &split.test, &norm)?;
    prepared.norm = Some(norm);
    Ok(prepared)
}

/// Train the fold's head on its training pairs.
pub fn fit_head(cfg: &ExperimentConfig, prepared: &PreparedFold) -> Result<PreferenceHead, ProtocolError> {
    let first = prepared.train_pairs.first().ok_or(learner::LearnerError::EmptyTrainingSet)?;
    let head = learner::init_head(&cfg.head_config(first.delta_z.len(), prepared.split.fold)?);
    Ok(learner::train(head, &prepared.train_pairs)?)
}

/// Train on the split's training subjects and score its test subjects.
pub fn run_fold(cfg: &ExperimentConfig, data: ExperimentData<'_>, split: &SubjectSplit) -> Result<FoldResult, ProtocolError> {
    let prepared = prepare_fold(cfg, data, split)?;
    let mut result = FoldResult {
        fold: split.fold,
        train_subjects: split.train.clone(),
        test_subjects: split.test.clone(),
        accuracy: None,
        skipped: None,
        train_pairs: prepared.train_pairs.len(),
        test_pairs: prepared.test_pairs.len(),
        epochs_run: 0,
        final_loss: None,
    };
    if let Some(reason) = prepared.skip_reason() {
        result.skipped = Some(reason.into());
        return Ok(result);
    }
    let head = fit_head(cfg, &prepared)?;
    result.accuracy = Some(learner::accuracy(&head, &prepared.test_pairs)?);
    result.epochs_run = head.meta.epochs_run;
    result.final_loss = Some(head.meta.final_loss);
    Ok(result)
}

/// Every fold of one cell. Folds run in parallel; results are in fold order
/// and do not depend on the schedule.
pub fn run_experiment(cfg: &ExperimentConfig, data: ExperimentData<'_>) -> Result<ExperimentOutcome, ProtocolError> {
    cfg.validate()?;
    if data.lexicons.mode() != cfg.lexicon_mode || data.lexicons.audio.mode != cfg.lexicon_mode {
        return Err(ProtocolError::InvalidConfig(format!(
            "lexicons are in `{}` mode, config asks for `{}`",
            data.lexicons.mode().as_str(),
            cfg.lexicon_mode.as_str()
        )));
    }
    if cfg.representation.uses_text() && data.encoder.spec() != &cfg.encoder {
        return Err(ProtocolError::InvalidConfig(format!(
            "encoder `{}` does not match configured `{}`",
            data.encoder.spec().name,
            cfg.encoder.name
        )));
    }
    let subjects: Vec<String> = data.windows.windows.iter().map(|w| w.subject_id.clone()).collect();
    let splits = cfg.splits(&subjects)?;
    let folds = splits
        .par_iter()
        .map(|s| run_fold(cfg, data, s))
        .collect::<Result<Vec<_>, _>>()?;
    for f in &folds {
        if !f.subjects_disjoint() {
            return Err(ProtocolError::SubjectLeakage { fold: f.fold, subjects: f.test_subjects.clone() });
        }
    }
    Ok(ExperimentOutcome { config: cfg.clone(), folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::HashingEncoder;
    use crate::ingest::FeatureBlock;

    fn layout() -> FeatureLayout {
        let facial = SemanticLexicon::builtin(Modality::Facial, LexiconMode::AffectAware);
        FeatureLayout {
            blocks: vec![FeatureBlock {
                modality: Modality::Facial,
                names: facial.entries().iter().take(4).map(|e| e.feature.clone()).collect(),
            }],
        }
    }

    fn window(subject: &str, index: usize, x: [f64; 4], valence: f64) -> FeatureWindow {
        FeatureWindow {
            subject_id: subject.into(),
            video_id: "v".into(),
            index,
            t_start: index as f64 * 3.0,
            t_end: index as f64 * 3.0 + 3.0,
            x_raw: x.to_vec(),
            a_valence: valence,
            a_arousal: 0.0,
        }
    }

    #[test]
    fn normaliser_sees_training_subjects_only() {
        let windows = vec![
            window("a", 0, [0.0, 1.0, 2.0, 3.0], 0.1),
            window("b", 0, [1.0, 2.0, 3.0, 4.0], 0.1),
            window("c", 0, [50.0, -9.0, 3.0, 9.0], 0.1),
        ];
        let split = SubjectSplit { fold: 0, train: vec!["a".into(), "b".into()], test: vec!["c".into()] };
        let fold_stats = fit_fold_normalizer(&windows, &split).unwrap();
        let everything = fit_normalizer(&windows).unwrap();
        assert_eq!(fold_stats.fitted_on, 2);
        assert_eq!(fold_stats.max[0], 1.0);
        assert_ne!(fold_stats, everything);
    }

    #[test]
    fn leaking_split_is_refused() {
        let ws = WindowSet { layout: layout(), windows: vec![window("a", 0, [0.0; 4], 0.1)] };
        let lex = Lexicons::builtin(LexiconMode::AffectAware);
        let enc = HashingEncoder::new(16);
        let data = ExperimentData { windows: &ws, lexicons: &lex, encoder: &enc };
        let mut cfg = ExperimentConfig::new(AffectDimension::Valence, 3.0, 0.1, ExperimentModality::Visual, Representation::FeaturesOnly);
        cfg.encoder = EncoderSpec::hashing(16);
        let split = SubjectSplit { fold: 3, train: vec!["a".into()], test: vec!["a".into()] };
        assert!(matches!(run_fold(&cfg, data, &split), Err(ProtocolError::SubjectLeakage { fold: 3, .. })));
    }

    #[test]
    fn fold_without_test_pairs_is_skipped() {
        let mut windows = Vec::new();
        for (k, v) in [0.1, 0.5, 0.1, 0.5].iter().enumerate() {
            windows.push(window("a", k, [k as f64, 1.0, 0.0, 2.0], *v));
        }
        windows.push(window("b", 0, [0.0, 1.0, 0.0, 2.0], 0.3));
        windows.push(window("b", 1, [1.0, 1.0, 0.0, 2.0], 0.3));
        let ws = WindowSet { layout: layout(), windows };
        let lex = Lexicons::builtin(LexiconMode::AffectAware);
        let enc = HashingEncoder::new(16);
        let data = ExperimentData { windows: &ws, lexicons: &lex, encoder: &enc };
        let mut cfg = ExperimentConfig::new(AffectDimension::Valence, 3.0, 0.1, ExperimentModality::Visual, Representation::Fused);
        cfg.encoder = EncoderSpec::hashing(16);
        cfg.training.hidden = Some([4, 2]);
        let split = SubjectSplit { fold: 0, train: vec!["a".into()], test: vec!["b".into()] };
        let r = run_fold(&cfg, data, &split).unwrap();
        assert_eq!(r.skipped.as_deref(), Some("no test pairs"));
        assert_eq!(r.accuracy, None);
        assert_eq!(r.train_pairs, 6);
        assert_eq!(mean_accuracy(&[r]), None);
    }

    #[test]
    fn views_compose_templates_per_block() {
        let ws = vec![window("a", 0, [0.0, 0.0, 1.0, 1.0], 0.1), window("a", 1, [1.0, 1.0, 0.0, 0.0], 0.1)];
        let refs: Vec<&FeatureWindow> = ws.iter().collect();
        let norm = fit_normalizer(&ws).unwrap();
        let lex = Lexicons::builtin(LexiconMode::FeatureName);
        let views = window_views(&layout(), &refs, &norm, ExperimentModality::Visual, &lex, Strictness::Lenient).unwrap();
        let names = &layout().blocks[0].names;
        assert_eq!(views[0].template.text, format!("facial: {}, {} <|endoftext|>", names[2], names[3]));
        assert!(matches!(
            window_views(&layout(), &refs, &norm, ExperimentModality::Audio, &lex, Strictness::Lenient),
            Err(ProtocolError::InvalidInput(_))
        ));
    }

    #[test]
    fn model_names_follow_table_rows() {
        let mut cfg = ExperimentConfig::new(AffectDimension::Arousal, 5.0, 0.2, ExperimentModality::Visual, Representation::FeaturesOnly);
        assert_eq!(cfg.model_name(), "Features");
        cfg.encoder = EncoderSpec::pretrained("all-mpnet-base-v2", crate::encoding::BackendKind::Precomputed).unwrap();
        cfg.representation = Representation::Fused;
        assert_eq!(cfg.model_name(), "MPNet(F)");
        cfg.lexicon_mode = LexiconMode::FeatureName;
        cfg.representation = Representation::TextOnly;
        assert_eq!(cfg.model_name(), "MPNet [feature names]");
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::new(AffectDimension::Arousal, 3.0, 0.1, ExperimentModality::Audio, Representation::Fused);
        assert!(cfg.validate().is_ok());
        cfg.folds = 1;
        assert!(cfg.validate().is_err());
    }
}
