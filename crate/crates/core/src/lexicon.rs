//! Fixed feature-to-label lexicon and template composition.
//!
//! Surface forms:
//!
//! ```text
//! facial: <label>, <label>, ... <|endoftext|>
//! audio: Acoustic markers indicate <label>, <label>. <|endoftext|>
//! facial: ... | audio: Acoustic markers indicate .... <|endoftext|>
//! ```
//!
//! Labels always appear in lexicon order, whatever order the mask lists them.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Modality;
use crate::salience::SalienceMask;

pub const END_OF_TEXT: &str = " <|endoftext|>";
pub const MODALITY_DELIMITER: &str = " | ";
pub const FACIAL_PREFIX: &str = "facial: ";
pub const AUDIO_PREFIX: &str = "audio: Acoustic markers indicate ";
pub const FACIAL_FALLBACK: &str = "facial: no salient cues";
pub const AUDIO_FALLBACK: &str = "audio: no salient acoustic cues.";

const BUILTIN_FACIAL: &str = include_str!("../data/lexicon_facial.json");
const BUILTIN_AUDIO: &str = include_str!("../data/lexicon_audio.json");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid lexicon JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate feature `{0}` in lexicon")]
    DuplicateFeature(String),
    #[error("empty label for feature `{0}`")]
    EmptyLabel(String),
    #[error("mask has {mask} entries but {features} feature names were given")]
    MaskLength { mask: usize, features: usize },
    #[error("active feature `{0}` has no lexicon entry")]
    MissingLabel(String),
    #[error("lexicon modality is {found:?}, expected {expected:?}")]
    WrongModality { expected: Modality, found: Modality },
    #[error("`{0}` is not a unimodal template")]
    NotUnimodal(String),
}

pub type Result<T> = std::result::Result<T, LexiconError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexiconMode {
    /// Short affect-aware descriptions.
    AffectAware,
    /// The raw feature name stands in for the label.
    FeatureName,
}

impl LexiconMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LexiconMode::AffectAware => "affect_aware",
            LexiconMode::FeatureName => "feature_name",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub feature: String,
    pub label: String,
}

#[derive(Debug, Deserialize)]
struct LexiconFile {
    modality: Modality,
    entries: Vec<LexiconEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticLexicon {
    pub modality: Modality,
    pub mode: LexiconMode,
    entries: Vec<LexiconEntry>,
}

impl SemanticLexicon {
    pub fn new(modality: Modality, mode: LexiconMode, entries: Vec<LexiconEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.feature.as_str()) {
                return Err(LexiconError::DuplicateFeature(e.feature.clone()));
            }
            if e.label.trim().is_empty() {
                return Err(LexiconError::EmptyLabel(e.feature.clone()));
            }
        }
        let entries = match mode {
            LexiconMode::AffectAware => entries,
            LexiconMode::FeatureName => entries
                .into_iter()
                .map(|e| LexiconEntry { label: e.feature.clone(), feature: e.feature })
                .collect(),
        };
        Ok(Self { modality, mode, entries })
    }

    pub fn from_json_str(json: &str, mode: LexiconMode) -> Result<Self> {
        let file: LexiconFile = serde_json::from_str(json)?;
        Self::new(file.modality, mode, file.entries)
    }

    /// The lexicon shipped with the crate for `modality`.
    pub fn builtin(modality: Modality, mode: LexiconMode) -> Self {
        let src = match modality {
            Modality::Facial => BUILTIN_FACIAL,
            Modality::Audio => BUILTIN_AUDIO,
        };
        Self::from_json_str(src, mode).expect("bundled lexicon is valid")
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn label(&self, feature: &str) -> Option<&str> {
        self.position(feature).map(|i| self.entries[i].label.as_str())
    }

    pub fn position(&self, feature: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.feature == feature)
    }
}

pub fn load_lexicon(path: &Path, mode: LexiconMode) -> Result<SemanticLexicon> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| LexiconError::Io { path: path.display().to_string(), source })?;
    SemanticLexicon::from_json_str(&text, mode)
}

/// Advisory mismatch between a lexicon and a feature set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    /// Features present in the data without a label.
    pub uncovered_features: Vec<String>,
    /// Labels whose feature is absent from the data.
    pub unused_labels: Vec<String>,
}

impl CoverageReport {
    pub fn is_empty(&self) -> bool {
        self.uncovered_features.is_empty() && self.unused_labels.is_empty()
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .uncovered_features
            .iter()
            .map(|f| format!("feature `{f}` has no lexicon label"))
            .collect();
        out.extend(self.unused_labels.iter().map(|f| format!("lexicon label for `{f}` is unused")));
        out
    }
}

pub fn validate_coverage(lexicon: &SemanticLexicon, feature_names: &[String]) -> CoverageReport {
    let names: HashSet<&str> = feature_names.iter().map(String::as_str).collect();
    CoverageReport {
        uncovered_features: feature_names
            .iter()
            .filter(|f| lexicon.position(f).is_none())
            .cloned()
            .collect(),
        unused_labels: lexicon
            .entries()
            .iter()
            .filter(|e| !names.contains(e.feature.as_str()))
            .map(|e| e.feature.clone())
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateModality {
    Facial,
    Audio,
    Multimodal,
}

impl From<Modality> for TemplateModality {
    fn from(m: Modality) -> Self {
        match m {
            Modality::Facial => TemplateModality::Facial,
            Modality::Audio => TemplateModality::Audio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemplateText {
    pub text: String,
    pub active_features: Vec<String>,
    pub modality: TemplateModality,
}

/// What to do with an active feature that has no lexicon entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    Strict,
    #[default]
    Lenient,
}

/// Compose the unimodal template for the active features of `mask`.
/// `feature_names[i]` names the feature behind `mask.bits[i]`.
pub fn compose_template(
    mask: &SalienceMask,
    feature_names: &[String],
    lexicon: &SemanticLexicon,
    strictness: Strictness,
) -> Result<TemplateText> {
    if mask.len() != feature_names.len() {
        return Err(LexiconError::MaskLength { mask: mask.len(), features: feature_names.len() });
    }
    let mut active: Vec<(usize, &str)> = Vec::new();
    for i in mask.active_indices() {
        match lexicon.position(&feature_names[i]) {
            Some(pos) => active.push((pos, feature_names[i].as_str())),
            None if strictness == Strictness::Strict => {
                return Err(LexiconError::MissingLabel(feature_names[i].clone()))
            }
            None => {}
        }
    }
    active.sort_by_key(|(pos, _)| *pos);
    let labels: Vec<&str> = active.iter().map(|(pos, _)| lexicon.entries[*pos].label.as_str()).collect();

    let body = match (lexicon.modality, labels.is_empty()) {
        (Modality::Facial, true) => FACIAL_FALLBACK.to_string(),
        (Modality::Audio, true) => AUDIO_FALLBACK.to_string(),
        (Modality::Facial, false) => format!("{FACIAL_PREFIX}{}", labels.join(", ")),
        (Modality::Audio, false) => format!("{AUDIO_PREFIX}{}.", labels.join(", ")),
    };
    Ok(TemplateText {
        text: format!("{body}{END_OF_TEXT}"),
        active_features: active.iter().map(|(_, f)| f.to_string()).collect(),
        modality: lexicon.modality.into(),
    })
}

fn strip_marker(text: &str) -> &str {
    text.strip_suffix(END_OF_TEXT).unwrap_or(text)
}

/// Join a facial and an audio template around a single terminal marker.
pub fn compose_multimodal(facial: &TemplateText, audio: &TemplateText) -> Result<TemplateText> {
    for t in [facial, audio] {
        if t.modality == TemplateModality::Multimodal {
            return Err(LexiconError::NotUnimodal(t.text.clone()));
        }
    }
    let text = format!(
        "{}{MODALITY_DELIMITER}{}{END_OF_TEXT}",
        strip_marker(&facial.text),
        strip_marker(&audio.text)
    );
    let mut active_features = facial.active_features.clone();
    active_features.extend(audio.active_features.iter().cloned());
    Ok(TemplateText { text, active_features, modality: TemplateModality::Multimodal })
}
