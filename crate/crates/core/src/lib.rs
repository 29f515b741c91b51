//! Language-conditioned affect-change prediction.
//!
//! Window-level handcrafted behavioural features are turned into
//! salience-masked text through a fixed semantic lexicon, embedded with a
//! frozen sentence encoder, fused with the raw features and fed to a small
//! preference head that predicts whether valence or arousal goes up or down
//! between consecutive windows.
//!
//! The pipeline, bottom-up:
//!
//! - [`ingest`]: frame CSVs to fixed-length mean-pooled windows, min-max normalisation.
//! - [`salience`]: per-window Otsu split into salient / non-salient features.
//! - [`lexicon`]: feature-to-label mapping and deterministic template text.
//! - [`encoding`]: frozen encoder backends and feature/embedding fusion.
//! - [`preference`]: margin-gated directional pairs over consecutive windows.
//! - [`learner`]: the two-hidden-layer MLP head trained with BCE + Adam + L2.
//! - [`protocol`]: subject-independent folds, experiment runner, Wilcoxon test, reports.
//! - [`cli`]: the `lasca` command-line front end.

pub mod cli;
pub mod encoding;
pub mod ingest;
pub mod io;
pub mod learner;
pub mod lexicon;
pub mod preference;
pub mod protocol;
pub mod salience;
pub mod synthetic;

pub use encoding::{EncoderSpec, FusedRepresentation, SemanticEmbedding, SentenceEncoder};
pub use ingest::{FeatureWindow, FrameRecord, Modality, NormStats};
pub use learner::{HeadConfig, PreferenceHead};
pub use lexicon::{LexiconMode, SemanticLexicon, TemplateText};
pub use preference::{AffectDimension, PairConfig, PreferencePair};
pub use protocol::{ExperimentConfig, FoldResult};
pub use salience::SalienceMask;
