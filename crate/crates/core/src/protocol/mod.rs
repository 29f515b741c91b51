//! Experimental protocol: subject-independent splits, the per-fold
//! train/evaluate loop, paired significance testing and report tables.

use thiserror::Error;

pub mod experiment;
pub mod folds;
pub mod report;
pub mod wilcoxon;

pub use experiment::{
    fit_head, prepare_fold, run_experiment, run_fold, ExperimentConfig, ExperimentData, ExperimentModality, ExperimentOutcome, FoldResult,
    Lexicons, PreparedFold, Representation, SplitMode, TrainingConfig,
};
pub use folds::{kfold_splits, seeded_splits, subject_folds, SubjectSplit};
pub use report::{render_report, CellResult, Report};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonMethod, WilcoxonResult};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{subjects} subjects cannot fill {folds} folds")]
    TooFewSubjects { subjects: usize, folds: usize },
    #[error("fold {fold}: subjects {subjects:?} appear in both train and test")]
    SubjectLeakage { fold: usize, subjects: Vec<String> },
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error(transparent)]
    Lexicon(#[from] crate::lexicon::LexiconError),
    #[error(transparent)]
    Encoding(#[from] crate::encoding::EncodingError),
    #[error(transparent)]
    Preference(#[from] crate::preference::PreferenceError),
    #[error(transparent)]
    Learner(#[from] crate::learner::LearnerError),
}
