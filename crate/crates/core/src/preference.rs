//! Margin-gated preference pairs between consecutive windows.
//!
//! A transition `t -> t+1` inside one stream is kept when
//! `|a_{t+1} - a_t| / max(|a_t|, eps) > tau`. Each kept transition yields two
//! pairs: the forward one, labelled 1 when affect rises, and the reversed one
//! with the complementary label and negated difference.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::FeatureWindow;

pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum PreferenceError {
    #[error("representations differ in dimension: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{windows} windows but {reps} representations")]
    CountMismatch { windows: usize, reps: usize },
    #[error("invalid pair config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffectDimension {
    Arousal,
    Valence,
}

impl AffectDimension {
    pub fn of(self, w: &FeatureWindow) -> f64 {
        match self {
            AffectDimension::Valence => w.a_valence,
            AffectDimension::Arousal => w.a_arousal,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AffectDimension::Valence => "valence",
            AffectDimension::Arousal => "arousal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairConfig {
    pub tau: f64,
    pub epsilon: f64,
    pub dimension: AffectDimension,
}

impl PairConfig {
    pub fn new(tau: f64, dimension: AffectDimension) -> Self {
        Self { tau, epsilon: DEFAULT_EPSILON, dimension }
    }

    pub fn validate(&self) -> Result<(), PreferenceError> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(PreferenceError::InvalidConfig(format!("tau must be > 0, got {}", self.tau)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(PreferenceError::InvalidConfig(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Relative change `|a_next - a_t| / max(|a_t|, eps)`.
pub fn gate_ratio(a_t: f64, a_next: f64, epsilon: f64) -> f64 {
    (a_next - a_t).abs() / a_t.abs().max(epsilon)
}

pub fn gate(a_t: f64, a_next: f64, cfg: &PairConfig) -> bool {
    gate_ratio(a_t, a_next, cfg.epsilon) > cfg.tau
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferencePair {
    /// Index of the first window in the slice handed to [`build_pairs`].
    pub first: usize,
    pub second: usize,
    pub dimension: AffectDimension,
    /// 1 when affect increases from `first` to `second`.
    pub label: u8,
    /// `z_second - z_first`.
    pub delta_z: Vec<f64>,
}

impl PreferencePair {
    pub fn reversed(&self) -> Self {
        Self {
            first: self.second,
            second: self.first,
            dimension: self.dimension,
            label: 1 - self.label,
            delta_z: self.delta_z.iter().map(|v| -v).collect(),
        }
    }
}

/// `z_b - z_a`.
pub fn delta(z_a: &[f64], z_b: &[f64]) -> Result<Vec<f64>, PreferenceError> {
    if z_a.len() != z_b.len() {
        return Err(PreferenceError::DimensionMismatch(z_a.len(), z_b.len()));
    }
    Ok(z_a.iter().zip(z_b).map(|(a, b)| b - a).collect())
}

/// True when `b` directly follows `a` in the same stream.
pub fn adjacent(a: &FeatureWindow, b: &FeatureWindow) -> bool {
    a.same_stream(b) && b.index == a.index + 1
}

/// Gated transitions `(t, t+1)` over a time-ordered window slice.
pub fn gated_transitions(windows: &[FeatureWindow], cfg: &PairConfig) -> Vec<(usize, usize)> {
    (1..windows.len())
        .filter(|&i| adjacent(&windows[i - 1], &windows[i]))
        .filter(|&i| gate(cfg.dimension.of(&windows[i - 1]), cfg.dimension.of(&windows[i]), cfg))
        .map(|i| (i - 1, i))
        .collect()
}

/// Build both-order pairs for every gated transition. `reps[i]` is the
/// representation of `windows[i]`; windows must be time-ordered per stream.
pub fn build_pairs(
    windows: &[FeatureWindow],
    reps: &[Vec<f64>],
    cfg: &PairConfig,
) -> Result<Vec<PreferencePair>, PreferenceError> {
    cfg.validate()?;
    if windows.len() != reps.len() {
        return Err(PreferenceError::CountMismatch { windows: windows.len(), reps: reps.len() });
    }
    let mut out = Vec::new();
    for (t, next) in gated_transitions(windows, cfg) {
        let a_t = cfg.dimension.of(&windows[t]);
        let a_next = cfg.dimension.of(&windows[next]);
        let forward = PreferencePair {
            first: t,
            second: next,
            dimension: cfg.dimension,
            label: u8::from(a_next > a_t),
            delta_z: delta(&reps[t], &reps[next])?,
        };
        let backward = forward.reversed();
        out.push(forward);
        out.push(backward);
    }
    Ok(out)
}

/// Audit line for a pair dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAudit {
    pub subject_id: String,
    pub video_id: String,
    pub first: usize,
    pub second: usize,
    pub a_first: f64,
    pub a_second: f64,
    /// Gate ratio of the underlying forward transition.
    pub ratio: f64,
    pub label: u8,
}

pub fn audit_pairs(windows: &[FeatureWindow], pairs: &[PreferencePair], cfg: &PairConfig) -> Vec<PairAudit> {
    pairs
        .iter()
        .map(|p| {
            let (earlier, later) = if p.first < p.second { (p.first, p.second) } else { (p.second, p.first) };
            PairAudit {
                subject_id: windows[p.first].subject_id.clone(),
                video_id: windows[p.first].video_id.clone(),
                first: p.first,
                second: p.second,
                a_first: cfg.dimension.of(&windows[p.first]),
                a_second: cfg.dimension.of(&windows[p.second]),
                ratio: gate_ratio(cfg.dimension.of(&windows[earlier]), cfg.dimension.of(&windows[later]), cfg.epsilon),
                label: p.label,
            }
        })
        .collect()
}
