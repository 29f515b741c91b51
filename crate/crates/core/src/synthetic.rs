//! Planted-signal data for end-to-end checks.
//!
//! Each subject has one stream made of fixed-length segments. A segment is in
//! state "up" or "down"; valence and arousal sit at `+level` or `-level` with
//! a little noise, so only state changes pass the preference gate. The facial
//! block carries two signals about the state:
//!
//! - a *mask-visible* cue: in "up" segments the cue feature sits in the upper
//!   cluster of the window's values and is salient; in "down" segments it sits
//!   in the lower part. Cluster levels and the set of co-active distractor
//!   features are redrawn per segment, so the cue's raw value overlaps heavily
//!   between states while its salience does not;
//! - a weak raw *signal* feature whose level follows the state under heavy noise.
//!
//! Features are constant within a segment apart from per-frame jitter, and
//! segments last a common multiple of the window lengths, so the same
//! structure survives mean pooling at any window length that divides the
//! segment length. The audio block is pure noise. [`shuffle_affect`] turns
//! any window set into a chance-level control.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ingest::{build_window_set, AnnotationRecord, FeatureWindow, FrameRecord, Modality, WindowSet};
use crate::lexicon::{LexiconMode, SemanticLexicon};

pub const CUE_FEATURE: &str = "Face_mouthSmileLeft";
pub const SIGNAL_FEATURE: &str = "Face_jawOpen";
pub const AUDIO_FEATURES: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedConfig {
    pub subjects: usize,
    pub segments_per_subject: usize,
    /// Seconds; should be a multiple of every window length used.
    pub segment_len: f64,
    pub frame_rate: f64,
    pub affect_level: f64,
    pub affect_noise: f64,
    /// Probability that the state flips at a segment boundary.
    pub switch_prob: f64,
    pub frame_jitter: f64,
    /// Separation of the signal feature between states.
    pub signal_gap: f64,
    pub signal_noise: f64,
    /// Range of distractor features co-active with the upper cluster.
    pub distractors: (usize, usize),
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            subjects: 16,
            segments_per_subject: 40,
            segment_len: 15.0,
            frame_rate: 1.0,
            affect_level: 0.4,
            affect_noise: 0.004,
            switch_prob: 0.8,
            frame_jitter: 0.004,
            signal_gap: 0.1,
            signal_noise: 0.15,
            distractors: (6, 18),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedDataset {
    pub facial: Vec<FrameRecord>,
    pub audio: Vec<FrameRecord>,
    pub annotations: Vec<AnnotationRecord>,
}

/// Paths of a fixture written by [`PlantedDataset::write_csv`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixturePaths {
    pub facial: PathBuf,
    pub audio: PathBuf,
    pub annotations: PathBuf,
}

pub fn facial_feature_names() -> Vec<String> {
    SemanticLexicon::builtin(Modality::Facial, LexiconMode::AffectAware)
        .entries()
        .iter()
        .map(|e| e.feature.clone())
        .collect()
}

pub fn audio_feature_names() -> Vec<String> {
    (0..AUDIO_FEATURES).map(|i| format!("mfcc_{i}")).collect()
}

/// Facial vector of one segment.
fn facial_segment(up: bool, names: &[String], cfg: &PlantedConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let high = rng.random_range(0.45..0.95);
    let low = rng.random_range(0.0..0.3);
    let spread = 0.03;
    let cue = names.iter().position(|n| n == CUE_FEATURE).expect("cue feature in lexicon");
    let signal = names.iter().position(|n| n == SIGNAL_FEATURE).expect("signal feature in lexicon");
    let distractors: Vec<usize> = (0..names.len()).filter(|&i| i != cue && i != signal).collect();
    let k = rng.random_range(cfg.distractors.0..=cfg.distractors.1);
    let active: Vec<usize> = distractors.choose_multiple(rng, k).copied().collect();

    let mut v = vec![0.0; names.len()];
    for &i in &distractors {
        let centre = if active.contains(&i) { high } else { low };
        v[i] = centre + rng.random_range(-spread..spread);
    }
    v[cue] = if up {
        high + rng.random_range(-spread..spread)
    } else {
        low + rng.random_range(0.1..0.4) * (high - low)
    };
    let noise = Normal::new(0.0, cfg.signal_noise).expect("finite noise");
    let sign = if up { 1.0 } else { -1.0 };
    v[signal] = 0.5 + 0.5 * cfg.signal_gap * sign + noise.sample(rng);
    v
}

pub fn planted_dataset(cfg: &PlantedConfig) -> PlantedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let facial_names: Arc<[String]> = facial_feature_names().into();
    let audio_names: Arc<[String]> = audio_feature_names().into();
    let jitter = Normal::new(0.0, cfg.frame_jitter).expect("finite jitter");
    let affect_noise = Normal::new(0.0, cfg.affect_noise).expect("finite noise");
    let frames_per_segment = (cfg.segment_len * cfg.frame_rate).round() as usize;

    struct Segment {
        subject: String,
        index: usize,
        facial: Vec<f64>,
        audio: Vec<f64>,
        valence: f64,
        arousal: f64,
    }
    let mut segments: Vec<Segment> = Vec::new();
    for s in 0..cfg.subjects {
        let subject = format!("S{s:02}");
        let mut up = rng.random_bool(0.5);
        for index in 0..cfg.segments_per_subject {
            if index > 0 && rng.random_bool(cfg.switch_prob) {
                up = !up;
            }
            let sign = if up { 1.0 } else { -1.0 };
            let facial = facial_segment(up, &facial_names, cfg, &mut rng);
            let audio = (0..AUDIO_FEATURES).map(|_| rng.random_range(-1.0..1.0)).collect();
            segments.push(Segment {
                subject: subject.clone(),
                index,
                facial,
                audio,
                valence: sign * cfg.affect_level,
                arousal: sign * cfg.affect_level * 0.9,
            });
        }
    }
    let mut out = PlantedDataset { facial: Vec::new(), audio: Vec::new(), annotations: Vec::new() };
    for seg in &segments {
        for f in 0..frames_per_segment {
            let t = (seg.index * frames_per_segment + f) as f64 / cfg.frame_rate;
            let facial: Vec<f64> = seg.facial.iter().map(|v| v + jitter.sample(&mut rng)).collect();
            let audio: Vec<f64> = seg.audio.iter().map(|v| v + jitter.sample(&mut rng)).collect();
            out.facial.push(FrameRecord::new(&*seg.subject, "v0", t, Modality::Facial, facial_names.clone(), facial));
            out.audio.push(FrameRecord::new(&*seg.subject, "v0", t, Modality::Audio, audio_names.clone(), audio));
            out.annotations.push(AnnotationRecord {
                subject_id: seg.subject.clone(),
                video_id: "v0".into(),
                timestamp: t,
                valence: (seg.valence + affect_noise.sample(&mut rng)).clamp(-1.0, 1.0),
                arousal: (seg.arousal + affect_noise.sample(&mut rng)).clamp(-1.0, 1.0),
            });
        }
    }
    out
}

/// Permute `(valence, arousal)` across all windows, destroying every link
/// between features and affect while keeping the marginal distribution.
pub fn shuffle_affect(windows: &mut [FeatureWindow], seed: u64) {
    let mut affect: Vec<(f64, f64)> = windows.iter().map(|w| (w.a_valence, w.a_arousal)).collect();
    affect.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for (w, (v, a)) in windows.iter_mut().zip(affect) {
        w.a_valence = v;
        w.a_arousal = a;
    }
}

impl PlantedDataset {
    pub fn window_set(&self, window_len: f64, modalities: &[Modality]) -> crate::ingest::Result<WindowSet> {
        let blocks: Vec<(Modality, &[FrameRecord])> = modalities
            .iter()
            .map(|&m| match m {
                Modality::Facial => (m, self.facial.as_slice()),
                Modality::Audio => (m, self.audio.as_slice()),
            })
            .collect();
        build_window_set(&blocks, &self.annotations, window_len)
    }

    /// Write `facial.csv`, `audio.csv` and `annotations.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> std::io::Result<FixturePaths> {
        std::fs::create_dir_all(dir)?;
        let paths = FixturePaths {
            facial: dir.join("facial.csv"),
            audio: dir.join("audio.csv"),
            annotations: dir.join("annotations.csv"),
        };
        crate::io::atomic_write(&paths.facial, frames_csv(&self.facial).as_bytes())?;
        crate::io::atomic_write(&paths.audio, frames_csv(&self.audio).as_bytes())?;
        crate::io::atomic_write(&paths.annotations, annotations_csv(&self.annotations).as_bytes())?;
        Ok(paths)
    }
}

/// Frame CSV text; floats use their shortest round-trip form.
pub fn frames_csv(frames: &[FrameRecord]) -> String {
    let mut s = String::from("subject_id,video_id,timestamp");
    if let Some(f) = frames.first() {
        for n in f.feature_names() {
            s.push(',');
            s.push_str(n);
        }
    }
    s.push('\n');
    for f in frames {
        let _ = write!(s, "{},{},{}", f.subject_id, f.video_id, f.timestamp);
        for v in f.values() {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

pub fn annotations_csv(annotations: &[AnnotationRecord]) -> String {
    let mut s = String::from("subject_id,video_id,timestamp,valence,arousal\n");
    for a in annotations {
        let _ = writeln!(s, "{},{},{},{},{}", a.subject_id, a.video_id, a.timestamp, a.valence, a.arousal);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{read_annotations, read_frames};
    use crate::preference::{build_pairs, AffectDimension, PairConfig};

    fn small() -> PlantedConfig {
        PlantedConfig { subjects: 3, segments_per_subject: 6, ..Default::default() }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = planted_dataset(&small());
        let b = planted_dataset(&small());
        assert_eq!(a.facial, b.facial);
        assert_eq!(a.annotations, b.annotations);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = planted_dataset(&small());
        let frames = read_frames(frames_csv(&d.facial).as_bytes(), Modality::Facial).unwrap();
        assert_eq!(frames, d.facial);
        let anns = read_annotations(annotations_csv(&d.annotations).as_bytes()).unwrap();
        assert_eq!(anns, d.annotations);
    }

    #[test]
    fn windows_fit_segments_at_both_lengths() {
        let d = planted_dataset(&small());
        for (len, per_segment) in [(3.0, 5), (5.0, 3)] {
            let ws = d.window_set(len, &[Modality::Facial, Modality::Audio]).unwrap();
            assert_eq!(ws.windows.len(), 3 * 6 * per_segment);
            assert_eq!(ws.layout.dim(), 43 + AUDIO_FEATURES);
        }
    }

    #[test]
    fn shuffling_keeps_affect_marginals() {
        let d = planted_dataset(&small());
        let ws = d.window_set(3.0, &[Modality::Facial]).unwrap();
        let mut shuffled = ws.windows.clone();
        shuffle_affect(&mut shuffled, 1);
        let key = |w: &FeatureWindow| (w.a_valence.to_bits(), w.a_arousal.to_bits());
        let mut a: Vec<_> = ws.windows.iter().map(key).collect();
        let mut b: Vec<_> = shuffled.iter().map(key).collect();
        assert_ne!(a, b);
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert!(ws.windows.iter().zip(&shuffled).all(|(x, y)| x.x_raw == y.x_raw));
    }

    #[test]
    fn only_state_changes_pass_the_gate() {
        let d = planted_dataset(&small());
        let ws = d.window_set(5.0, &[Modality::Facial]).unwrap();
        let reps: Vec<Vec<f64>> = ws.windows.iter().map(|w| w.x_raw.clone()).collect();
        let pairs = build_pairs(&ws.windows, &reps, &PairConfig::new(0.1, AffectDimension::Valence)).unwrap();
        assert!(!pairs.is_empty());
        for p in &pairs {
            let (a, b) = (&ws.windows[p.first], &ws.windows[p.second]);
            assert!(a.a_valence.signum() != b.a_valence.signum());
        }
    }
}
