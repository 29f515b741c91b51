//! Frame loading, fixed-length windowing and min-max normalisation.
//!
//! Frame CSV: `subject_id,video_id,timestamp,<feature columns...>`.
//! Annotation CSV: `subject_id,video_id,timestamp,valence,arousal`.
//!
//! Windows are aligned to `t = 0` of every stream and never overlap. A
//! trailing window that does not fit completely inside the stream is dropped,
//! as is any window without frames or without annotation samples.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("cannot fit a normaliser on an empty training set")]
    EmptyTrainingSet,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("window length must be positive and finite, got {0}")]
    InvalidWindowLength(f64),
}

pub type Result<T> = std::result::Result<T, IngestError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Facial,
    Audio,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Facial => "facial",
            Modality::Audio => "audio",
        }
    }
}

/// One frame of pre-extracted features. Feature names are shared by every
/// frame of a file, so they are stored once behind an `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub subject_id: String,
    pub video_id: String,
    pub timestamp: f64,
    pub modality: Modality,
    names: Arc<[String]>,
    values: Vec<f64>,
}

impl FrameRecord {
    pub fn new(
        subject_id: impl Into<String>,
        video_id: impl Into<String>,
        timestamp: f64,
        modality: Modality,
        names: Arc<[String]>,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(names.len(), values.len(), "feature names and values differ in length");
        Self {
            subject_id: subject_id.into(),
            video_id: video_id.into(),
            timestamp,
            modality,
            names,
            values,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, feature: &str) -> Option<f64> {
        self.names.iter().position(|n| n == feature).map(|i| self.values[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub subject_id: String,
    pub video_id: String,
    pub timestamp: f64,
    pub valence: f64,
    pub arousal: f64,
}

/// One temporal segment with its mean-pooled features and affect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWindow {
    pub subject_id: String,
    pub video_id: String,
    /// Position of the window within its stream (`t_start / window_len`).
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub x_raw: Vec<f64>,
    pub a_valence: f64,
    pub a_arousal: f64,
}

impl FeatureWindow {
    pub fn same_stream(&self, other: &FeatureWindow) -> bool {
        self.subject_id == other.subject_id && self.video_id == other.video_id
    }
}

/// Column layout of `x_raw`: modality blocks in concatenation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBlock {
    pub modality: Modality,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub blocks: Vec<FeatureBlock>,
}

impl FeatureLayout {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.names.len()).sum()
    }

    /// `(block, column range in x_raw)` for every block.
    pub fn ranges(&self) -> Vec<(&FeatureBlock, std::ops::Range<usize>)> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = start..start + b.names.len();
                start = r.end;
                (b, r)
            })
            .collect()
    }

    pub fn block(&self, modality: Modality) -> Option<(&FeatureBlock, std::ops::Range<usize>)> {
        self.ranges().into_iter().find(|(b, _)| b.modality == modality)
    }
}

/// Windows sharing a single feature layout.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WindowSet {
    pub layout: FeatureLayout,
    pub windows: Vec<FeatureWindow>,
}

fn io_err(path: &Path, source: std::io::Error) -> IngestError {
    IngestError::Io { path: path.display().to_string(), source }
}

fn csv_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_f64(field: &str, line: u64, column: &str) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| IngestError::Parse {
        line,
        message: format!("column `{column}`: `{field}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(IngestError::Parse {
            line,
            message: format!("column `{column}`: value is not finite"),
        });
    }
    Ok(v)
}

fn check_header(headers: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    for (i, want) in expected.iter().enumerate() {
        match headers.get(i) {
            Some(h) if h.trim() == *want => {}
            other => {
                return Err(IngestError::Schema(format!(
                    "column {} must be `{want}`, found `{}`",
                    i + 1,
                    other.unwrap_or("<missing>")
                )))
            }
        }
    }
    Ok(())
}

/// Group `items` by stream key in order of first appearance, sort each group
/// by timestamp and reject repeated timestamps.
fn order_streams<T>(
    items: Vec<T>,
    key: impl Fn(&T) -> (String, String),
    time: impl Fn(&T) -> f64,
) -> Result<Vec<T>> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: HashMap<(String, String), Vec<T>> = HashMap::new();
    for item in items {
        let k = key(&item);
        if !groups.contains_key(&k) {
            order.push(k.clone());
        }
        groups.entry(k).or_default().push(item);
    }
    let mut out = Vec::new();
    for k in order {
        let mut g = groups.remove(&k).unwrap_or_default();
        g.sort_by(|a, b| time(a).total_cmp(&time(b)));
        if let Some(w) = g.windows(2).find(|w| time(&w[0]) >= time(&w[1])) {
            return Err(IngestError::Schema(format!(
                "stream ({}, {}): repeated timestamp {}",
                k.0,
                k.1,
                time(&w[1])
            )));
        }
        out.extend(g);
    }
    Ok(out)
}

/// Parse a frame CSV from any reader. Feature columns keep file order.
pub fn read_frames<R: Read>(reader: R, modality: Modality) -> Result<Vec<FrameRecord>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Schema(format!("unreadable header: {e}")))?
        .clone();
    check_header(&headers, &["subject_id", "video_id", "timestamp"])?;
    let names: Arc<[String]> = headers.iter().skip(3).map(|h| h.trim().to_string()).collect();
    if names.is_empty() {
        return Err(IngestError::Schema("frame file has no feature columns".into()));
    }
    let mut frames = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IngestError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = csv_line(&rec);
        if rec.len() != headers.len() {
            return Err(IngestError::Schema(format!(
                "line {line}: expected {} columns, found {}",
                headers.len(),
                rec.len()
            )));
        }
        let t = parse_f64(&rec[2], line, "timestamp")?;
        if t < 0.0 {
            return Err(IngestError::Parse { line, message: "negative timestamp".into() });
        }
        let values = names
            .iter()
            .enumerate()
            .map(|(i, n)| parse_f64(&rec[i + 3], line, n))
            .collect::<Result<Vec<_>>>()?;
        frames.push(FrameRecord::new(
            rec[0].trim(),
            rec[1].trim(),
            t,
            modality,
            names.clone(),
            values,
        ));
    }
    order_streams(
        frames,
        |f| (f.subject_id.clone(), f.video_id.clone()),
        |f| f.timestamp,
    )
}

pub fn load_frames(path: &Path, modality: Modality) -> Result<Vec<FrameRecord>> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_frames(file, modality)
}

/// Parse an annotation CSV. Affect values outside `[-1, 1]` are rejected.
pub fn read_annotations<R: Read>(reader: R) -> Result<Vec<AnnotationRecord>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| IngestError::Schema(format!("unreadable header: {e}")))?
        .clone();
    let expected = ["subject_id", "video_id", "timestamp", "valence", "arousal"];
    check_header(&headers, &expected)?;
    if headers.len() != expected.len() {
        return Err(IngestError::Schema(format!(
            "annotation file must have exactly {} columns",
            expected.len()
        )));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IngestError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = csv_line(&rec);
        if rec.len() != expected.len() {
            return Err(IngestError::Schema(format!(
                "line {line}: expected {} columns, found {}",
                expected.len(),
                rec.len()
            )));
        }
        let timestamp = parse_f64(&rec[2], line, "timestamp")?;
        let valence = parse_f64(&rec[3], line, "valence")?;
        let arousal = parse_f64(&rec[4], line, "arousal")?;
        for (name, v) in [("valence", valence), ("arousal", arousal)] {
            if !(-1.0..=1.0).contains(&v) {
                return Err(IngestError::Parse {
                    line,
                    message: format!("{name} {v} outside [-1, 1]"),
                });
            }
        }
        out.push(AnnotationRecord {
            subject_id: rec[0].trim().to_string(),
            video_id: rec[1].trim().to_string(),
            timestamp,
            valence,
            arousal,
        });
    }
    order_streams(out, |a| (a.subject_id.clone(), a.video_id.clone()), |a| a.timestamp)
}

pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_annotations(file)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Cut each stream into consecutive windows of `window_len` seconds and
/// mean-pool features and annotations inside each.
///
/// A stream lasts from `t = 0` to its last frame plus one median frame
/// interval; window `k` covers `[k·L, (k+1)·L)` and is kept only when it
/// ends inside the stream.
pub fn segment_windows(
    frames: &[FrameRecord],
    annotations: &[AnnotationRecord],
    window_len: f64,
) -> Result<Vec<FeatureWindow>> {
    if !(window_len.is_finite() && window_len > 0.0) {
        return Err(IngestError::InvalidWindowLength(window_len));
    }
    let mut ann_by_stream: HashMap<(&str, &str), Vec<&AnnotationRecord>> = HashMap::new();
    for a in annotations {
        ann_by_stream
            .entry((a.subject_id.as_str(), a.video_id.as_str()))
            .or_default()
            .push(a);
    }

    let mut out = Vec::new();
    let mut start = 0;
    while start < frames.len() {
        let first = &frames[start];
        let end = start
            + frames[start..]
                .iter()
                .take_while(|f| f.subject_id == first.subject_id && f.video_id == first.video_id)
                .count();
        let stream = &frames[start..end];
        start = end;

        let dim = stream[0].len();
        if let Some(bad) = stream.iter().find(|f| f.len() != dim) {
            return Err(IngestError::DimensionMismatch { expected: dim, actual: bad.len() });
        }
        let interval = if stream.len() >= 2 {
            median(stream.windows(2).map(|w| w[1].timestamp - w[0].timestamp).collect())
        } else {
            0.0
        };
        let duration = stream[stream.len() - 1].timestamp + interval;
        let n_windows = (duration / window_len + 1e-9).floor() as usize;
        if n_windows == 0 {
            continue;
        }

        let mut sums = vec![vec![0.0; dim]; n_windows];
        let mut counts = vec![0usize; n_windows];
        for f in stream {
            let k = (f.timestamp / window_len).floor() as usize;
            if k < n_windows {
                for (s, v) in sums[k].iter_mut().zip(f.values()) {
                    *s += v;
                }
                counts[k] += 1;
            }
        }
        let mut affect = vec![(0.0, 0.0, 0usize); n_windows];
        if let Some(anns) = ann_by_stream.get(&(first.subject_id.as_str(), first.video_id.as_str())) {
            for a in anns {
                let k = (a.timestamp / window_len).floor() as usize;
                if k < n_windows {
                    affect[k].0 += a.valence;
                    affect[k].1 += a.arousal;
                    affect[k].2 += 1;
                }
            }
        }
        for k in 0..n_windows {
            let (v, ar, na) = affect[k];
            if counts[k] == 0 || na == 0 {
                continue;
            }
            let n = counts[k] as f64;
            let t_start = k as f64 * window_len;
            out.push(FeatureWindow {
                subject_id: first.subject_id.clone(),
                video_id: first.video_id.clone(),
                index: k,
                t_start,
                t_end: t_start + window_len,
                x_raw: sums[k].iter().map(|s| s / n).collect(),
                a_valence: v / na as f64,
                a_arousal: ar / na as f64,
            });
        }
    }
    Ok(out)
}

/// Build a [`WindowSet`] for one or more modalities. Windows present in every
/// modality are kept (inner join on stream and window index) and their
/// feature vectors are concatenated in the given modality order.
pub fn build_window_set(
    modalities: &[(Modality, &[FrameRecord])],
    annotations: &[AnnotationRecord],
    window_len: f64,
) -> Result<WindowSet> {
    let mut layout = FeatureLayout::default();
    let mut joined: Option<Vec<FeatureWindow>> = None;
    for (modality, frames) in modalities {
        let names = frames
            .first()
            .map(|f| f.feature_names().to_vec())
            .unwrap_or_default();
        layout.blocks.push(FeatureBlock { modality: *modality, names });
        let windows = segment_windows(frames, annotations, window_len)?;
        joined = Some(match joined {
            None => windows,
            Some(prev) => {
                let index: HashMap<(&str, &str, usize), &FeatureWindow> = windows
                    .iter()
                    .map(|w| ((w.subject_id.as_str(), w.video_id.as_str(), w.index), w))
                    .collect();
                prev.into_iter()
                    .filter_map(|mut w| {
                        let other =
                            index.get(&(w.subject_id.as_str(), w.video_id.as_str(), w.index))?;
                        w.x_raw.extend_from_slice(&other.x_raw);
                        Some(w)
                    })
                    .collect()
            }
        });
    }
    Ok(WindowSet { layout, windows: joined.unwrap_or_default() })
}

/// Per-dimension minimum and maximum of the training windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub fitted_on: usize,
}

pub fn fit_normalizer(train_windows: &[FeatureWindow]) -> Result<NormStats> {
    let first = train_windows.first().ok_or(IngestError::EmptyTrainingSet)?;
    let d = first.x_raw.len();
    let mut min = first.x_raw.clone();
    let mut max = first.x_raw.clone();
    for w in &train_windows[1..] {
        if w.x_raw.len() != d {
            return Err(IngestError::DimensionMismatch { expected: d, actual: w.x_raw.len() });
        }
        for i in 0..d {
            min[i] = min[i].min(w.x_raw[i]);
            max[i] = max[i].max(w.x_raw[i]);
        }
    }
    Ok(NormStats { min, max, fitted_on: train_windows.len() })
}

/// Min-max scale into `[0, 1]`. Values outside the training range are
/// clamped and constant training dimensions map to `0.0`.
pub fn apply_normalizer(stats: &NormStats, x_raw: &[f64]) -> Result<Vec<f64>> {
    if x_raw.len() != stats.min.len() {
        return Err(IngestError::DimensionMismatch {
            expected: stats.min.len(),
            actual: x_raw.len(),
        });
    }
    Ok(x_raw
        .iter()
        .zip(stats.min.iter().zip(&stats.max))
        .map(|(&x, (&lo, &hi))| {
            if hi > lo {
                ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect())
}

pub fn write_windows_jsonl(path: &Path, windows: &[FeatureWindow]) -> anyhow::Result<()> {
    crate::io::write_jsonl(path, windows)
}

pub fn read_windows_jsonl(path: &Path) -> anyhow::Result<Vec<FeatureWindow>> {
    crate::io::read_jsonl(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize, prefix: &str) -> Arc<[String]> {
        (0..n).map(|i| format!("{prefix}_{i}")).collect()
    }

    fn stream(duration: f64, rate: f64, value: f64) -> (Vec<FrameRecord>, Vec<AnnotationRecord>) {
        let n = (duration * rate).round() as usize;
        let nm = names(2, "f");
        let frames = (0..n)
            .map(|i| {
                let t = i as f64 / rate;
                FrameRecord::new("s1", "v1", t, Modality::Facial, nm.clone(), vec![value, t])
            })
            .collect();
        let anns = (0..n)
            .map(|i| AnnotationRecord {
                subject_id: "s1".into(),
                video_id: "v1".into(),
                timestamp: i as f64 / rate,
                valence: 0.1,
                arousal: -0.2,
            })
            .collect();
        (frames, anns)
    }

    #[test]
    fn parses_two_mfcc_rows() {
        let mut csv = String::from("subject_id,video_id,timestamp");
        for i in 0..13 {
            csv.push_str(&format!(",mfcc_{i}"));
        }
        csv.push('\n');
        for t in [0.0, 0.04] {
            csv.push_str(&format!("s1,v1,{t}"));
            for i in 0..13 {
                csv.push_str(&format!(",{}", i as f64 * 0.5));
            }
            csv.push('\n');
        }
        let frames = read_frames(csv.as_bytes(), Modality::Audio).unwrap();
        assert_eq!(frames.len(), 2);
        assert!(frames.iter().all(|f| f.len() == 13));
        assert_eq!(frames[0].feature_names()[12], "mfcc_12");
        assert_eq!(frames[1].get("mfcc_2"), Some(1.0));
    }

    #[test]
    fn header_only_is_empty() {
        let frames = read_frames("subject_id,video_id,timestamp,a,b\n".as_bytes(), Modality::Facial)
            .unwrap();
        assert!(frames.is_empty());
    }

    #[test]
    fn non_numeric_cell_names_the_line() {
        let csv = "subject_id,video_id,timestamp,a\ns,v,0,1.0\ns,v,1,oops\n";
        match read_frames(csv.as_bytes(), Modality::Facial) {
            Err(IngestError::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_row_is_schema_error() {
        let csv = "subject_id,video_id,timestamp,a,b\ns,v,0,1.0,2.0\ns,v,1,1.0\n";
        assert!(matches!(
            read_frames(csv.as_bytes(), Modality::Facial),
            Err(IngestError::Schema(_))
        ));
    }

    #[test]
    fn frames_are_sorted_per_stream_and_duplicates_rejected() {
        let csv = "subject_id,video_id,timestamp,a\ns,v,2,1\nq,v,0,5\ns,v,1,0\n";
        let frames = read_frames(csv.as_bytes(), Modality::Facial).unwrap();
        let ts: Vec<_> = frames.iter().map(|f| (f.subject_id.as_str(), f.timestamp)).collect();
        assert_eq!(ts, vec![("s", 1.0), ("s", 2.0), ("q", 0.0)]);

        let dup = "subject_id,video_id,timestamp,a\ns,v,1,1\ns,v,1,0\n";
        assert!(matches!(read_frames(dup.as_bytes(), Modality::Facial), Err(IngestError::Schema(_))));
    }

    #[test]
    fn annotations_outside_unit_range_rejected() {
        let csv = "subject_id,video_id,timestamp,valence,arousal\ns,v,0,0.5,1.5\n";
        assert!(matches!(read_annotations(csv.as_bytes()), Err(IngestError::Parse { line: 2, .. })));
        let ok = "subject_id,video_id,timestamp,valence,arousal\ns,v,0,-1,1\n";
        assert_eq!(read_annotations(ok.as_bytes()).unwrap().len(), 1);
    }

    #[test]
    fn ten_seconds_into_two_five_second_windows() {
        let (frames, anns) = stream(10.0, 4.0, 0.4);
        let w = segment_windows(&frames, &anns, 5.0).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!((w[0].t_start, w[0].t_end), (0.0, 5.0));
        assert_eq!((w[1].t_start, w[1].t_end), (5.0, 10.0));
        for win in &w {
            assert!((win.x_raw[0] - 0.4).abs() < 1e-12);
            assert!((win.a_valence - 0.1).abs() < 1e-12);
            assert!((win.a_arousal + 0.2).abs() < 1e-12);
        }
        // the mean of t over [0, 5) sampled at 4 Hz is 2.375
        assert!((w[0].x_raw[1] - 2.375).abs() < 1e-12);
    }

    #[test]
    fn trailing_partial_window_dropped() {
        let (frames, anns) = stream(7.0, 1.0, 0.0);
        // frames at 0..=6, stream spans [0, 7)
        let w = segment_windows(&frames, &anns, 3.0).unwrap();
        // independent enumeration of complete intervals [3k, 3k+3) within [0, 7)
        let expected: Vec<(f64, f64)> = (0..)
            .map(|k| (3.0 * k as f64, 3.0 * k as f64 + 3.0))
            .take_while(|&(_, e)| e <= 7.0)
            .collect();
        assert_eq!(expected.len(), 2);
        let got: Vec<_> = w.iter().map(|w| (w.t_start, w.t_end)).collect();
        assert_eq!(got, expected);
        assert_eq!(w[1].x_raw[1], 4.0);
    }

    #[test]
    fn windows_without_annotations_dropped() {
        let (frames, mut anns) = stream(10.0, 1.0, 0.0);
        anns.retain(|a| a.timestamp < 5.0);
        let w = segment_windows(&frames, &anns, 5.0).unwrap();
        assert_eq!(w.len(), 1);
        assert!(segment_windows(&[], &[], 3.0).unwrap().is_empty());
    }

    #[test]
    fn joins_modalities() {
        let (facial, anns) = stream(10.0, 2.0, 0.3);
        let audio: Vec<FrameRecord> = (0..7)
            .map(|i| {
                FrameRecord::new("s1", "v1", i as f64, Modality::Audio, names(1, "mfcc"), vec![1.0])
            })
            .collect();
        let set = build_window_set(
            &[(Modality::Facial, &facial), (Modality::Audio, &audio)],
            &anns,
            5.0,
        )
        .unwrap();
        // audio covers [0, 7) so only the first window survives the join
        assert_eq!(set.windows.len(), 1);
        assert_eq!(set.layout.dim(), 3);
        assert_eq!(set.windows[0].x_raw.len(), 3);
        assert_eq!(set.windows[0].x_raw[2], 1.0);
        assert_eq!(set.layout.block(Modality::Audio).unwrap().1, 2..3);
    }

    fn win(x: Vec<f64>) -> FeatureWindow {
        FeatureWindow {
            subject_id: "s".into(),
            video_id: "v".into(),
            index: 0,
            t_start: 0.0,
            t_end: 3.0,
            x_raw: x,
            a_valence: 0.0,
            a_arousal: 0.0,
        }
    }

    #[test]
    fn normaliser_fit_and_apply() {
        let ws: Vec<_> = [1.0, 3.0, 5.0].iter().map(|&v| win(vec![v, 2.0])).collect();
        let stats = fit_normalizer(&ws).unwrap();
        assert_eq!((stats.min[0], stats.max[0]), (1.0, 5.0));
        assert_eq!((stats.min[1], stats.max[1]), (2.0, 2.0));
        assert_eq!(stats.fitted_on, 3);
        assert_eq!(apply_normalizer(&stats, &[3.0, 2.0]).unwrap(), vec![0.5, 0.0]);
        assert_eq!(apply_normalizer(&stats, &[9.0, 2.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(apply_normalizer(&stats, &[-4.0, 7.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            apply_normalizer(&stats, &[1.0]),
            Err(IngestError::DimensionMismatch { expected: 2, actual: 1 })
        ));

        let single = fit_normalizer(&[win(vec![4.0, -1.0])]).unwrap();
        assert_eq!(single.min, single.max);
        assert!(matches!(fit_normalizer(&[]), Err(IngestError::EmptyTrainingSet)));
    }

    #[test]
    fn window_jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.jsonl");
        let ws = vec![win(vec![0.1, 1.0 / 3.0]), win(vec![2.5, -7.0])];
        write_windows_jsonl(&path, &ws).unwrap();
        assert_eq!(read_windows_jsonl(&path).unwrap(), ws);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().next().unwrap().contains("\"x_raw\""));
    }
}
