//! Per-window salience via Otsu's threshold.
//!
//! The normalised feature values of a window are split into two groups by the
//! threshold that maximises the between-group variance
//! `w0 · w1 · (mu0 - mu1)^2`. Candidates are the midpoints between consecutive
//! distinct sorted values, scanned exhaustively. When several candidates reach
//! the maximum the smallest one wins, so more features end up salient.

use serde::{Deserialize, Serialize};

/// Relative slack under which two between-class variances count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Threshold returned alongside an all-zero mask for constant input.
pub const DEGENERATE_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OtsuOutcome {
    Threshold(f64),
    /// Fewer than two distinct values: no split exists.
    Degenerate,
}

impl OtsuOutcome {
    pub fn threshold(self) -> Option<f64> {
        match self {
            OtsuOutcome::Threshold(t) => Some(t),
            OtsuOutcome::Degenerate => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalienceMask {
    pub bits: Vec<bool>,
    pub threshold: f64,
}

impl SalienceMask {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    /// Mask as a `0`/`1` string, e.g. `"000111"`.
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

pub fn otsu_threshold(values: &[f64]) -> OtsuOutcome {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    // (distinct value, multiplicity)
    let mut levels: Vec<(f64, usize)> = Vec::new();
    for &v in &sorted {
        match levels.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => levels.push((v, 1)),
        }
    }
    if levels.len() < 2 {
        return OtsuOutcome::Degenerate;
    }

    let n = sorted.len() as f64;
    let total: f64 = sorted.iter().sum();
    let mut below_count = 0usize;
    let mut below_sum = 0.0;
    let mut scores = Vec::with_capacity(levels.len() - 1);
    for &(v, c) in &levels[..levels.len() - 1] {
        below_count += c;
        below_sum += v * c as f64;
        let n0 = below_count as f64;
        let n1 = n - n0;
        let mu0 = below_sum / n0;
        let mu1 = (total - below_sum) / n1;
        let w0 = n0 / n;
        let w1 = n1 / n;
        scores.push(w0 * w1 * (mu0 - mu1) * (mu0 - mu1));
    }

    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let k = scores
        .iter()
        .position(|&s| s >= best - TIE_TOLERANCE * best.abs())
        .unwrap_or(0);
    OtsuOutcome::Threshold(0.5 * (levels[k].0 + levels[k + 1].0))
}

/// `bits[i] = values[i] > threshold`; constant input gives an empty mask.
pub fn salience_mask(values: &[f64]) -> SalienceMask {
    match otsu_threshold(values) {
        OtsuOutcome::Threshold(t) => SalienceMask {
            bits: values.iter().map(|&v| v > t).collect(),
            threshold: t,
        },
        OtsuOutcome::Degenerate => SalienceMask {
            bits: vec![false; values.len()],
            threshold: DEGENERATE_THRESHOLD,
        },
    }
}
