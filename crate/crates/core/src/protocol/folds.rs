//! Subject-level splits: k-fold partitions and seeded random hold-outs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ProtocolError;

/// One train/test split over subject ids, both sides sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectSplit {
    pub fold: usize,
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl SubjectSplit {
    pub fn is_disjoint(&self) -> bool {
        self.test.iter().all(|s| self.train.binary_search(s).is_err())
    }
}

fn unique_sorted(subjects: &[String]) -> Vec<String> {
    let mut s = subjects.to_vec();
    s.sort();
    s.dedup();
    s
}

/// Partition the distinct subjects into `k` test folds whose sizes differ by
/// at most one. Deterministic given `seed`.
pub fn subject_folds(subjects: &[String], k: usize, seed: u64) -> Result<Vec<Vec<String>>, ProtocolError> {
    let mut subjects = unique_sorted(subjects);
    if k < 2 {
        return Err(ProtocolError::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    if k > subjects.len() {
        return Err(ProtocolError::TooFewSubjects { subjects: subjects.len(), folds: k });
    }
    subjects.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::new(); k];
    for (i, s) in subjects.into_iter().enumerate() {
        folds[i % k].push(s);
    }
    for f in &mut folds {
        f.sort();
    }
    Ok(folds)
}

/// k-fold cross-validation splits: fold `i` tests on partition `i`.
pub fn kfold_splits(subjects: &[String], k: usize, seed: u64) -> Result<Vec<SubjectSplit>, ProtocolError> {
    let all = unique_sorted(subjects);
    let folds = subject_folds(&all, k, seed)?;
    Ok(folds
        .into_iter()
        .enumerate()
        .map(|(fold, test)| SubjectSplit {
            fold,
            train: all.iter().filter(|s| test.binary_search(s).is_err()).cloned().collect(),
            test,
        })
        .collect())
}

/// `runs` independent random hold-outs; run `i` shuffles with `seed + i` and
/// tests on the first `max(1, round(n * test_fraction))` subjects.
pub fn seeded_splits(
    subjects: &[String],
    runs: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<Vec<SubjectSplit>, ProtocolError> {
    let all = unique_sorted(subjects);
    if runs < 2 {
        return Err(ProtocolError::InvalidConfig(format!("need at least 2 runs, got {runs}")));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(ProtocolError::InvalidConfig(format!("test fraction must be in (0, 1), got {test_fraction}")));
    }
    if all.len() < 2 {
        return Err(ProtocolError::TooFewSubjects { subjects: all.len(), folds: 2 });
    }
    let n_test = ((all.len() as f64 * test_fraction).round() as usize).clamp(1, all.len() - 1);
    Ok((0..runs)
        .map(|run| {
            let mut order = all.clone();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(run as u64)));
            let mut test = order[..n_test].to_vec();
            let mut train = order[n_test..].to_vec();
            test.sort();
            train.sort();
            SubjectSplit { fold: run, train, test }
        })
        .collect())
}
