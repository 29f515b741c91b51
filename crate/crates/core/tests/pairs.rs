use lasca::ingest::FeatureWindow;
use lasca::preference::{build_pairs, AffectDimension, PairConfig};
use proptest::prelude::*;

fn window(subject: &str, video: &str, index: usize, len: f64, valence: f64) -> FeatureWindow {
    FeatureWindow {
        subject_id: subject.into(),
        video_id: video.into(),
        index,
        t_start: index as f64 * len,
        t_end: (index + 1) as f64 * len,
        x_raw: vec![index as f64],
        a_valence: valence,
        a_arousal: 0.0,
    }
}

/// Mean-pool a per-second trace into windows of `len` seconds.
fn windows_from_trace(streams: &[Vec<f64>], len: usize) -> Vec<FeatureWindow> {
    let mut out = Vec::new();
    for (s, trace) in streams.iter().enumerate() {
        for (k, chunk) in trace.chunks_exact(len).enumerate() {
            let v = chunk.iter().sum::<f64>() / len as f64;
            out.push(window(&format!("S{s}"), "v", k, len as f64, v));
        }
    }
    out
}

fn reps(w: &[FeatureWindow]) -> Vec<Vec<f64>> {
    w.iter().map(|w| w.x_raw.clone()).collect()
}

#[test]
fn no_pair_crosses_streams_or_gaps() {
    let w = vec![
        window("S1", "a", 0, 1.0, 0.1),
        window("S1", "a", 1, 1.0, 0.9),
        // gap: index 3 does not follow 1
        window("S1", "a", 3, 1.0, -0.9),
        window("S1", "b", 4, 1.0, 0.5),
        window("S2", "b", 5, 1.0, -0.5),
    ];
    let pairs = build_pairs(&w, &reps(&w), &PairConfig::new(0.1, AffectDimension::Valence)).unwrap();
    let idx: Vec<(usize, usize, u8)> = pairs.iter().map(|p| (p.first, p.second, p.label)).collect();
    assert_eq!(idx, [(0, 1, 1), (1, 0, 0)]);
    assert_eq!(pairs[0].delta_z, vec![1.0]);
    assert_eq!(pairs[1].delta_z, vec![-1.0]);
}

proptest! {
    #[test]
    fn pair_counts_shrink_with_tau_and_window_length(
        streams in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 0..60), 1..4),
    ) {
        let mut counts = Vec::new();
        let w = windows_from_trace(&streams, 1);
        for tau in [0.05, 0.1, 0.2, 0.4] {
            counts.push(build_pairs(&w, &reps(&w), &PairConfig::new(tau, AffectDimension::Valence)).unwrap().len());
        }
        prop_assert!(counts.windows(2).all(|c| c[0] >= c[1]), "{:?}", counts);

        // fewer windows means fewer candidate transitions
        let candidates = |len: usize| {
            let w = windows_from_trace(&streams, len);
            build_pairs(&w, &reps(&w), &PairConfig::new(1e-12, AffectDimension::Valence)).unwrap().len()
        };
        prop_assert!(candidates(3) >= candidates(5));
    }

    #[test]
    fn pairs_stay_inside_one_stream(streams in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 0..20), 1..5)) {
        let w = windows_from_trace(&streams, 1);
        for p in build_pairs(&w, &reps(&w), &PairConfig::new(0.1, AffectDimension::Valence)).unwrap() {
            prop_assert_eq!(&w[p.first].subject_id, &w[p.second].subject_id);
            prop_assert_eq!(w[p.first].index.abs_diff(w[p.second].index), 1);
        }
    }
}
