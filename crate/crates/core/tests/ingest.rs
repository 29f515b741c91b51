use std::sync::Arc;

use lasca::ingest::{
    apply_normalizer, fit_normalizer, read_annotations, read_frames, segment_windows, AnnotationRecord, FrameRecord,
    Modality,
};
use proptest::prelude::*;

fn stream(subject: &str, video: &str, n: usize, dt: f64, dim: usize, seed: u64) -> Vec<FrameRecord> {
    let names: Arc<[String]> = (0..dim).map(|i| format!("f{i}")).collect();
    (0..n)
        .map(|k| {
            let values = (0..dim).map(|i| ((seed as usize + k * 31 + i * 7) % 97) as f64 / 97.0).collect();
            FrameRecord::new(subject, video, k as f64 * dt, Modality::Facial, names.clone(), values)
        })
        .collect()
}

fn annotations_for(frames: &[FrameRecord]) -> Vec<AnnotationRecord> {
    frames
        .iter()
        .enumerate()
        .map(|(k, f)| AnnotationRecord {
            subject_id: f.subject_id.clone(),
            video_id: f.video_id.clone(),
            timestamp: f.timestamp,
            valence: ((k % 7) as f64 - 3.0) / 3.0,
            arousal: ((k % 5) as f64 - 2.0) / 2.0,
        })
        .collect()
}

#[test]
fn csv_round_trip_through_windows() {
    let facial = "subject_id,video_id,timestamp,Face_jawOpen,Face_cheekPuff\n\
                  S1,v1,0.0,0.2,0.4\nS1,v1,0.5,0.4,0.4\nS1,v1,1.0,0.6,0.0\nS1,v1,1.5,0.8,0.0\n";
    let ann = "subject_id,video_id,timestamp,valence,arousal\nS1,v1,0.0,0.1,0.3\nS1,v1,1.0,-0.5,0.1\n";
    let frames = read_frames(facial.as_bytes(), Modality::Facial).unwrap();
    let anns = read_annotations(ann.as_bytes()).unwrap();
    let w = segment_windows(&frames, &anns, 1.0).unwrap();
    assert_eq!(w.len(), 2);
    assert_eq!(w[0].x_raw, vec![0.30000000000000004, 0.4]);
    assert_eq!(w[1].x_raw, vec![0.7, 0.0]);
    assert_eq!((w[0].a_valence, w[1].a_valence), (0.1, -0.5));
    assert_eq!((w[1].t_start, w[1].t_end, w[1].index), (1.0, 2.0, 1));
}

#[test]
fn bad_inputs_are_rejected() {
    let header = "subject_id,video_id,timestamp,a\n";
    assert!(read_frames(format!("{header}S1,v,0,x\n").as_bytes(), Modality::Facial).is_err());
    assert!(read_frames(format!("{header}S1,v,-1,0.5\n").as_bytes(), Modality::Facial).is_err());
    assert!(read_frames("subject_id,video_id,timestamp\n".as_bytes(), Modality::Facial).is_err());
    assert!(read_frames(format!("{header}S1,v,1,0.5\nS1,v,1,0.6\n").as_bytes(), Modality::Facial).is_err());
    let ann = "subject_id,video_id,timestamp,valence,arousal\nS1,v,0,1.5,0\n";
    assert!(read_annotations(ann.as_bytes()).is_err());
}

#[test]
fn test_values_are_clamped_and_constant_dims_zeroed() {
    let frames = stream("S1", "v", 6, 1.0, 3, 1);
    let w = segment_windows(&frames, &annotations_for(&frames), 1.0).unwrap();
    let mut stats = fit_normalizer(&w).unwrap();
    stats.min[2] = 0.5;
    stats.max[2] = 0.5;
    let z = apply_normalizer(&stats, &[stats.min[0] - 1.0, stats.max[1] + 1.0, 0.9]).unwrap();
    assert_eq!(z, vec![0.0, 1.0, 0.0]);
}

proptest! {
    #[test]
    fn training_windows_normalise_into_unit_range(n in 2usize..40, dim in 1usize..6, seed in 0u64..1000, len in 1usize..4) {
        let frames = stream("S1", "v", n, 0.5, dim, seed);
        let w = segment_windows(&frames, &annotations_for(&frames), len as f64).unwrap();
        prop_assume!(!w.is_empty());
        let stats = fit_normalizer(&w).unwrap();
        for i in 0..dim {
            prop_assert!(stats.max[i] >= stats.min[i]);
        }
        let z: Vec<Vec<f64>> = w.iter().map(|w| apply_normalizer(&stats, &w.x_raw).unwrap()).collect();
        for i in 0..dim {
            let col: Vec<f64> = z.iter().map(|r| r[i]).collect();
            prop_assert!(col.iter().all(|v| (0.0..=1.0).contains(v)));
            if stats.max[i] > stats.min[i] {
                prop_assert_eq!(col.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
                prop_assert_eq!(col.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
            }
        }
    }

    #[test]
    fn windows_are_deterministic_and_disjoint(
        n1 in 1usize..30, n2 in 1usize..30, dt in prop::sample::select(vec![0.25, 0.5, 1.0, 0.04]), len in 1usize..6,
    ) {
        let mut frames = stream("S1", "a", n1, dt, 2, 3);
        frames.extend(stream("S2", "b", n2, dt, 2, 5));
        let anns = annotations_for(&frames);
        let w = segment_windows(&frames, &anns, len as f64).unwrap();
        prop_assert_eq!(&w, &segment_windows(&frames, &anns, len as f64).unwrap());

        let mut assigned = 0;
        let mut seen = std::collections::HashSet::new();
        for win in &w {
            prop_assert!((win.t_end - win.t_start - len as f64).abs() < 1e-12);
            prop_assert!(seen.insert((win.subject_id.clone(), win.index)));
            assigned += frames
                .iter()
                .filter(|f| f.subject_id == win.subject_id && f.timestamp >= win.t_start && f.timestamp < win.t_end)
                .count();
        }
        prop_assert!(assigned <= frames.len());
    }
}
