mod common;

use std::path::Path;

use common::{lasca, planted_config, small_planted, SMALL_GRID};
use lasca::cli::{cmd_eval, cmd_run, cmd_templates, cmd_train, cmd_validate, Context, ModelBundle, Overrides};
use lasca::encoding::{EmbeddingRecord, TemplateDumpRecord};
use lasca::io::read_jsonl;
use lasca::protocol::FoldResult;

fn ctx(config: &Path) -> Context {
    Context::load(config, &Overrides::default()).unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

const TINY_FACIAL: &str = "subject_id,video_id,timestamp,Face_jawOpen,Face_mouthSmileLeft,Face_browInnerUp\n\
S1,v,0,0.9,0.1,0.1\nS1,v,1,0.9,0.1,0.1\nS1,v,2,0.1,0.9,0.1\n";
const TINY_ANNOTATIONS: &str = "subject_id,video_id,timestamp,valence,arousal\nS1,v,0,0.1,0.1\nS1,v,1,0.5,0.2\nS1,v,2,-0.3,0.4\n";

fn tiny_config(dir: &Path, facial: &str, annotations: &str) -> std::path::PathBuf {
    std::fs::write(dir.join("facial.csv"), facial).unwrap();
    std::fs::write(dir.join("annotations.csv"), annotations).unwrap();
    let toml = "[paths]\nfacial_frames = \"facial.csv\"\nannotations = \"annotations.csv\"\n\n\
                [grid]\ndimensions = [\"valence\"]\nwindows = [1.0]\ntaus = [0.1]\nmodalities = [\"visual\"]\n\
                representations = [\"fused\"]\nfolds = 2\n";
    std::fs::write(dir.join("lasca.toml"), toml).unwrap();
    dir.join("lasca.toml")
}

#[test]
fn template_dump_counts_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path(), TINY_FACIAL, TINY_ANNOTATIONS);
    let out = dir.path().join("templates.jsonl");
    let records = cmd_templates(&ctx(&cfg), &out, false).unwrap();
    let counts: Vec<usize> = records.iter().map(|r| r.count).collect();
    assert_eq!(counts, [2, 1]);
    assert_eq!(records[0].text, "facial: jaw drop shock surprise <|endoftext|>");
    let back: Vec<TemplateDumpRecord> = read_jsonl(&out).unwrap();
    assert_eq!(back, records);
}

#[test]
fn empty_dataset_gives_empty_dump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(
        dir.path(),
        "subject_id,video_id,timestamp,Face_jawOpen\n",
        "subject_id,video_id,timestamp,valence,arousal\n",
    );
    let out = dir.path().join("templates.jsonl");
    assert_eq!(lasca(&cfg, &["templates", "--out", out.to_str().unwrap()]), 0);
    assert_eq!(read(&out), "");
}

#[test]
fn validate_reports_data_problems_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = planted_config(dir.path(), &small_planted(), SMALL_GRID, "");
    assert_eq!(lasca(&cfg, &["validate"]), 0);

    std::fs::remove_file(dir.path().join("annotations.csv")).unwrap();
    assert_eq!(lasca(&cfg, &["validate"]), 1);
    assert_eq!(lasca(&cfg, &["run"]), 1);
}

#[test]
fn too_many_folds_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let grid = SMALL_GRID.replace("folds = 3", "folds = 7");
    let cfg = planted_config(dir.path(), &small_planted(), &grid, "");
    let report = cmd_validate(&ctx(&cfg)).unwrap();
    assert!(!report.ok());
    assert!(report.errors[0].contains("6 subjects cannot fill 7 folds"), "{:?}", report.errors);
}

#[test]
fn uncovered_audio_features_only_warn() {
    let dir = tempfile::tempdir().unwrap();
    let grid = SMALL_GRID.replace("[\"visual\"]", "[\"audio\"]");
    let cfg = planted_config(dir.path(), &small_planted(), &grid, "");
    let report = cmd_validate(&ctx(&cfg)).unwrap();
    assert!(report.ok(), "{:?}", report.errors);
    let joined = report.warnings.join("\n");
    assert!(joined.contains("mfcc_13") && joined.contains("mfcc_14"), "{joined}");
    assert_eq!(lasca(&cfg, &["validate"]), 0);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = planted_config(dir.path(), &small_planted(), SMALL_GRID, "");
    assert_eq!(lasca(&cfg, &["pairs", "--cell", "99", "--out", "x.jsonl"]), 2);
    assert_eq!(lasca(&cfg, &["train", "--cell", "0", "--fold", "3", "--out", "x.json"]), 2);
    assert_eq!(lasca(&cfg, &["run", "--jobs", "0"]), 2);
    std::fs::write(&cfg, "[paths]\nannotations = \"a.csv\"\nbogus = 1\n").unwrap();
    assert_eq!(lasca(&cfg, &["validate"]), 2);
}

#[test]
fn precomputed_store_must_cover_every_template() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = planted_config(dir.path(), &small_planted(), SMALL_GRID, "");
    let text = read(&cfg)
        .replace("backend = \"hashing\"", "backend = \"precomputed\"\nname = \"hashing-32\"")
        .replace("output_dir = \"runs\"", "output_dir = \"runs\"\nembedding_store = \"store.jsonl\"");
    std::fs::write(&cfg, text).unwrap();

    // no store file at all
    assert_eq!(lasca(&cfg, &["validate"]), 1);
    assert_eq!(lasca(&cfg, &["run"]), 1);

    // a store holding one template only
    let one = EmbeddingRecord { text: "facial: no salient cues <|endoftext|>".into(), model: "hashing-32".into(), dim: 32, vector: vec![0.0; 32] };
    lasca::io::write_jsonl(&dir.path().join("store.jsonl"), &[one]).unwrap();
    let report = cmd_validate(&ctx(&cfg)).unwrap();
    assert!(report.errors.iter().any(|e| e.contains("lacks")), "{:?}", report.errors);
}

#[test]
fn encoded_store_reproduces_the_hashing_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = planted_config(dir.path(), &small_planted(), SMALL_GRID, "");
    let store = dir.path().join("store.jsonl");
    assert_eq!(lasca(&cfg, &["encode", "--out", store.to_str().unwrap()]), 0);
    assert_eq!(lasca(&cfg, &["run"]), 0);
    let hashing_report = read(&dir.path().join("runs/report.csv"));

    let text = read(&cfg)
        .replace("backend = \"hashing\"", "backend = \"precomputed\"\nname = \"hashing-32\"")
        .replace("output_dir = \"runs\"", "output_dir = \"runs-pre\"\nembedding_store = \"store.jsonl\"");
    std::fs::write(&cfg, text).unwrap();
    assert_eq!(lasca(&cfg, &["validate"]), 0);
    assert_eq!(lasca(&cfg, &["run"]), 0);
    assert_eq!(read(&dir.path().join("runs-pre/report.csv")), hashing_report);
}

#[test]
fn rerun_reuses_cells_and_force_reproduces_them() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = planted_config(dir.path(), &small_planted(), SMALL_GRID, "");
    let c = ctx(&cfg);
    let first = cmd_run(&c).unwrap();
    assert_eq!((first.cells, first.computed, first.reused), (4, 4, 0));
    let report = read(&dir.path().join("runs/report.md"));
    assert_eq!(report.matches("| Features |").count(), 1);

    let second = cmd_run(&c).unwrap();
    assert_eq!((second.computed, second.reused), (0, 4));
    assert_eq!(read(&dir.path().join("runs/report.md")), report);

    let forced = Context::load(&cfg, &Overrides { force: true, ..Default::default() }).unwrap();
    let third = cmd_run(&forced).unwrap();
    assert_eq!((third.computed, third.reused), (4, 0));
    assert_eq!(read(&dir.path().join("runs/report.md")), report);

    assert_eq!(lasca(&cfg, &["report"]), 0);
    assert_eq!(read(&dir.path().join("runs/report.md")), report);
}

#[test]
fn changed_inputs_invalidate_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = planted_config(dir.path(), &small_planted(), SMALL_GRID, "");
    assert_eq!(cmd_run(&ctx(&cfg)).unwrap().computed, 4);
    let ann = dir.path().join("annotations.csv");
    let text = read(&ann).replacen("0.4", "0.41", 1);
    std::fs::write(&ann, text).unwrap();
    assert_eq!(cmd_run(&ctx(&cfg)).unwrap().computed, 4);
}

#[test]
fn run_dir_override_moves_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = planted_config(dir.path(), &small_planted(), SMALL_GRID, "");
    let elsewhere = dir.path().join("elsewhere");
    let c = Context::load(&cfg, &Overrides { run_dir: Some(elsewhere.clone()), ..Default::default() }).unwrap();
    cmd_run(&c).unwrap();
    assert!(elsewhere.join("report.md").exists());
    assert!(!dir.path().join("runs").exists());
}

#[test]
fn train_then_eval_matches_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = planted_config(dir.path(), &small_planted(), SMALL_GRID, "");
    let c = ctx(&cfg);
    cmd_run(&c).unwrap();

    let model = dir.path().join("model.json");
    // cell 1 is the fused cell at tau 0.1
    let bundle = cmd_train(&c, 1, 2, &model).unwrap();
    assert_eq!(ModelBundle::load(&model).unwrap(), bundle);
    let eval = cmd_eval(&c, &model).unwrap();

    let digest = lasca::cli::cell_digest(&bundle.config, &bundle.data_fingerprint);
    let folds: Vec<FoldResult> = read_jsonl(&dir.path().join("runs/cells").join(digest).join("folds.jsonl")).unwrap();
    let fold = &folds[2];
    assert_eq!(fold.test_subjects, eval.test_subjects);
    assert_eq!(fold.test_pairs, eval.test_pairs);
    assert_eq!(fold.accuracy, Some(eval.accuracy));
    assert_eq!(fold.epochs_run, bundle.head.meta.epochs_run);
}

#[test]
fn pair_dump_lists_both_orders() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = planted_config(dir.path(), &small_planted(), SMALL_GRID, "");
    let out = dir.path().join("pairs.jsonl");
    assert_eq!(lasca(&cfg, &["pairs", "--cell", "0", "--out", out.to_str().unwrap()]), 0);
    let rows: Vec<serde_json::Value> = read_jsonl(&out).unwrap();
    assert!(!rows.is_empty() && rows.len().is_multiple_of(2));
    for w in rows.chunks(2) {
        assert_eq!(w[0]["first"], w[1]["second"]);
        assert_eq!(w[0]["label"].as_u64().unwrap() + w[1]["label"].as_u64().unwrap(), 1);
    }
}

#[cfg(unix)]
#[test]
fn external_exporter_is_driven_through_files() {
    use std::os::unix::fs::PermissionsExt;

    let dir = tempfile::tempdir().unwrap();
    let cfg = planted_config(dir.path(), &small_planted(), SMALL_GRID, "");
    let store = dir.path().join("store.jsonl");
    assert_eq!(lasca(&cfg, &["encode", "--out", store.to_str().unwrap()]), 0);

    // a stand-in exporter: checks its arguments and serves the prepared store
    let script = dir.path().join("exporter.sh");
    let body = format!(
        "#!/bin/sh\n[ \"$1\" = export ] || exit 3\n[ \"$3\" = snapshot-1 ] || exit 4\n[ -s \"$5\" ] || exit 5\ncp {} \"$7\"\n",
        store.display()
    );
    std::fs::write(&script, body).unwrap();
    std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();

    let text = read(&cfg)
        .replace(
            "backend = \"hashing\"",
            &format!("backend = \"external\"\nname = \"hashing-32\"\ncommand = \"{}\"\nmodel = \"snapshot-1\"", script.display()),
        )
        .replace("output_dir = \"runs\"", "output_dir = \"runs-ext\"");
    std::fs::write(&cfg, text).unwrap();
    assert_eq!(lasca(&cfg, &["run"]), 0);
    assert!(dir.path().join("runs-ext/report.md").exists());
}
