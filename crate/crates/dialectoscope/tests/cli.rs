mod common;

use std::fs;

use common::{run_in, stderr, tree, write_fixture};
use dialectoscope::config::PipelineConfig;
use dialectoscope::formats::{self, load};
use dialectoscope::pipeline::{sidecar_path, Pipeline, Sidecar, Stage};
use dialectoscope_core::dialectogram::Dialectogram;
use dialectoscope_core::swapbench::{EvalReport, SwapPlan};

const DECLARED: [&str; 19] = [
    "corpus1.txt",
    "corpus2.txt",
    "vocab.tsv",
    "cooc1.txt",
    "cooc2.txt",
    "embed1.txt",
    "embed2.txt",
    "loss1.csv",
    "loss2.csv",
    "prepared1.txt",
    "prepared2.txt",
    "aligned1.txt",
    "aligned2.txt",
    "align.json",
    "measures.csv",
    "rankings.csv",
    "aggregate.csv",
    "dialectograms/ban.svg",
    "dialectograms/kan.json",
];

fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path());
    dir
}

#[test]
fn run_writes_every_artifact_with_a_sidecar() {
    let dir = fixture();
    let o = run_in(dir.path(), &["run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    for name in DECLARED {
        let p = out.join(name);
        assert!(p.exists(), "missing {name}");
        let meta: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(&p)).unwrap()).unwrap();
        assert_eq!(meta.seed, 5);
        assert_eq!(meta.toolkit_version, env!("CARGO_PKG_VERSION"));
        assert_eq!(meta.sha256, dialectoscope::io::sha256_hex(&fs::read(&p).unwrap()));
    }
}

#[test]
fn missing_corpus_is_a_config_error_naming_the_path() {
    let dir = fixture();
    fs::remove_file(dir.path().join("second.txt")).unwrap();
    let o = run_in(dir.path(), &["run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("second.txt"), "{}", stderr(&o));
}

#[test]
fn config_typos_and_missing_config_exit_2() {
    let dir = fixture();
    let cfg = dir.path().join("dialectoscope.toml");
    let text = fs::read_to_string(&cfg).unwrap().replace("epochs = 8", "epoch = 8");
    fs::write(&cfg, text).unwrap();
    let o = run_in(dir.path(), &["vocab"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epoch"));
    let o = run_in(dir.path(), &["--config", "nowhere.toml", "vocab"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run_in(dir.path(), &["no-such-command"]).status.code(), Some(2));
}

#[test]
fn rerun_skips_every_stage_and_leaves_bytes_unchanged() {
    let dir = fixture();
    let cfg = PipelineConfig::load(&dir.path().join("dialectoscope.toml")).unwrap();
    Pipeline::new(cfg.clone(), 1).run(Stage::All).unwrap();
    let before = tree(&dir.path().join("out"));
    let again = Pipeline::new(cfg, 1);
    again.run(Stage::All).unwrap();
    let outcomes = again.outcomes();
    assert!(!outcomes.is_empty());
    assert!(outcomes.iter().all(|o| o.skipped), "{outcomes:?}");
    assert_eq!(tree(&dir.path().join("out")), before);
}

#[test]
fn parameter_change_reruns_only_downstream_stages() {
    let dir = fixture();
    let path = dir.path().join("dialectoscope.toml");
    let mut cfg = PipelineConfig::load(&path).unwrap();
    Pipeline::new(cfg.clone(), 1).run(Stage::Measure).unwrap();
    cfg.glove.epochs = 9;
    let p = Pipeline::new(cfg, 1);
    p.run(Stage::Measure).unwrap();
    let ran: Vec<String> = p.outcomes().into_iter().filter(|o| !o.skipped).map(|o| o.stage).collect();
    assert_eq!(ran, ["train1", "train2", "align", "measure"]);
}

#[test]
fn tampered_artifacts_are_regenerated() {
    let dir = fixture();
    let cfg = PipelineConfig::load(&dir.path().join("dialectoscope.toml")).unwrap();
    Pipeline::new(cfg.clone(), 1).run(Stage::Align).unwrap();
    let embed = dir.path().join("out/embed1.txt");
    let original = fs::read(&embed).unwrap();
    fs::write(&embed, b"tampered 1\n").unwrap();
    let p = Pipeline::new(cfg, 1);
    p.run(Stage::Align).unwrap();
    assert_eq!(fs::read(&embed).unwrap(), original);
    let rerun: Vec<_> = p.outcomes().into_iter().filter(|o| !o.skipped).map(|o| o.stage).collect();
    assert_eq!(rerun, ["train1"]);
}

#[test]
fn independent_runs_produce_identical_trees() {
    let a = fixture();
    let b = fixture();
    for d in [&a, &b] {
        let o = run_in(d.path(), &["run"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (ta, tb) = (tree(&a.path().join("out")), tree(&b.path().join("out")));
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (k, v) in &ta {
        assert!(tb[k] == *v, "{} differs", k.display());
    }
}

#[test]
fn stage_commands_resume_from_persisted_files() {
    let dir = fixture();
    assert!(run_in(dir.path(), &["vocab"]).status.success());
    assert!(dir.path().join("out/vocab.tsv").exists());
    assert!(!dir.path().join("out/cooc1.txt").exists());
    assert!(run_in(dir.path(), &["cooc"]).status.success());
    assert!(run_in(dir.path(), &["train"]).status.success());
    assert!(run_in(dir.path(), &["align"]).status.success());
    assert!(run_in(dir.path(), &["measure"]).status.success());
    let staged = tree(&dir.path().join("out"));
    let fresh = fixture();
    assert!(run_in(fresh.path(), &["measure"]).status.success());
    assert_eq!(tree(&fresh.path().join("out")), staged);
}

#[test]
fn dialectogram_command_writes_json_and_svg() {
    let dir = fixture();
    let o = run_in(dir.path(), &["dialectogram", "lan"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.trim_end().ends_with("lan.svg"));
    let base = dir.path().join("out/dialectograms");
    let d: Dialectogram = load(&base.join("lan.json"), formats::from_json).unwrap();
    assert_eq!(d.focal, "lan");
    assert!(!d.records.is_empty());
    assert_eq!(load(&base.join("lan.csv"), formats::parse_dialectogram_csv).unwrap(), d);
    let svg = fs::read_to_string(base.join("lan.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn unknown_focal_word_exits_3_with_suggestions() {
    let dir = fixture();
    let o = run_in(dir.path(), &["dialectogram", "bam"]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("unknown token `bam`"), "{err}");
    assert!(err.contains("ban"), "{err}");
}

#[test]
fn aggregate_threshold_writes_a_ranking() {
    let dir = fixture();
    let o = run_in(dir.path(), &["aggregate", "--threshold", "0.05"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (t, rows) = load(&dir.path().join("out/aggregate.csv"), formats::parse_aggregate).unwrap();
    assert_eq!(t, 0.05);
    assert!(rows.windows(2).all(|w| w[0].score >= w[1].score));
    assert!(rows.iter().all(|r| r.count_pos + r.count_neg <= 4));
    assert!(rows.iter().any(|r| r.score != 0));
}

#[test]
fn aggregate_can_use_the_top_of_a_measure_ranking() {
    let dir = fixture();
    let cfg = dir.path().join("dialectoscope.toml");
    let text = fs::read_to_string(&cfg)
        .unwrap()
        .replace("aggregate_focal = [\"ban\", \"kan\", \"lan\", \"bin\"]", "aggregate_top_k = 5");
    fs::write(&cfg, &text).unwrap();
    let o = run_in(dir.path(), &["aggregate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = load(&dir.path().join("out/aggregate.csv"), formats::parse_aggregate).unwrap();
    assert!(rows.iter().all(|r| r.count_pos + r.count_neg <= 5));
    let agg = fs::read_to_string(dir.path().join("out/aggregate.csv")).unwrap();
    assert!(agg.contains("# focal_words=5"), "{agg}");

    fs::write(&cfg, text.replace("aggregate_top_k = 5", "aggregate_top_k = 5\naggregate_focal = [\"ban\"]")).unwrap();
    assert_eq!(run_in(dir.path(), &["aggregate"]).status.code(), Some(2));
}

#[test]
fn meanoffset_reports_the_word_set() {
    let dir = fixture();
    let o = run_in(dir.path(), &["meanoffset", "ban", "kan", "lan", "--name", "swapped"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/meanoffset/swapped.json")).unwrap()).unwrap();
    assert_eq!(v["members"].as_array().unwrap().len(), 3);
}

#[test]
fn swapbench_writes_plan_and_report() {
    let dir = fixture();
    let o = run_in(dir.path(), &["swapbench", "--pairs-per-decile", "2", "--deciles", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8(o.stdout).unwrap().contains("cosine_distance"));
    let base = dir.path().join("out/swapbench");
    let plan: SwapPlan = load(&base.join("plan.json"), formats::from_json).unwrap();
    assert_eq!(plan.pairs.len(), 10);
    assert_eq!(plan.deciles, 5);
    assert!(!plan.pos_matched);
    let report: EvalReport = load(&base.join("report.json"), formats::from_json).unwrap();
    assert_eq!(report.measures.len(), 5);
    assert_eq!(formats::to_json(&plan), fs::read_to_string(base.join("plan.json")).unwrap());
}

#[test]
fn compressed_artifacts_are_gzipped_and_stable() {
    let dir = fixture();
    let o = run_in(dir.path(), &["--compress", "measure"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    let gz = fs::read(out.join("vocab.tsv.gz")).unwrap();
    assert_eq!(&gz[..2], &[0x1f, 0x8b]);
    assert!(!out.join("vocab.tsv").exists());
    let before = tree(&out);
    assert!(run_in(dir.path(), &["--compress", "measure"]).status.success());
    assert_eq!(tree(&out), before);
    // Switching back rewrites plain files and drops the gzipped ones.
    assert!(run_in(dir.path(), &["measure"]).status.success());
    assert!(out.join("vocab.tsv").exists() && !out.join("vocab.tsv.gz").exists());
}

#[test]
fn synth_command_writes_a_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["synth", "--output", "c.txt", "--tokens", "1000", "--vocab-size", "30", "--seed", "4"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("c.txt")).unwrap();
    assert!(text.split_whitespace().count() >= 1000);
}
