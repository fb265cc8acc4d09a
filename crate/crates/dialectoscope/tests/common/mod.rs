#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dialectoscope::formats::format_corpus;
use dialectoscope::synth::{generate, SynthConfig};
use dialectoscope_core::corpus::Vocabulary;
use dialectoscope_core::swapbench::{apply_swaps, SwapPair, SwapPlan};

/// Two small related corpora: the second is the first with a few words
/// exchanged, so most words mean the same thing in both.
pub fn write_fixture(dir: &Path) {
    let corpus = generate(&SynthConfig {
        vocab_size: 120,
        tokens: 40_000,
        seed: 11,
        ..SynthConfig::default()
    })
    .unwrap();
    let mut plan = SwapPlan::empty(3);
    for (a, b, degree) in [("ban", "ben", 1.0), ("kan", "kin", 0.7), ("lan", "len", 0.3)] {
        plan.pairs.push(SwapPair {
            a: a.into(),
            b: b.into(),
            degree,
            decile: 0,
        });
    }
    let swapped = apply_swaps(&corpus, &plan, 3);
    fs::write(dir.join("first.txt"), format_corpus(&corpus)).unwrap();
    fs::write(dir.join("second.txt"), format_corpus(&swapped)).unwrap();
    fs::write(dir.join("dialectoscope.toml"), CONFIG).unwrap();
}

pub const CONFIG: &str = r#"seed = 5
output_dir = "out"

[corpus]
first = "first.txt"
second = "second.txt"
min_count = 20

[glove]
dim = 10
epochs = 8

[measures]
k = 10

[dialectogram]
focal = ["ban", "kan"]
aggregate_focal = ["ban", "kan", "lan", "bin"]

[swapbench]
pairs_per_decile = 2
"#;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dialectoscope"))
}

/// Runs the binary in `dir` with `--quiet` and the given arguments.
pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).arg("--quiet").args(args).output().unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Relative path → contents for every file below `root`.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Parses every text artifact below `out` and re-formats it, returning the
/// relative paths whose bytes do not survive the round trip. Artifacts of
/// derived tables are rebuilt from their parsed sources.
pub fn roundtrip_failures(out: &Path) -> Vec<String> {
    use dialectoscope::formats::{self as f, AlignmentInfo, MeanOffsetReport};
    use dialectoscope::pipeline::Sidecar;
    use dialectoscope_core::dialectogram::{AggregateScore, AggregateTable, Dialectogram};
    use dialectoscope_core::swapbench::EvalReport;

    let vocab = f::parse_vocab(&fs::read_to_string(out.join("vocab.tsv")).unwrap()).unwrap();
    let mut failures = Vec::new();
    let mut checked = 0;
    for (rel, bytes) in tree(out) {
        let text = String::from_utf8(bytes).unwrap();
        let name = rel.to_string_lossy().into_owned();
        let file = rel.file_name().unwrap().to_string_lossy().into_owned();
        let again: Option<String> = if file.ends_with(".meta.json") {
            Some(f::to_json(&f::from_json::<Sidecar>(&text).unwrap()))
        } else if file.ends_with(".svg") {
            None
        } else if file.starts_with("corpus") {
            let label = if file.contains('2') { 2 } else { 1 };
            Some(f::format_corpus(&f::parse_corpus(&text, label)))
        } else if file == "vocab.tsv" {
            Some(f::format_vocab(&vocab))
        } else if file.starts_with("cooc") || file.starts_with("ec_cooc") {
            Some(f::format_cooc(&f::parse_cooc(&text).unwrap()))
        } else if file.starts_with("embed") || file.starts_with("prepared") || file.starts_with("aligned") {
            let (tokens, m) = f::parse_embedding(&text).unwrap();
            Some(f::format_embedding(&tokens, &m))
        } else if file.starts_with("loss") {
            let (initial, trace) = f::parse_loss(&text).unwrap();
            Some(f::format_loss(initial, &trace))
        } else if file == "align.json" {
            Some(f::to_json(&f::from_json::<AlignmentInfo>(&text).unwrap()))
        } else if file == "measures.csv" {
            let (tokens, table) = f::parse_measures(&text).unwrap();
            let v = if rel.starts_with("swapbench") {
                // The benchmark has its own vocabulary; rebuild it from the
                // frequency columns.
                let entries = text
                    .lines()
                    .filter(|l| !l.starts_with('#'))
                    .skip(1)
                    .map(|l| {
                        let c: Vec<&str> = l.split(',').collect();
                        (c[0].to_string(), c[1].parse().unwrap(), c[2].parse().unwrap())
                    })
                    .collect();
                Vocabulary::from_counts(entries).unwrap()
            } else {
                vocab.clone()
            };
            assert_eq!(tokens, v.tokens());
            Some(f::format_measures(&v, &table))
        } else if file == "rankings.csv" {
            let (_, table) = f::parse_measures(&fs::read_to_string(out.join("measures.csv")).unwrap()).unwrap();
            let absolute = text.contains("sense_separation_order=absolute");
            let rows = f::parse_rankings(&text).unwrap();
            assert!(rows.iter().all(|r| r.rank >= 1 && r.value.is_finite()));
            Some(f::format_rankings(&vocab, &table, absolute))
        } else if file == "aggregate.csv" {
            let (threshold, rows) = f::parse_aggregate(&text).unwrap();
            let meta = |key: &str| -> usize {
                let prefix = format!("# {key}=");
                text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap().parse().unwrap()
            };
            let table = AggregateTable {
                threshold,
                focal_words: vec![0; meta("focal_words")],
                skipped: vec![0; meta("skipped_focal_words")],
                scores: rows
                    .iter()
                    .map(|r| AggregateScore {
                        word: vocab.index_of(&r.token).unwrap(),
                        count_pos: r.count_pos,
                        count_neg: r.count_neg,
                    })
                    .collect(),
            };
            Some(f::format_aggregate(&vocab, &table))
        } else if rel.starts_with("dialectograms") && file.ends_with(".json") {
            Some(f::to_json(&f::from_json::<Dialectogram>(&text).unwrap()))
        } else if rel.starts_with("dialectograms") && file.ends_with(".csv") {
            let d = f::parse_dialectogram_csv(&text).unwrap();
            let json = fs::read_to_string(out.join(rel.with_extension("json"))).unwrap();
            assert_eq!(d, f::from_json::<Dialectogram>(&json).unwrap(), "{name}");
            Some(f::format_dialectogram_csv(&d))
        } else if rel.starts_with("meanoffset") {
            Some(f::to_json(&f::from_json::<MeanOffsetReport>(&text).unwrap()))
        } else if file == "plan.json" {
            Some(f::to_json(&f::from_json::<SwapPlan>(&text).unwrap()))
        } else if file.starts_with("report") {
            let report: EvalReport =
                f::from_json(&fs::read_to_string(out.join("swapbench/report.json")).unwrap()).unwrap();
            Some(match file.as_str() {
                "report.json" => f::to_json(&report),
                "report_spearman.csv" => f::format_spearman_csv(&report),
                "report_translation.csv" => f::format_translation_csv(&report.translation),
                other => panic!("unexpected report file {other}"),
            })
        } else {
            panic!("no round trip for {name}");
        };
        if let Some(again) = again {
            checked += 1;
            if again != text {
                failures.push(name);
            }
        }
    }
    assert!(checked > 20, "only {checked} artifacts checked");
    failures
}
