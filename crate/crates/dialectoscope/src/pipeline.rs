//! Stage orchestration over persisted artifacts.
//!
//! Every stage reads its inputs from the output directory and writes plain
//! text artifacts, each with a `<artifact>.meta.json` sidecar. The sidecar
//! records a stage key — a hash of the stage name, its parameters and the
//! checksums of its inputs — plus the checksum of the artifact itself. A
//! stage whose outputs all carry the current key and an intact checksum is
//! skipped, so reruns are cheap and any stage can resume from files written
//! by an earlier process.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use dialectoscope_core::align::{align, prepare, AlignOptions, AlignedPair};
use dialectoscope_core::corpus::{dedup_documents, CoocConfig, CoocMatrix, Corpus, Vocabulary};
use dialectoscope_core::dialectogram::{aggregate_characteristic_use, build_dialectogram, mean_offset_projection};
use dialectoscope_core::glove::{finalize_embedding, EmbeddingSet, GloveConfig};
use dialectoscope_core::measures::{measure_table, Measure, MeasureConfig, MeasureTable};
use dialectoscope_core::swapbench::{apply_swaps, evaluate, sample_swap_pairs, EvalReport, SwapConfig, SwapPlan};
use dialectoscope_core::Matrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{EcSource, PipelineConfig};
use crate::error::{AppError, Result};
use crate::formats::{self, load, AlignmentInfo, MeanOffsetReport};
use crate::io;
use crate::parallel::{count_parallel, train_parallel};
use crate::svg::render_dialectogram;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Artifact file names inside the output directory.
pub mod artifacts {
    pub const CORPUS: [&str; 2] = ["corpus1.txt", "corpus2.txt"];
    pub const VOCAB: &str = "vocab.tsv";
    pub const COOC: [&str; 2] = ["cooc1.txt", "cooc2.txt"];
    pub const EC_COOC: [&str; 2] = ["ec_cooc1.txt", "ec_cooc2.txt"];
    pub const EMBED: [&str; 2] = ["embed1.txt", "embed2.txt"];
    pub const LOSS: [&str; 2] = ["loss1.csv", "loss2.csv"];
    pub const PREPARED: [&str; 2] = ["prepared1.txt", "prepared2.txt"];
    pub const ALIGNED: [&str; 2] = ["aligned1.txt", "aligned2.txt"];
    pub const ALIGN_INFO: &str = "align.json";
    pub const MEASURES: &str = "measures.csv";
    pub const RANKINGS: &str = "rankings.csv";
    pub const DIALECTOGRAMS: &str = "dialectograms";
    pub const AGGREGATE: &str = "aggregate.csv";
    pub const MEANOFFSET: &str = "meanoffset";
    pub const SWAPBENCH: &str = "swapbench";
    pub const PLAN: &str = "plan.json";
    pub const REPORT: &str = "report.json";
    pub const REPORT_SPEARMAN: &str = "report_spearman.csv";
    pub const REPORT_TRANSLATION: &str = "report_translation.csv";
}

/// Metadata written next to every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub stage: String,
    pub config_hash: String,
    pub seed: u64,
    pub toolkit_version: String,
    /// Hash of the stage parameters and input checksums.
    pub key: String,
    /// SHA-256 of the artifact's stored bytes.
    pub sha256: String,
}

pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Last stage a stage-level command runs through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Vocab,
    Cooc,
    Train,
    Align,
    Measure,
    /// Everything, including the configured dialectograms and the aggregate.
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOutcome {
    pub stage: String,
    pub skipped: bool,
}

/// File-name form of a token: bytes outside `[A-Za-z0-9._-]` are
/// percent-encoded, so distinct tokens never share a file.
pub fn file_stem(token: &str) -> String {
    let mut out = String::new();
    for b in token.bytes() {
        if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || (b == b'.' && !out.is_empty()) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub struct Pipeline {
    pub config: PipelineConfig,
    pub threads: usize,
    pub verbose: bool,
    out: PathBuf,
    config_hash: String,
    outcomes: RefCell<Vec<StageOutcome>>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig, threads: usize) -> Self {
        Pipeline {
            out: config.output_dir(),
            config_hash: config.hash(),
            config,
            threads: threads.max(1),
            verbose: false,
            outcomes: RefCell::new(Vec::new()),
        }
    }

    pub fn output_dir(&self) -> &Path {
        &self.out
    }

    /// Stages executed or skipped so far, in order.
    pub fn outcomes(&self) -> Vec<StageOutcome> {
        self.outcomes.borrow().clone()
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn paths(&self, names: [&str; 2]) -> [PathBuf; 2] {
        names.map(|n| self.path(n))
    }

    fn stage_key(&self, stage: &str, params: &serde_json::Value, inputs: &[PathBuf]) -> Result<String> {
        let mut sums = Vec::with_capacity(inputs.len());
        for p in inputs {
            sums.push(io::file_checksum(p).ok_or_else(|| AppError::MissingInput(p.clone()))?);
        }
        let material = json!({
            "stage": stage,
            "toolkit_version": TOOLKIT_VERSION,
            "params": params,
            "inputs": sums,
        });
        Ok(io::sha256_hex(material.to_string().as_bytes()))
    }

    fn is_current(&self, key: &str, outputs: &[PathBuf]) -> bool {
        outputs.iter().all(|o| {
            let stored = if self.config.compress { io::gz_path(o) } else { o.clone() };
            let Ok(text) = fs::read_to_string(sidecar_path(o)) else {
                return false;
            };
            let Ok(meta) = serde_json::from_str::<Sidecar>(&text) else {
                return false;
            };
            meta.key == key && fs::read(&stored).is_ok_and(|b| io::sha256_hex(&b) == meta.sha256)
        })
    }

    /// Runs `produce` unless every output is current; `produce` returns one
    /// text per output, in order.
    fn run_stage(
        &self,
        stage: &str,
        params: serde_json::Value,
        inputs: &[PathBuf],
        outputs: &[PathBuf],
        produce: impl FnOnce() -> Result<Vec<String>>,
    ) -> Result<()> {
        let key = self.stage_key(stage, &params, inputs)?;
        let skipped = self.is_current(&key, outputs);
        if !skipped {
            let texts = produce()?;
            debug_assert_eq!(texts.len(), outputs.len());
            for (path, text) in outputs.iter().zip(texts) {
                let stored = io::write_text(path, &text, self.config.compress)?;
                let bytes = fs::read(&stored).map_err(|e| AppError::io(&stored, e))?;
                let meta = Sidecar {
                    stage: stage.to_string(),
                    config_hash: self.config_hash.clone(),
                    seed: self.config.seed,
                    toolkit_version: TOOLKIT_VERSION.to_string(),
                    key: key.clone(),
                    sha256: io::sha256_hex(&bytes),
                };
                io::write_text(&sidecar_path(path), &formats::to_json(&meta), false)?;
            }
        }
        if self.verbose {
            eprintln!("{stage}: {}", if skipped { "up to date" } else { "done" });
        }
        self.outcomes.borrow_mut().push(StageOutcome {
            stage: stage.to_string(),
            skipped,
        });
        Ok(())
    }

    // ------------------------------------------------------------ loaders

    pub fn load_vocab(&self) -> Result<Vocabulary> {
        load(&self.path(artifacts::VOCAB), formats::parse_vocab)
    }

    fn load_cooc(&self, path: &Path) -> Result<CoocMatrix> {
        load(path, formats::parse_cooc)
    }

    /// Reads an embedding and checks that it covers `vocab` in order.
    fn load_embedding(&self, path: &Path, vocab: &Vocabulary) -> Result<Matrix> {
        let (tokens, m) = load(path, formats::parse_embedding)?;
        if tokens != vocab.tokens() {
            return Err(AppError::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: "rows do not match the vocabulary".into(),
            });
        }
        Ok(m)
    }

    pub fn load_pair(&self, vocab: &Vocabulary) -> Result<AlignedPair> {
        let [a1, a2] = self.paths(artifacts::ALIGNED);
        let (e1, e2) = (self.load_embedding(&a1, vocab)?, self.load_embedding(&a2, vocab)?);
        Ok(AlignedPair::from_aligned(&e1, &e2, self.config.align.method)?)
    }

    /// The co-occurrence files used by the excess co-occurrence criterion.
    fn ec_paths(&self) -> [PathBuf; 2] {
        if self.separate_ec_counts() {
            self.paths(artifacts::EC_COOC)
        } else {
            self.paths(artifacts::COOC)
        }
    }

    fn separate_ec_counts(&self) -> bool {
        self.config.measures.ec_source == EcSource::Uniform && self.config.corpus.distance_weighting
    }

    /// Index of a requested token, with lexicographic neighbours on failure.
    pub fn lookup(vocab: &Vocabulary, token: &str) -> Result<usize> {
        vocab.index_of(token).ok_or_else(|| AppError::UnknownToken {
            token: token.to_string(),
            suggestions: vocab.nearest_tokens(token, 5).into_iter().map(String::from).collect(),
        })
    }

    // ------------------------------------------------------------ stages

    /// Runs every stage up to and including `through`.
    pub fn run(&self, through: Stage) -> Result<()> {
        self.config.validate(true)?;
        self.ingest()?;
        if through >= Stage::Vocab {
            self.vocab()?;
        }
        if through >= Stage::Cooc {
            self.cooc()?;
        }
        if through >= Stage::Train {
            self.train()?;
        }
        if through >= Stage::Align {
            self.align()?;
        }
        if through >= Stage::Measure {
            self.measure()?;
        }
        if through >= Stage::All {
            let focal = self.config.dialectogram.focal.clone();
            self.dialectograms(&focal)?;
            self.aggregate(self.config.dialectogram.threshold)?;
        }
        Ok(())
    }

    fn ingest(&self) -> Result<()> {
        let c = &self.config.corpus;
        let second = c.second.as_ref().ok_or_else(|| AppError::Config("corpus.second is required".into()))?;
        let sources = [self.config.resolve(&c.first), self.config.resolve(second)];
        let dedup = c.dedup;
        self.run_stage(
            "ingest",
            json!({ "dedup": dedup }),
            &sources,
            &self.paths(artifacts::CORPUS),
            || {
                let mut out = Vec::new();
                for (label, src) in [(1, &sources[0]), (2, &sources[1])] {
                    let mut corpus = formats::parse_corpus(&io::read_text(src)?, label);
                    if dedup {
                        corpus = dedup_documents(corpus);
                    }
                    out.push(formats::format_corpus(&corpus));
                }
                Ok(out)
            },
        )
    }

    fn load_corpora(&self) -> Result<[Corpus; 2]> {
        let [p1, p2] = self.paths(artifacts::CORPUS);
        Ok([
            formats::parse_corpus(&io::read_text(&p1)?, 1),
            formats::parse_corpus(&io::read_text(&p2)?, 2),
        ])
    }

    fn vocab(&self) -> Result<()> {
        let min_count = self.config.corpus.min_count;
        self.run_stage(
            "vocab",
            json!({ "min_count": min_count }),
            &self.paths(artifacts::CORPUS),
            &[self.path(artifacts::VOCAB)],
            || {
                let [c1, c2] = self.load_corpora()?;
                Ok(vec![formats::format_vocab(&Vocabulary::build(&c1, &c2, min_count)?)])
            },
        )
    }

    fn count_stage(&self, stage: &str, cfg: CoocConfig, outputs: [PathBuf; 2]) -> Result<()> {
        let mut inputs = self.paths(artifacts::CORPUS).to_vec();
        inputs.push(self.path(artifacts::VOCAB));
        self.run_stage(stage, json!(cfg), &inputs, &outputs, || {
            let vocab = self.load_vocab()?;
            let corpora = self.load_corpora()?;
            corpora
                .iter()
                .map(|c| Ok(formats::format_cooc(&count_parallel(c, &vocab, cfg, self.threads)?)))
                .collect()
        })
    }

    fn cooc(&self) -> Result<()> {
        self.count_stage("cooc", self.config.cooc(), self.paths(artifacts::COOC))?;
        if self.separate_ec_counts() {
            let uniform = CoocConfig {
                distance_weighting: false,
                ..self.config.cooc()
            };
            self.count_stage("ec_cooc", uniform, self.paths(artifacts::EC_COOC))?;
        }
        Ok(())
    }

    fn train(&self) -> Result<()> {
        for k in 0..2 {
            // The second space gets its own seed, as independently trained
            // embeddings would.
            let glove = self.config.glove(self.config.seed.wrapping_add(k as u64));
            let cooc_path = self.path(artifacts::COOC[k]);
            self.run_stage(
                &format!("train{}", k + 1),
                json!(glove),
                &[cooc_path.clone(), self.path(artifacts::VOCAB)],
                &[self.path(artifacts::EMBED[k]), self.path(artifacts::LOSS[k])],
                || {
                    let vocab = self.load_vocab()?;
                    let cooc = self.load_cooc(&cooc_path)?;
                    let (e, loss) = train_space(&cooc, &glove, self.threads)?;
                    Ok(vec![formats::format_embedding(vocab.tokens(), &e.matrix), loss])
                },
            )?;
        }
        Ok(())
    }

    fn align(&self) -> Result<()> {
        let opts = self.config.align_options();
        let mut inputs = self.paths(artifacts::EMBED).to_vec();
        inputs.push(self.path(artifacts::VOCAB));
        let [p1, p2] = self.paths(artifacts::PREPARED);
        let [a1, a2] = self.paths(artifacts::ALIGNED);
        let outputs = [p1, p2, a1, a2, self.path(artifacts::ALIGN_INFO)];
        self.run_stage("align", json!(opts), &inputs, &outputs, || {
            let vocab = self.load_vocab()?;
            let [e1, e2] = self.paths(artifacts::EMBED);
            let e1 = EmbeddingSet::new(self.load_embedding(&e1, &vocab)?);
            let e2 = EmbeddingSet::new(self.load_embedding(&e2, &vocab)?);
            let (prepared, pair, info) = align_spaces(&e1, &e2, &vocab, &opts)?;
            let t = vocab.tokens();
            Ok(vec![
                formats::format_embedding(t, &prepared[0]),
                formats::format_embedding(t, &prepared[1]),
                formats::format_embedding(t, &pair.first),
                formats::format_embedding(t, &pair.second),
                formats::to_json(&info),
            ])
        })
    }

    fn measure(&self) -> Result<()> {
        let cfg = self.config.measure();
        let absolute = self.config.measures.rank_absolute;
        let mut inputs = self.paths(artifacts::ALIGNED).to_vec();
        inputs.extend(self.paths(artifacts::PREPARED));
        inputs.extend(self.ec_paths());
        inputs.push(self.path(artifacts::VOCAB));
        let outputs = [self.path(artifacts::MEASURES), self.path(artifacts::RANKINGS)];
        let params = json!({ "measures": cfg, "rank_absolute": absolute });
        self.run_stage("measure", params, &inputs, &outputs, || {
            let vocab = self.load_vocab()?;
            let pair = self.load_pair(&vocab)?;
            let [p1, p2] = self.paths(artifacts::PREPARED);
            let (u1, u2) = (self.load_embedding(&p1, &vocab)?, self.load_embedding(&p2, &vocab)?);
            let [c1, c2] = self.ec_paths();
            let (c1, c2) = (self.load_cooc(&c1)?, self.load_cooc(&c2)?);
            let table = measure_table(&pair, (&u1, &u2), &c1, &c2, &cfg)?;
            Ok(vec![
                formats::format_measures(&vocab, &table),
                formats::format_rankings(&vocab, &table, absolute),
            ])
        })
    }

    /// Writes JSON, CSV and SVG dialectograms for each focal word and
    /// returns the SVG paths.
    pub fn dialectograms(&self, focal: &[String]) -> Result<Vec<PathBuf>> {
        if focal.is_empty() {
            return Ok(Vec::new());
        }
        let vocab = self.load_vocab()?;
        let indices = focal.iter().map(|f| Self::lookup(&vocab, f)).collect::<Result<Vec<_>>>()?;
        let d = &self.config.dialectogram;
        let (exclude_top, labels) = (d.exclude_top, d.labels);
        let mut inputs = self.paths(artifacts::ALIGNED).to_vec();
        inputs.extend(self.ec_paths());
        inputs.push(self.path(artifacts::VOCAB));
        let mut svgs = Vec::new();
        for (token, &i) in focal.iter().zip(&indices) {
            let dir = self.path(artifacts::DIALECTOGRAMS);
            let stem = file_stem(token);
            let outputs = ["json", "csv", "svg"].map(|ext| dir.join(format!("{stem}.{ext}")));
            let params = json!({ "focal": token, "exclude_top": exclude_top, "labels": labels });
            self.run_stage(&format!("dialectogram:{token}"), params, &inputs, &outputs, || {
                let pair = self.load_pair(&vocab)?;
                let [c1, c2] = self.ec_paths();
                let (c1, c2) = (self.load_cooc(&c1)?, self.load_cooc(&c2)?);
                let dg = build_dialectogram(&pair, &c1, &c2, &vocab, i, exclude_top)?;
                Ok(vec![
                    formats::to_json(&dg),
                    formats::format_dialectogram_csv(&dg),
                    render_dialectogram(&dg, labels),
                ])
            })?;
            svgs.push(outputs[2].clone());
        }
        Ok(svgs)
    }

    /// Characteristic-use ranking over the configured focal words: an
    /// explicit list, the top words of a measure ranking, or everything.
    pub fn aggregate(&self, threshold: f64) -> Result<PathBuf> {
        let d = &self.config.dialectogram;
        let focal = d.aggregate_focal.clone();
        let top = d.aggregate_top_k.map(|k| (k, d.aggregate_ranking));
        let mut inputs = self.paths(artifacts::ALIGNED).to_vec();
        inputs.push(self.path(artifacts::VOCAB));
        if top.is_some() {
            self.run(Stage::Measure)?;
            inputs.push(self.path(artifacts::MEASURES));
        }
        let output = self.path(artifacts::AGGREGATE);
        let params = json!({
            "threshold": threshold,
            "focal": focal,
            "top_k": top.map(|(k, m)| (k, m.name())),
        });
        let absolute = self.config.measures.rank_absolute;
        self.run_stage("aggregate", params, &inputs, std::slice::from_ref(&output), || {
            let vocab = self.load_vocab()?;
            let pair = self.load_pair(&vocab)?;
            let indices = if let Some((k, measure)) = top {
                let (_, table) = load(&self.path(artifacts::MEASURES), formats::parse_measures)?;
                let absolute = absolute && measure == Measure::SenseSeparation;
                table.ranking(measure, absolute).into_iter().take(k).collect()
            } else if focal.is_empty() {
                (0..vocab.len()).collect()
            } else {
                focal.iter().map(|f| Self::lookup(&vocab, f)).collect::<Result<Vec<_>>>()?
            };
            let table = aggregate_characteristic_use(&pair, &indices, threshold)?;
            Ok(vec![formats::format_aggregate(&vocab, &table)])
        })?;
        Ok(output)
    }

    /// Projects the vocabulary onto the mean offset of `words`.
    pub fn meanoffset(&self, words: &[String], name: &str) -> Result<PathBuf> {
        let vocab = self.load_vocab()?;
        let indices = words.iter().map(|w| Self::lookup(&vocab, w)).collect::<Result<Vec<_>>>()?;
        let top_k = self.config.dialectogram.meanoffset_top_k;
        let mut inputs = self.paths(artifacts::ALIGNED).to_vec();
        inputs.push(self.path(artifacts::VOCAB));
        let output = self.path(artifacts::MEANOFFSET).join(format!("{}.json", file_stem(name)));
        let params = json!({ "words": words, "top_k": top_k });
        self.run_stage("meanoffset", params, &inputs, std::slice::from_ref(&output), || {
            let pair = self.load_pair(&vocab)?;
            let m = mean_offset_projection(&pair, &indices, top_k)?;
            Ok(vec![formats::to_json(&MeanOffsetReport::new(&vocab, &m))])
        })?;
        Ok(output)
    }

    /// The swap benchmark on the first corpus; returns the report path.
    pub fn swapbench(&self) -> Result<PathBuf> {
        self.config.validate(false)?;
        let settings = SwapbenchSettings::from_config(&self.config, self.threads);
        let first = self.config.resolve(&self.config.corpus.first);
        let pos_path = self.config.swapbench.pos_map.as_ref().map(|p| self.config.resolve(p));
        let mut inputs = vec![first.clone()];
        inputs.extend(pos_path.clone());
        let dir = self.path(artifacts::SWAPBENCH);
        let outputs = [
            artifacts::PLAN,
            artifacts::MEASURES,
            artifacts::REPORT,
            artifacts::REPORT_SPEARMAN,
            artifacts::REPORT_TRANSLATION,
        ]
        .map(|n| dir.join(n));
        self.run_stage("swapbench", json!(settings), &inputs, &outputs, || {
            let corpus = formats::parse_corpus(&io::read_text(&first)?, 1);
            let pos = match &pos_path {
                Some(p) => Some(load(p, formats::parse_pos_map)?),
                None => None,
            };
            let checksum = pos_path.as_ref().and_then(|p| io::file_checksum(p));
            let mut outcome = run_swapbench(corpus, pos.as_ref(), &settings)?;
            outcome.plan.pos_map_checksum = checksum;
            Ok(vec![
                formats::to_json(&outcome.plan),
                formats::format_measures(&outcome.vocab, &outcome.table),
                formats::to_json(&outcome.report),
                formats::format_spearman_csv(&outcome.report),
                formats::format_translation_csv(&outcome.report.translation),
            ])
        })?;
        Ok(outputs[2].clone())
    }
}

// ---------------------------------------------------------------- in-memory building blocks

/// Trains one space; returns the unnormalized word + context sums and the
/// loss trace as CSV.
pub fn train_space(cooc: &CoocMatrix, glove: &GloveConfig, threads: usize) -> Result<(EmbeddingSet, String)> {
    let trained = train_parallel(cooc, glove, threads)?;
    let e = finalize_embedding(&trained.params, false)?;
    Ok((e, formats::format_loss(trained.initial_mean_loss, &trained.trace)))
}

/// Frequency adjustment, normalization and alignment. Returns the prepared
/// (unaligned) matrices, the aligned pair and its sidecar description.
pub fn align_spaces(
    e1: &EmbeddingSet,
    e2: &EmbeddingSet,
    vocab: &Vocabulary,
    opts: &AlignOptions,
) -> Result<([Matrix; 2], AlignedPair, AlignmentInfo)> {
    let prepared = prepare(e1, e2, &vocab.log_counts(1), &vocab.log_counts(2), opts)?;
    let pair = align(&prepared.first, &prepared.second, opts.method)?;
    let removed = prepared.adjustments.as_ref().map(|a| [a[0].removed_norm, a[1].removed_norm]);
    let info = AlignmentInfo::new(&pair, removed);
    Ok(([prepared.first.matrix, prepared.second.matrix], pair, info))
}

/// Everything the swap benchmark depends on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapbenchSettings {
    pub seed: u64,
    pub dedup: bool,
    pub min_count: u64,
    pub cooc: CoocConfig,
    pub glove: GloveConfig,
    pub align: AlignOptions,
    pub measures: MeasureConfig,
    pub swap: SwapConfig,
    #[serde(skip)]
    pub threads: usize,
}

impl SwapbenchSettings {
    pub fn from_config(c: &PipelineConfig, threads: usize) -> Self {
        SwapbenchSettings {
            seed: c.seed,
            dedup: c.corpus.dedup,
            min_count: c.corpus.min_count,
            cooc: c.cooc(),
            glove: c.glove(c.seed),
            align: c.align_options(),
            measures: c.measure(),
            swap: c.swap(),
            threads,
        }
    }
}

pub struct SwapbenchOutcome {
    pub plan: SwapPlan,
    pub vocab: Vocabulary,
    pub pair: AlignedPair,
    pub table: MeasureTable,
    pub report: EvalReport,
}

/// Samples a plan on `corpus`, builds the swapped copy, trains and aligns
/// both spaces and evaluates every measure against the swap degrees.
pub fn run_swapbench(
    corpus: Corpus,
    pos: Option<&BTreeMap<String, String>>,
    s: &SwapbenchSettings,
) -> Result<SwapbenchOutcome> {
    let original = if s.dedup { dedup_documents(corpus) } else { corpus };
    // Deciles and eligibility come from the corpus that gets swapped.
    let sampling_vocab = Vocabulary::build(&original, &original, s.min_count)?;
    let plan = sample_swap_pairs(&sampling_vocab, pos, &s.swap)?;
    let mut swapped = apply_swaps(&original, &plan, s.seed);
    swapped.label = 2;
    // Evaluate on the sampling vocabulary so partially swapped words stay in
    // even if chance pushes one copy's count under the floor. Unswapped words
    // have identical counts in both corpora.
    let swapped_counts = swapped.token_counts();
    let vocab = Vocabulary::from_counts(
        sampling_vocab
            .tokens()
            .iter()
            .enumerate()
            .filter_map(|(i, t)| {
                let c2 = swapped_counts.get(t.as_str()).copied().unwrap_or(0);
                (c2 > 0).then(|| (t.clone(), sampling_vocab.count1(i), c2))
            })
            .collect(),
    )?;
    drop(swapped_counts);
    let c1 = count_parallel(&original, &vocab, s.cooc, s.threads)?;
    let c2 = count_parallel(&swapped, &vocab, s.cooc, s.threads)?;
    drop((original, swapped));
    let (e1, _) = train_space(&c1, &s.glove, s.threads)?;
    let glove2 = GloveConfig {
        seed: s.glove.seed.wrapping_add(1),
        ..s.glove
    };
    let (e2, _) = train_space(&c2, &glove2, s.threads)?;
    let (prepared, pair, _) = align_spaces(&e1, &e2, &vocab, &s.align)?;
    let table = measure_table(&pair, (&prepared[0], &prepared[1]), &c1, &c2, &s.measures)?;
    let report = evaluate(&pair, &table, &plan, &vocab)?;
    Ok(SwapbenchOutcome {
        plan,
        vocab,
        pair,
        table,
        report,
    })
}
