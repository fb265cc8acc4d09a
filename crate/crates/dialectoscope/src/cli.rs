//! Command line interface.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use dialectoscope_core::swapbench::EvalReport;

use crate::config::PipelineConfig;
use crate::error::{AppError, Result, EXIT_CONFIG, EXIT_OK};
use crate::formats::{self, load};
use crate::io;
use crate::pipeline::{Pipeline, Stage};
use crate::synth::{self, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "dialectoscope", version, about = "Compare how two corpora use the same words")]
pub struct Cli {
    /// Pipeline configuration file.
    #[arg(long, global = true, default_value = "dialectoscope.toml")]
    pub config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 guarantees bit-identical output.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Gzip all text artifacts.
    #[arg(long, global = true)]
    pub compress: bool,
    /// Suppress per-stage progress on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every stage, including configured dialectograms and the aggregate.
    Run,
    /// Ingest both corpora and build the shared vocabulary.
    Vocab,
    /// Count windowed co-occurrences.
    Cooc,
    /// Train both embedding spaces.
    Train,
    /// Remove the frequency direction, normalize and align.
    Align,
    /// Compute every difference measure per word.
    Measure,
    /// Dialectograms (JSON, CSV, SVG) for the given focal words.
    Dialectogram {
        #[arg(required = true)]
        focal: Vec<String>,
    },
    /// Project the vocabulary onto the mean offset of a word set.
    Meanoffset {
        #[arg(required = true, num_args = 2..)]
        words: Vec<String>,
        /// Output name under meanoffset/.
        #[arg(long, default_value = "meanoffset")]
        name: String,
    },
    /// Rank words by how often their mean projection exceeds ±threshold.
    Aggregate {
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Swap benchmark on the first corpus.
    Swapbench {
        #[arg(long)]
        pairs_per_decile: Option<usize>,
        #[arg(long)]
        deciles: Option<usize>,
    },
    /// Write a synthetic corpus (no config needed).
    Synth {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = SynthConfig::default().tokens)]
        tokens: usize,
        #[arg(long, default_value_t = SynthConfig::default().vocab_size)]
        vocab_size: usize,
    },
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Loads the config, applies command line overrides and builds the pipeline.
fn pipeline(cli: &Cli, overrides: impl FnOnce(&mut PipelineConfig)) -> Result<Pipeline> {
    let mut config = PipelineConfig::load(&cli.config)?;
    overrides(&mut config);
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.compress |= cli.compress;
    if cli.threads == 0 {
        return Err(AppError::Config("--threads must be at least 1".into()));
    }
    let mut p = Pipeline::new(config, cli.threads);
    p.verbose = !cli.quiet;
    Ok(p)
}

pub fn execute(cli: &Cli) -> Result<()> {
    let stage = |s| -> Result<()> { pipeline(cli, |_| {})?.run(s) };
    match &cli.command {
        Command::Run => stage(Stage::All),
        Command::Vocab => stage(Stage::Vocab),
        Command::Cooc => stage(Stage::Cooc),
        Command::Train => stage(Stage::Train),
        Command::Align => stage(Stage::Align),
        Command::Measure => stage(Stage::Measure),
        Command::Dialectogram { focal } => {
            let p = pipeline(cli, |_| {})?;
            p.run(Stage::Align)?;
            for path in p.dialectograms(focal)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Meanoffset { words, name } => {
            let p = pipeline(cli, |_| {})?;
            p.run(Stage::Align)?;
            println!("{}", p.meanoffset(words, name)?.display());
            Ok(())
        }
        Command::Aggregate { threshold } => {
            let p = pipeline(cli, |c| {
                if let Some(t) = threshold {
                    c.dialectogram.threshold = *t;
                }
            })?;
            p.run(Stage::Align)?;
            println!("{}", p.aggregate(p.config.dialectogram.threshold)?.display());
            Ok(())
        }
        Command::Swapbench {
            pairs_per_decile,
            deciles,
        } => {
            let p = pipeline(cli, |c| {
                if let Some(n) = pairs_per_decile {
                    c.swapbench.pairs_per_decile = *n;
                }
                if let Some(d) = deciles {
                    c.swapbench.deciles = *d;
                }
            })?;
            let report_path = p.swapbench()?;
            let report: EvalReport = load(&report_path, formats::from_json)?;
            print_report(&report);
            Ok(())
        }
        Command::Synth {
            output,
            tokens,
            vocab_size,
        } => {
            let cfg = SynthConfig {
                tokens: *tokens,
                vocab_size: *vocab_size,
                seed: cli.seed.unwrap_or(SynthConfig::default().seed),
                ..SynthConfig::default()
            };
            let corpus = synth::generate(&cfg)?;
            let written = io::write_text(output, &formats::format_corpus(&corpus), cli.compress)?;
            println!("{}", written.display());
            Ok(())
        }
    }
}

fn print_report(r: &EvalReport) {
    let show = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.3}"));
    println!("{:<18} {:>10} {:>14}", "measure", "rho(all)", "rho(swapped)");
    for m in &r.measures {
        println!(
            "{:<18} {:>10} {:>14}",
            m.measure.name(),
            show(m.spearman_all),
            show(m.spearman_swapped_only)
        );
    }
    let t = &r.translation;
    println!(
        "translation accuracy: unswapped {}  <50% {}  >50% {}  (50% self-translation {})",
        show(t.unswapped.accuracy()),
        show(t.below_half.accuracy()),
        show(t.above_half.accuracy()),
        show(t.half_self.accuracy())
    );
}
