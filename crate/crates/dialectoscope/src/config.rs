//! Pipeline configuration: a TOML file with one section per module.
//!
//! Unknown keys anywhere are errors, so a misspelled hyperparameter cannot
//! silently fall back to its default. Relative paths are resolved against
//! the directory holding the config file.

use std::path::{Path, PathBuf};

use dialectoscope_core::align::{AlignMethod, AlignOptions};
use dialectoscope_core::corpus::CoocConfig;
use dialectoscope_core::glove::{GloveConfig, WeightingMode};
use dialectoscope_core::measures::{Measure, MeasureConfig, SvmConfig};
use dialectoscope_core::swapbench::SwapConfig;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};
use crate::io;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Gzip every text artifact.
    #[serde(default)]
    pub compress: bool,
    pub corpus: CorpusSection,
    #[serde(default)]
    pub glove: GloveSection,
    #[serde(default)]
    pub align: AlignSection,
    #[serde(default)]
    pub measures: MeasuresSection,
    #[serde(default)]
    pub dialectogram: DialectogramSection,
    #[serde(default)]
    pub swapbench: SwapbenchSection,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSection {
    pub first: PathBuf,
    /// Not needed by the swap benchmark, which derives its second corpus.
    pub second: Option<PathBuf>,
    pub dedup: bool,
    pub min_count: u64,
    pub window: usize,
    pub distance_weighting: bool,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            first: PathBuf::new(),
            second: None,
            dedup: true,
            min_count: 100,
            window: 10,
            distance_weighting: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GloveSection {
    pub dim: usize,
    pub epochs: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub learning_rate: f64,
    pub weighting: WeightingMode,
}

impl Default for GloveSection {
    fn default() -> Self {
        let g = GloveConfig::default();
        GloveSection {
            dim: g.dim,
            epochs: g.epochs,
            x_max: g.x_max,
            alpha: g.alpha,
            learning_rate: g.learning_rate,
            weighting: g.weighting,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlignSection {
    pub method: AlignMethod,
    pub frequency_adjust: bool,
    /// Remove the frequency direction before (true) or after (false) the
    /// first row normalization.
    pub adjust_before_normalize: bool,
}

impl Default for AlignSection {
    fn default() -> Self {
        let a = AlignOptions::default();
        AlignSection {
            method: a.method,
            frequency_adjust: a.frequency_adjust,
            adjust_before_normalize: a.adjust_before_normalize,
        }
    }
}

/// Which co-occurrence counts feed the excess co-occurrence criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EcSource {
    /// The matrices GloVe was trained on.
    #[default]
    Training,
    /// Separately counted matrices with every in-window pair weighted 1.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasuresSection {
    pub k: usize,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    pub center_offsets: bool,
    pub ec_source: EcSource,
    /// Rank sense separation by magnitude instead of signed value.
    pub rank_absolute: bool,
}

impl Default for MeasuresSection {
    fn default() -> Self {
        let m = MeasureConfig::default();
        MeasuresSection {
            k: m.k,
            svm_lambda: m.svm.lambda,
            svm_epochs: m.svm.epochs,
            center_offsets: m.center_offsets,
            ec_source: EcSource::Training,
            rank_absolute: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DialectogramSection {
    /// How many of the most frequent words are left out of every plot.
    pub exclude_top: usize,
    /// Characteristic-use threshold on mean projections.
    pub threshold: f64,
    /// Focal words plotted by `run`.
    pub focal: Vec<String>,
    /// Maximum number of annotated points per plot.
    pub labels: usize,
    /// Offsets averaged by the aggregate ranking; empty means the whole
    /// vocabulary.
    pub aggregate_focal: Vec<String>,
    /// Restricts the aggregate to the top words of `aggregate_ranking`
    /// instead of an explicit list.
    pub aggregate_top_k: Option<usize>,
    pub aggregate_ranking: Measure,
    /// Extreme words reported per space by the mean-offset projection.
    pub meanoffset_top_k: usize,
}

impl Default for DialectogramSection {
    fn default() -> Self {
        DialectogramSection {
            exclude_top: dialectoscope_core::dialectogram::EXCLUDED_TOP_WORDS,
            threshold: 0.2,
            focal: Vec::new(),
            labels: crate::svg::DEFAULT_LABELS,
            aggregate_focal: Vec::new(),
            aggregate_top_k: None,
            aggregate_ranking: Measure::CosineDistance,
            meanoffset_top_k: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwapbenchSection {
    pub deciles: usize,
    pub pairs_per_decile: usize,
    pub degrees: Vec<f64>,
    /// Optional `token<TAB>tag` file; pairs then share a tag.
    pub pos_map: Option<PathBuf>,
}

impl Default for SwapbenchSection {
    fn default() -> Self {
        let s = SwapConfig::default();
        SwapbenchSection {
            deciles: s.deciles,
            pairs_per_decile: s.pairs_per_decile,
            degrees: s.degrees,
            pos_map: None,
        }
    }
}

impl PipelineConfig {
    /// Parses a config file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        if !path.exists() {
            return Err(AppError::MissingInput(path.to_path_buf()));
        }
        let text = io::read_text(path)?;
        let mut cfg = Self::parse(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> std::result::Result<PipelineConfig, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks parameter ranges and that every referenced input exists.
    /// `needs_second` is false for runs that only read the first corpus.
    pub fn validate(&self, needs_second: bool) -> Result<()> {
        self.cooc().validate()?;
        self.glove(self.seed).validate()?;
        self.swap().validate()?;
        if self.corpus.min_count == 0 {
            return Err(AppError::Config("corpus.min_count must be at least 1".into()));
        }
        if self.measures.k == 0 {
            return Err(AppError::Config("measures.k must be at least 1".into()));
        }
        if !(self.measures.svm_lambda > 0.0 && self.measures.svm_lambda.is_finite()) || self.measures.svm_epochs == 0 {
            return Err(AppError::Config("measures.svm_lambda must be positive and svm_epochs at least 1".into()));
        }
        if !(self.dialectogram.threshold > 0.0 && self.dialectogram.threshold.is_finite()) {
            return Err(AppError::Config("dialectogram.threshold must be positive".into()));
        }
        match self.dialectogram.aggregate_top_k {
            Some(0) => return Err(AppError::Config("dialectogram.aggregate_top_k must be at least 1".into())),
            Some(_) if !self.dialectogram.aggregate_focal.is_empty() => {
                return Err(AppError::Config(
                    "set either dialectogram.aggregate_focal or dialectogram.aggregate_top_k, not both".into(),
                ))
            }
            _ => {}
        }
        if self.corpus.first.as_os_str().is_empty() {
            return Err(AppError::Config("corpus.first is required".into()));
        }
        self.require(&self.corpus.first)?;
        if needs_second {
            let second = self
                .corpus
                .second
                .as_ref()
                .ok_or_else(|| AppError::Config("corpus.second is required".into()))?;
            self.require(second)?;
        }
        if let Some(p) = &self.swapbench.pos_map {
            self.require(p)?;
        }
        Ok(())
    }

    fn require(&self, p: &Path) -> Result<()> {
        let full = self.resolve(p);
        match io::locate(&full) {
            Some(_) => Ok(()),
            None => Err(AppError::MissingInput(full)),
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    /// SHA-256 of the canonical serialization, recorded in every sidecar.
    pub fn hash(&self) -> String {
        io::sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    pub fn cooc(&self) -> CoocConfig {
        CoocConfig {
            window: self.corpus.window,
            distance_weighting: self.corpus.distance_weighting,
        }
    }

    pub fn glove(&self, seed: u64) -> GloveConfig {
        let g = &self.glove;
        GloveConfig {
            dim: g.dim,
            epochs: g.epochs,
            x_max: g.x_max,
            alpha: g.alpha,
            learning_rate: g.learning_rate,
            weighting: g.weighting,
            seed,
        }
    }

    pub fn align_options(&self) -> AlignOptions {
        AlignOptions {
            method: self.align.method,
            frequency_adjust: self.align.frequency_adjust,
            adjust_before_normalize: self.align.adjust_before_normalize,
        }
    }

    pub fn measure(&self) -> MeasureConfig {
        MeasureConfig {
            k: self.measures.k,
            svm: SvmConfig {
                lambda: self.measures.svm_lambda,
                epochs: self.measures.svm_epochs,
                seed: self.seed,
                ..SvmConfig::default()
            },
            center_offsets: self.measures.center_offsets,
        }
    }

    pub fn swap(&self) -> SwapConfig {
        SwapConfig {
            deciles: self.swapbench.deciles,
            pairs_per_decile: self.swapbench.pairs_per_decile,
            degrees: self.swapbench.degrees.clone(),
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "output_dir = \"out\"\n[corpus]\nfirst = \"a.txt\"\nsecond = \"b.txt\"\n";

    #[test]
    fn defaults_fill_missing_sections() {
        let c = PipelineConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.seed, 1);
        assert_eq!(c.corpus.min_count, 100);
        assert_eq!(c.corpus.window, 10);
        assert_eq!(c.glove.dim, 300);
        assert_eq!(c.glove.epochs, 30);
        assert_eq!(c.measures.k, 30);
        assert_eq!(c.dialectogram.threshold, 0.2);
        assert_eq!(c.dialectogram.exclude_top, 3);
        assert_eq!(c.swapbench.pairs_per_decile, 30);
        assert_eq!(PipelineConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let typo = format!("{MINIMAL}[glove]\ndimm = 50\n");
        assert!(PipelineConfig::parse(&typo).unwrap_err().contains("dimm"));
        assert!(PipelineConfig::parse(&format!("seeed = 3\n{MINIMAL}")).is_err());
        assert!(PipelineConfig::parse(&format!("{MINIMAL}[align]\nmethod = \"rotate\"\n")).is_err());
    }

    #[test]
    fn missing_inputs_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, MINIMAL).unwrap();
        let c = PipelineConfig::load(&path).unwrap();
        let err = c.validate(true).unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG);
        assert!(err.to_string().contains("a.txt"));
        std::fs::write(dir.path().join("a.txt"), "x y\n").unwrap();
        assert!(c.validate(false).is_ok());
        assert!(c.validate(true).unwrap_err().to_string().contains("b.txt"));
    }

    #[test]
    fn parameter_ranges_are_checked() {
        let mut c = PipelineConfig::parse(MINIMAL).unwrap();
        c.glove.dim = 0;
        assert_eq!(c.validate(false).unwrap_err().exit_code(), crate::error::EXIT_CONFIG);
    }
}
