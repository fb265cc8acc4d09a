//! Seeded synthetic corpora with controllable word semantics.
//!
//! Every pseudo-word gets a random latent direction. Text is a Markov chain
//! whose next-word distribution favours frequent words whose latent direction
//! is close to the current word's, so words with similar directions share
//! contexts and GloVe recovers a stable geometry. Target frequencies fall
//! log-linearly with rank, which keeps frequency-matched swap partners close
//! in frequency.

use dialectoscope_core::corpus::Corpus;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    /// Number of distinct pseudo-words.
    pub vocab_size: usize,
    /// Approximate corpus length in tokens (documents are never cut).
    pub tokens: usize,
    /// Dimension of the latent word directions.
    pub latent_dim: usize,
    /// Strength of the semantic preference in the transition kernel.
    pub coupling: f64,
    /// Target relative frequency of the most frequent word …
    pub top_weight: f64,
    /// … and of the least frequent one.
    pub bottom_weight: f64,
    pub min_doc_len: usize,
    pub max_doc_len: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            vocab_size: 1000,
            tokens: 2_000_000,
            latent_dim: 24,
            coupling: 4.0,
            top_weight: 100.0,
            bottom_weight: 1.0,
            min_doc_len: 50,
            max_doc_len: 200,
            seed: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AppError::Config(format!("synth: {m}")));
        if self.vocab_size < 2 {
            return bad("vocab_size must be at least 2");
        }
        if self.latent_dim == 0 {
            return bad("latent_dim must be at least 1");
        }
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return bad("coupling must be a non-negative number");
        }
        if !(self.bottom_weight > 0.0 && self.top_weight >= self.bottom_weight && self.top_weight.is_finite()) {
            return bad("need 0 < bottom_weight <= top_weight");
        }
        if self.min_doc_len == 0 || self.max_doc_len < self.min_doc_len {
            return bad("need 1 <= min_doc_len <= max_doc_len");
        }
        Ok(())
    }
}

const ONSETS: [&str; 16] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "tr"];
const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "ai"];

/// A unique pronounceable token for each index: bijective base-96 syllables.
pub fn pseudo_word(mut index: usize) -> String {
    let base = ONSETS.len() * VOWELS.len();
    let mut syllables = Vec::new();
    loop {
        let s = index % base;
        syllables.push(format!("{}{}", ONSETS[s / VOWELS.len()], VOWELS[s % VOWELS.len()]));
        if index < base {
            break;
        }
        index = index / base - 1;
    }
    syllables.reverse();
    // A closing consonant keeps one-syllable tokens word-like.
    if syllables.len() == 1 {
        syllables.push("n".into());
    }
    syllables.concat()
}

fn unit_gaussian<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    // Box–Muller; the direction of an isotropic Gaussian is uniform on the sphere.
    let mut v: Vec<f64> = (0..dim)
        .map(|_| {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
        })
        .collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Generates a corpus (label 1) from `config`.
pub fn generate(config: &SynthConfig) -> Result<Corpus> {
    config.validate()?;
    let n = config.vocab_size;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ratio = config.bottom_weight / config.top_weight;
    let freq: Vec<f64> = (0..n)
        .map(|r| config.top_weight * ratio.powf(r as f64 / (n - 1) as f64))
        .collect();
    let latent: Vec<Vec<f64>> = (0..n).map(|_| unit_gaussian(&mut rng, config.latent_dim)).collect();
    let kernels: Vec<WeightedIndex<f64>> = latent
        .iter()
        .map(|zi| {
            let w = latent.iter().zip(&freq).map(|(zj, f)| {
                let dot: f64 = zi.iter().zip(zj).map(|(a, b)| a * b).sum();
                f * (config.coupling * dot).exp()
            });
            WeightedIndex::new(w).expect("weights are positive and finite")
        })
        .collect();
    let start = WeightedIndex::new(&freq).expect("weights are positive and finite");
    let words: Vec<String> = (0..n).map(pseudo_word).collect();

    let mut documents = Vec::new();
    let mut produced = 0;
    while produced < config.tokens {
        let len = rng.gen_range(config.min_doc_len..=config.max_doc_len);
        let mut doc = Vec::with_capacity(len);
        let mut w = start.sample(&mut rng);
        for _ in 0..len {
            doc.push(words[w].clone());
            w = kernels[w].sample(&mut rng);
        }
        produced += len;
        documents.push(doc);
    }
    Ok(Corpus::new(1, documents))
}
