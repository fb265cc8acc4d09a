//! GloVe embeddings trained with AdaGrad on a [`CoocMatrix`].
//!
//! The loss is `Σ f(X_ij) · (w_i·w̃_j + b_i + b̃_j − ln X_ij)²` over all
//! stored pairs. Updates follow the reference implementation: the step for
//! each pair uses `f(X_ij) · residual` (half the gradient of the loss term),
//! AdaGrad accumulators start at 1, and parameters are initialized uniformly
//! in `(−0.5/D, 0.5/D)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::CoocMatrix;
use crate::linalg::{dot, norm, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum WeightingMode {
    /// `(x/x_max)^α` below `x_max`, 1 above.
    #[default]
    Default,
    /// Every pair weighted 1.
    Uniform,
    /// Experimental: low-count pairs weighted near 1, frequent pairs near 0.
    Inverted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GloveConfig {
    pub dim: usize,
    pub epochs: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub learning_rate: f64,
    pub weighting: WeightingMode,
    pub seed: u64,
}

impl Default for GloveConfig {
    fn default() -> Self {
        GloveConfig {
            dim: 300,
            epochs: 30,
            x_max: 100.0,
            alpha: 0.75,
            learning_rate: 0.05,
            weighting: WeightingMode::Default,
            seed: 1,
        }
    }
}

impl GloveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        if self.epochs < 1 {
            return Err(Error::param("epochs", "must be at least 1"));
        }
        if self.x_max.is_nan() || self.x_max <= 0.0 {
            return Err(Error::param("x_max", "must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param("alpha", "must lie in (0, 1]"));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::param("learning_rate", "must be positive"));
        }
        Ok(())
    }
}

/// Floor of the inverted weighting, so no stored pair is ignored entirely.
pub const INVERTED_WEIGHT_FLOOR: f64 = 0.01;

/// Weight of a pair with co-occurrence `x > 0`.
pub fn weight_fn(x: f64, config: &GloveConfig) -> f64 {
    match config.weighting {
        WeightingMode::Default => {
            if x < config.x_max {
                libm::pow(x / config.x_max, config.alpha)
            } else {
                1.0
            }
        }
        WeightingMode::Uniform => 1.0,
        WeightingMode::Inverted => {
            let r = (x / config.x_max).min(1.0);
            (1.0 - libm::pow(r, config.alpha)).max(INVERTED_WEIGHT_FLOOR)
        }
    }
}

/// Word and context parameters plus their AdaGrad accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct GloveParams {
    pub word: Matrix,
    pub context: Matrix,
    pub word_bias: Vec<f64>,
    pub context_bias: Vec<f64>,
    pub word_gradsq: Matrix,
    pub context_gradsq: Matrix,
    pub word_bias_gradsq: Vec<f64>,
    pub context_bias_gradsq: Vec<f64>,
}

impl GloveParams {
    /// Zero vectors and biases, accumulators at 1.
    pub fn zeros(n_words: usize, dim: usize) -> Self {
        GloveParams {
            word: Matrix::zeros(n_words, dim),
            context: Matrix::zeros(n_words, dim),
            word_bias: vec![0.0; n_words],
            context_bias: vec![0.0; n_words],
            word_gradsq: ones(n_words, dim),
            context_gradsq: ones(n_words, dim),
            word_bias_gradsq: vec![1.0; n_words],
            context_bias_gradsq: vec![1.0; n_words],
        }
    }

    /// Uniform initialization in `(−0.5/D, 0.5/D)` for vectors and biases.
    pub fn random<R: Rng>(n_words: usize, dim: usize, rng: &mut R) -> Self {
        let mut p = GloveParams::zeros(n_words, dim);
        let half = 0.5 / dim as f64;
        for i in 0..n_words {
            for x in p.word.row_mut(i) {
                *x = rng.gen_range(-half..half);
            }
            p.word_bias[i] = rng.gen_range(-half..half);
        }
        for i in 0..n_words {
            for x in p.context.row_mut(i) {
                *x = rng.gen_range(-half..half);
            }
            p.context_bias[i] = rng.gen_range(-half..half);
        }
        p
    }

    pub fn n_words(&self) -> usize {
        self.word.rows()
    }

    pub fn dim(&self) -> usize {
        self.word.cols()
    }

    pub fn is_finite(&self) -> bool {
        self.word.is_finite()
            && self.context.is_finite()
            && self.word_bias.iter().all(|x| x.is_finite())
            && self.context_bias.iter().all(|x| x.is_finite())
    }

    /// Exchanges the roles of word and context parameters.
    pub fn swapped_roles(&self) -> GloveParams {
        GloveParams {
            word: self.context.clone(),
            context: self.word.clone(),
            word_bias: self.context_bias.clone(),
            context_bias: self.word_bias.clone(),
            word_gradsq: self.context_gradsq.clone(),
            context_gradsq: self.word_gradsq.clone(),
            word_bias_gradsq: self.context_bias_gradsq.clone(),
            context_bias_gradsq: self.word_bias_gradsq.clone(),
        }
    }
}

fn ones(rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, vec![1.0; rows * cols]).expect("sized")
}

/// `w_i·w̃_j + b_i + b̃_j − ln x`
#[inline]
fn residual(params: &GloveParams, i: usize, j: usize, log_x: f64) -> f64 {
    dot(params.word.row(i), params.context.row(j)) + params.word_bias[i] + params.context_bias[j] - log_x
}

/// Weighted least-squares objective over all stored pairs.
pub fn loss(params: &GloveParams, cooc: &CoocMatrix, config: &GloveConfig) -> f64 {
    cooc.entries()
        .map(|(i, j, x)| {
            let r = residual(params, i, j, libm::log(x));
            weight_fn(x, config) * r * r
        })
        .sum()
}

/// Gradient of one pair's loss term with respect to the parameters it
/// touches.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub word: Vec<f64>,
    pub context: Vec<f64>,
    pub word_bias: f64,
    pub context_bias: f64,
}

pub fn pair_gradient(params: &GloveParams, i: usize, j: usize, x: f64, config: &GloveConfig) -> PairGradient {
    let g = 2.0 * weight_fn(x, config) * residual(params, i, j, libm::log(x));
    PairGradient {
        word: params.context.row(j).iter().map(|c| g * c).collect(),
        context: params.word.row(i).iter().map(|w| g * w).collect(),
        word_bias: g,
        context_bias: g,
    }
}

/// Largest magnitude of the weighted residual used in one update.
pub const RESIDUAL_CLIP: f64 = 100.0;

/// Mutable views of everything a single pair update touches.
pub struct PairState<'a> {
    pub word: &'a mut [f64],
    pub context: &'a mut [f64],
    pub word_gradsq: &'a mut [f64],
    pub context_gradsq: &'a mut [f64],
    pub word_bias: &'a mut f64,
    pub context_bias: &'a mut f64,
    pub word_bias_gradsq: &'a mut f64,
    pub context_bias_gradsq: &'a mut f64,
}

/// One AdaGrad step for a pair; returns the pair's loss before the step.
pub fn adagrad_step(state: PairState<'_>, log_x: f64, weight: f64, learning_rate: f64) -> f64 {
    let diff = dot(state.word, state.context) + *state.word_bias + *state.context_bias - log_x;
    let pair_loss = weight * diff * diff;
    let fdiff = (weight * diff).clamp(-RESIDUAL_CLIP, RESIDUAL_CLIP) * learning_rate;
    for k in 0..state.word.len() {
        let w = state.word[k];
        let c = state.context[k];
        let gw = fdiff * c;
        let gc = fdiff * w;
        state.word[k] = w - gw / libm::sqrt(state.word_gradsq[k]);
        state.context[k] = c - gc / libm::sqrt(state.context_gradsq[k]);
        state.word_gradsq[k] += gw * gw;
        state.context_gradsq[k] += gc * gc;
    }
    *state.word_bias -= fdiff / libm::sqrt(*state.word_bias_gradsq);
    *state.context_bias -= fdiff / libm::sqrt(*state.context_bias_gradsq);
    *state.word_bias_gradsq += fdiff * fdiff;
    *state.context_bias_gradsq += fdiff * fdiff;
    pair_loss
}

/// A stored pair prepared for training.
#[derive(Debug, Clone, Copy)]
pub struct TrainingPair {
    pub i: u32,
    pub j: u32,
    pub log_x: f64,
    pub weight: f64,
}

pub fn training_pairs(cooc: &CoocMatrix, config: &GloveConfig) -> Vec<TrainingPair> {
    cooc.entries()
        .map(|(i, j, x)| TrainingPair {
            i: i as u32,
            j: j as u32,
            log_x: libm::log(x),
            weight: weight_fn(x, config),
        })
        .collect()
}

impl GloveParams {
    fn pair_state(&mut self, i: usize, j: usize) -> PairState<'_> {
        let d = self.word.cols();
        PairState {
            word: &mut self.word.as_mut_slice()[i * d..(i + 1) * d],
            context: &mut self.context.as_mut_slice()[j * d..(j + 1) * d],
            word_gradsq: &mut self.word_gradsq.as_mut_slice()[i * d..(i + 1) * d],
            context_gradsq: &mut self.context_gradsq.as_mut_slice()[j * d..(j + 1) * d],
            word_bias: &mut self.word_bias[i],
            context_bias: &mut self.context_bias[j],
            word_bias_gradsq: &mut self.word_bias_gradsq[i],
            context_bias_gradsq: &mut self.context_bias_gradsq[j],
        }
    }
}

/// Result of [`train`].
#[derive(Debug, Clone)]
pub struct TrainedGlove {
    pub params: GloveParams,
    /// Mean pair loss at initialization.
    pub initial_mean_loss: f64,
    /// Mean pair loss accumulated during each epoch.
    pub trace: Vec<f64>,
}

/// Seeded generator used for initialization and pair shuffling.
pub fn training_rng(config: &GloveConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed)
}

/// Single-threaded, fully deterministic training.
pub fn train(cooc: &CoocMatrix, config: &GloveConfig) -> Result<TrainedGlove> {
    config.validate()?;
    if cooc.is_empty() {
        return Err(Error::EmptyCooccurrences);
    }
    let mut rng = training_rng(config);
    let mut params = GloveParams::random(cooc.n_words(), config.dim, &mut rng);
    let initial_mean_loss = loss(&params, cooc, config) / cooc.nnz() as f64;
    let pairs = training_pairs(cooc, config);
    let mut order: Vec<u32> = (0..pairs.len() as u32).collect();
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &k in &order {
            let p = pairs[k as usize];
            let state = params.pair_state(p.i as usize, p.j as usize);
            total += adagrad_step(state, p.log_x, p.weight, config.learning_rate);
        }
        let mean = total / pairs.len() as f64;
        if !mean.is_finite() || !params.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        trace.push(mean);
    }
    Ok(TrainedGlove {
        params,
        initial_mean_loss,
        trace,
    })
}

/// Word vectors bound to vocabulary order: row `i` embeds word `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub matrix: Matrix,
    pub normalized: bool,
}

impl EmbeddingSet {
    pub fn new(matrix: Matrix) -> Self {
        EmbeddingSet {
            matrix,
            normalized: false,
        }
    }

    pub fn n_words(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn normalize(&self) -> Result<EmbeddingSet> {
        Ok(EmbeddingSet {
            matrix: self.matrix.normalized_rows()?,
            normalized: true,
        })
    }

    /// Whether every row has unit norm within `tol`.
    pub fn rows_unit(&self, tol: f64) -> bool {
        self.matrix.row_iter().all(|r| libm::fabs(norm(r) - 1.0) <= tol)
    }
}

/// Final embedding `w_i + w̃_i`, optionally scaled to unit rows.
pub fn finalize_embedding(params: &GloveParams, normalize: bool) -> Result<EmbeddingSet> {
    let data = params
        .word
        .as_slice()
        .iter()
        .zip(params.context.as_slice())
        .map(|(w, c)| w + c)
        .collect();
    let set = EmbeddingSet::new(Matrix::from_vec(params.n_words(), params.dim(), data)?);
    if normalize {
        set.normalize()
    } else {
        Ok(set)
    }
}
