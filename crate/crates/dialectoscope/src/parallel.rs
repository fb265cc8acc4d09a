//! Multi-threaded counting and training.
//!
//! With one thread both entry points defer to the deterministic library
//! routines. Counting stays bit-identical at any thread count because shard
//! counters hold exact integers and are merged in shard order. Training with
//! several threads is lock-free ("Hogwild"): workers race on shared
//! parameters, so results vary from run to run.

use std::sync::atomic::{AtomicU64, Ordering};

use dialectoscope_core::corpus::{count_cooccurrences, CoocConfig, CoocCounter, CoocMatrix, Corpus, Vocabulary};
use dialectoscope_core::glove::{
    adagrad_step, loss, train, training_pairs, training_rng, GloveConfig, GloveParams, PairState, TrainedGlove,
};
use dialectoscope_core::{Error, Matrix};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{AppError, Result};

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| AppError::Config(format!("cannot start {threads} worker threads: {e}")))
}

/// Co-occurrence counting over document shards.
pub fn count_parallel(corpus: &Corpus, vocab: &Vocabulary, config: CoocConfig, threads: usize) -> Result<CoocMatrix> {
    if threads <= 1 {
        return Ok(count_cooccurrences(corpus, vocab, config)?);
    }
    let shard_len = corpus.documents.len().div_ceil(threads * 4).max(1);
    let shards: Vec<CoocCounter> = pool(threads)?.install(|| {
        corpus
            .documents
            .par_chunks(shard_len)
            .map(|docs| {
                let mut c = CoocCounter::new(vocab.len(), config)?;
                for d in docs {
                    c.add_document(&vocab.encode(d))?;
                }
                Ok(c)
            })
            .collect::<std::result::Result<_, Error>>()
    })?;
    let mut it = shards.into_iter();
    let mut total = it.next().map_or_else(|| CoocCounter::new(vocab.len(), config), Ok)?;
    for s in it {
        total.merge(s)?;
    }
    Ok(total.finish()?)
}

/// Parameters shared between workers as `f64` bit patterns.
struct SharedParams {
    dim: usize,
    word: Vec<AtomicU64>,
    context: Vec<AtomicU64>,
    word_gradsq: Vec<AtomicU64>,
    context_gradsq: Vec<AtomicU64>,
    word_bias: Vec<AtomicU64>,
    context_bias: Vec<AtomicU64>,
    word_bias_gradsq: Vec<AtomicU64>,
    context_bias_gradsq: Vec<AtomicU64>,
}

fn share(v: &[f64]) -> Vec<AtomicU64> {
    v.iter().map(|x| AtomicU64::new(x.to_bits())).collect()
}

fn unshare(v: &[AtomicU64]) -> Vec<f64> {
    v.iter().map(|x| f64::from_bits(x.load(Ordering::Relaxed))).collect()
}

fn load(src: &[AtomicU64], dst: &mut [f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = f64::from_bits(s.load(Ordering::Relaxed));
    }
}

fn store(src: &[f64], dst: &[AtomicU64]) {
    for (s, d) in src.iter().zip(dst) {
        d.store(s.to_bits(), Ordering::Relaxed);
    }
}

impl SharedParams {
    fn new(p: &GloveParams) -> Self {
        SharedParams {
            dim: p.dim(),
            word: share(p.word.as_slice()),
            context: share(p.context.as_slice()),
            word_gradsq: share(p.word_gradsq.as_slice()),
            context_gradsq: share(p.context_gradsq.as_slice()),
            word_bias: share(&p.word_bias),
            context_bias: share(&p.context_bias),
            word_bias_gradsq: share(&p.word_bias_gradsq),
            context_bias_gradsq: share(&p.context_bias_gradsq),
        }
    }

    fn into_params(self) -> GloveParams {
        let n = self.word_bias.len();
        let m = |v: &[AtomicU64]| Matrix::from_vec(n, self.dim, unshare(v)).expect("shape preserved");
        GloveParams {
            word: m(&self.word),
            context: m(&self.context),
            word_gradsq: m(&self.word_gradsq),
            context_gradsq: m(&self.context_gradsq),
            word_bias: unshare(&self.word_bias),
            context_bias: unshare(&self.context_bias),
            word_bias_gradsq: unshare(&self.word_bias_gradsq),
            context_bias_gradsq: unshare(&self.context_bias_gradsq),
        }
    }
}

/// Per-worker scratch copies of one pair's parameters.
struct Scratch {
    word: Vec<f64>,
    context: Vec<f64>,
    word_gradsq: Vec<f64>,
    context_gradsq: Vec<f64>,
}

/// GloVe training; lock-free across workers when `threads > 1`.
pub fn train_parallel(cooc: &CoocMatrix, config: &GloveConfig, threads: usize) -> Result<TrainedGlove> {
    if threads <= 1 {
        return Ok(train(cooc, config)?);
    }
    config.validate()?;
    if cooc.is_empty() {
        return Err(Error::EmptyCooccurrences.into());
    }
    let mut rng = training_rng(config);
    let init = GloveParams::random(cooc.n_words(), config.dim, &mut rng);
    let initial_mean_loss = loss(&init, cooc, config) / cooc.nnz() as f64;
    let shared = SharedParams::new(&init);
    let pairs = training_pairs(cooc, config);
    let mut order: Vec<u32> = (0..pairs.len() as u32).collect();
    let d = config.dim;
    let chunk = pairs.len().div_ceil(threads);
    let pool = pool(threads)?;
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let partial: Vec<f64> = pool.install(|| {
            order
                .par_chunks(chunk)
                .map(|ks| {
                    let mut s = Scratch {
                        word: vec![0.0; d],
                        context: vec![0.0; d],
                        word_gradsq: vec![0.0; d],
                        context_gradsq: vec![0.0; d],
                    };
                    let mut total = 0.0;
                    for &k in ks {
                        let p = pairs[k as usize];
                        let (i, j) = (p.i as usize, p.j as usize);
                        let (wi, cj) = (i * d..(i + 1) * d, j * d..(j + 1) * d);
                        load(&shared.word[wi.clone()], &mut s.word);
                        load(&shared.context[cj.clone()], &mut s.context);
                        load(&shared.word_gradsq[wi.clone()], &mut s.word_gradsq);
                        load(&shared.context_gradsq[cj.clone()], &mut s.context_gradsq);
                        let f = |a: &AtomicU64| f64::from_bits(a.load(Ordering::Relaxed));
                        let (mut wb, mut cb) = (f(&shared.word_bias[i]), f(&shared.context_bias[j]));
                        let (mut wbg, mut cbg) = (f(&shared.word_bias_gradsq[i]), f(&shared.context_bias_gradsq[j]));
                        total += adagrad_step(
                            PairState {
                                word: &mut s.word,
                                context: &mut s.context,
                                word_gradsq: &mut s.word_gradsq,
                                context_gradsq: &mut s.context_gradsq,
                                word_bias: &mut wb,
                                context_bias: &mut cb,
                                word_bias_gradsq: &mut wbg,
                                context_bias_gradsq: &mut cbg,
                            },
                            p.log_x,
                            p.weight,
                            config.learning_rate,
                        );
                        store(&s.word, &shared.word[wi.clone()]);
                        store(&s.context, &shared.context[cj.clone()]);
                        store(&s.word_gradsq, &shared.word_gradsq[wi]);
                        store(&s.context_gradsq, &shared.context_gradsq[cj]);
                        shared.word_bias[i].store(wb.to_bits(), Ordering::Relaxed);
                        shared.context_bias[j].store(cb.to_bits(), Ordering::Relaxed);
                        shared.word_bias_gradsq[i].store(wbg.to_bits(), Ordering::Relaxed);
                        shared.context_bias_gradsq[j].store(cbg.to_bits(), Ordering::Relaxed);
                    }
                    total
                })
                .collect()
        });
        let mean = partial.iter().sum::<f64>() / pairs.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Divergence { epoch }.into());
        }
        trace.push(mean);
    }
    let params = shared.into_params();
    if !params.is_finite() {
        return Err(Error::Divergence { epoch: config.epochs }.into());
    }
    Ok(TrainedGlove {
        params,
        initial_mean_loss,
        trace,
    })
}
