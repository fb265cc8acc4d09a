//! Synthetic validation: swap frequency-matched word pairs to known degrees
//! in a copy of a corpus and check how well each measure recovers them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::align::{translate, AlignedPair, Direction};
use crate::corpus::{Corpus, Vocabulary};
use crate::measures::{spearman_rho, Measure, MeasureTable};
use crate::{Error, Result};

/// How frequency deciles are formed; recorded in reports.
pub const DECILE_RULE: &str = "equal-count deciles of corpus-1 frequency rank";

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwapConfig {
    pub deciles: usize,
    pub pairs_per_decile: usize,
    pub degrees: Vec<f64>,
    pub seed: u64,
}

impl Default for SwapConfig {
    fn default() -> Self {
        SwapConfig {
            deciles: 10,
            pairs_per_decile: 30,
            degrees: (1..=10).map(|k| k as f64 / 10.0).collect(),
            seed: 1,
        }
    }
}

impl SwapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.deciles < 1 {
            return Err(Error::param("deciles", "must be at least 1"));
        }
        if self.pairs_per_decile < 1 {
            return Err(Error::param("pairs_per_decile", "must be at least 1"));
        }
        if self.degrees.is_empty() || self.degrees.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return Err(Error::param("degrees", "must be a nonempty list of probabilities"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwapPair {
    pub a: String,
    pub b: String,
    pub degree: f64,
    pub decile: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwapPlan {
    pub seed: u64,
    pub deciles: usize,
    pub degrees: Vec<f64>,
    pub pairs: Vec<SwapPair>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub pos_matched: bool,
    #[cfg_attr(feature = "serde", serde(default))]
    pub pos_map_checksum: Option<String>,
}

/// A plan pair resolved to vocabulary indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedPair {
    pub a: usize,
    pub b: usize,
    pub degree: f64,
}

impl SwapPlan {
    /// An empty plan: nothing is swapped.
    pub fn empty(seed: u64) -> SwapPlan {
        SwapPlan {
            seed,
            deciles: 0,
            degrees: Vec::new(),
            pairs: Vec::new(),
            pos_matched: false,
            pos_map_checksum: None,
        }
    }

    pub fn resolve(&self, vocab: &Vocabulary) -> Result<Vec<ResolvedPair>> {
        let idx = |t: &str| vocab.index_of(t).ok_or_else(|| Error::UnknownToken(t.into()));
        self.pairs
            .iter()
            .map(|p| {
                Ok(ResolvedPair {
                    a: idx(&p.a)?,
                    b: idx(&p.b)?,
                    degree: p.degree,
                })
            })
            .collect()
    }

    /// Swap degree of every vocabulary word (0 when unswapped) and whether it
    /// belongs to the plan.
    pub fn word_degrees(&self, vocab: &Vocabulary) -> Result<(Vec<f64>, Vec<bool>)> {
        let mut degree = vec![0.0; vocab.len()];
        let mut in_plan = vec![false; vocab.len()];
        for p in self.resolve(vocab)? {
            for w in [p.a, p.b] {
                degree[w] = p.degree;
                in_plan[w] = true;
            }
        }
        Ok((degree, in_plan))
    }
}

/// Word indices grouped into equal-count deciles of descending corpus-1
/// frequency; ties broken by vocabulary order.
pub fn frequency_deciles(vocab: &Vocabulary, deciles: usize) -> Vec<Vec<usize>> {
    let mut ranked: Vec<usize> = (0..vocab.len()).collect();
    ranked.sort_by(|&x, &y| vocab.count1(y).cmp(&vocab.count1(x)).then(x.cmp(&y)));
    let n = ranked.len();
    (0..deciles)
        .map(|d| ranked[d * n / deciles..(d + 1) * n / deciles].to_vec())
        .collect()
}

/// Draws word pairs without replacement so that both words of a pair share
/// a frequency decile and, when a POS map is given, a tag. Within a decile
/// the pairs are shuffled and degrees dealt out in rotation, so every degree
/// receives `pairs_per_decile / |degrees|` pairs per decile when that
/// division is exact and the remainder is spread across deciles otherwise.
pub fn sample_swap_pairs(
    vocab: &Vocabulary,
    pos: Option<&BTreeMap<String, String>>,
    config: &SwapConfig,
) -> Result<SwapPlan> {
    config.validate()?;
    if vocab.len() < config.deciles {
        return Err(Error::InfeasibleSampling(format!(
            "{} words cannot fill {} deciles",
            vocab.len(),
            config.deciles
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ppd = config.pairs_per_decile;
    let mut pairs = Vec::with_capacity(config.deciles * ppd);
    for (d, words) in frequency_deciles(vocab, config.deciles).into_iter().enumerate() {
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for w in words {
            let tag = match pos {
                Some(map) => match map.get(vocab.token(w)) {
                    Some(t) => t.as_str(),
                    None => continue,
                },
                None => "",
            };
            groups.entry(tag).or_default().push(w);
        }
        let mut candidates = Vec::new();
        for group in groups.values_mut() {
            group.shuffle(&mut rng);
            candidates.extend(group.chunks_exact(2).map(|c| (c[0], c[1])));
        }
        if candidates.len() < ppd {
            let detail = if pos.is_some() {
                format!("decile {d} yields only {} same-tag pairs, {ppd} needed", candidates.len())
            } else {
                format!("decile {d} yields only {} pairs, {ppd} needed", candidates.len())
            };
            return Err(Error::InfeasibleSampling(detail));
        }
        candidates.shuffle(&mut rng);
        for (k, &(a, b)) in candidates[..ppd].iter().enumerate() {
            pairs.push(SwapPair {
                a: vocab.token(a).into(),
                b: vocab.token(b).into(),
                degree: config.degrees[(d * ppd + k) % config.degrees.len()],
                decile: d,
            });
        }
    }
    Ok(SwapPlan {
        seed: config.seed,
        deciles: config.deciles,
        degrees: config.degrees.clone(),
        pairs,
        pos_matched: pos.is_some(),
        pos_map_checksum: None,
    })
}

/// Copy of `corpus` in which each occurrence of a paired word is replaced by
/// its partner with probability equal to the pair's degree. One random draw
/// is made per occurrence of a plan word, in document order.
pub fn apply_swaps(corpus: &Corpus, plan: &SwapPlan, seed: u64) -> Corpus {
    let mut partner: HashMap<&str, (&str, f64)> = HashMap::new();
    for p in &plan.pairs {
        partner.insert(p.a.as_str(), (p.b.as_str(), p.degree));
        partner.insert(p.b.as_str(), (p.a.as_str(), p.degree));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let documents = corpus
        .documents
        .iter()
        .map(|doc| {
            doc.iter()
                .map(|tok| match partner.get(tok.as_str()) {
                    Some(&(other, degree)) if rng.gen::<f64>() < degree => String::from(other),
                    _ => tok.clone(),
                })
                .collect()
        })
        .collect();
    Corpus::new(corpus.label, documents)
}

/// Rank correlation of one measure with the swap degrees.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasureEval {
    pub measure: Measure,
    /// `None` when the correlation is undefined (a constant series).
    pub spearman_all: Option<f64>,
    pub spearman_swapped_only: Option<f64>,
    /// Words with a defined value that entered each correlation.
    pub n_all: usize,
    pub n_swapped: usize,
}

fn rho_or_none(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    match spearman_rho(x, y) {
        Ok(r) => Ok(Some(r)),
        Err(Error::UndefinedCorrelation) => Ok(None),
        Err(Error::InvalidParameter { .. }) if x.len() < 2 => Ok(None),
        Err(e) => Err(e),
    }
}

/// Spearman correlation of a measure column with swap degrees, over every
/// word with a defined value and over plan words only.
pub fn evaluate_measure(
    measure: Measure,
    values: &[Option<f64>],
    degrees: &[f64],
    in_plan: &[bool],
) -> Result<MeasureEval> {
    if values.len() != degrees.len() || in_plan.len() != degrees.len() {
        return Err(Error::ShapeMismatch("measure and degree columns differ in length".into()));
    }
    let (mut xa, mut ya, mut xs, mut ys) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for ((v, &d), &p) in values.iter().zip(degrees).zip(in_plan) {
        if let Some(v) = *v {
            xa.push(v);
            ya.push(d);
            if p {
                xs.push(v);
                ys.push(d);
            }
        }
    }
    Ok(MeasureEval {
        measure,
        spearman_all: rho_or_none(&xa, &ya)?,
        spearman_swapped_only: rho_or_none(&xs, &ys)?,
        n_all: xa.len(),
        n_swapped: xs.len(),
    })
}

pub fn evaluate_measures(table: &MeasureTable, degrees: &[f64], in_plan: &[bool]) -> Result<Vec<MeasureEval>> {
    Measure::ALL
        .into_iter()
        .map(|m| evaluate_measure(m, &table.column(m), degrees, in_plan))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bucket {
    pub correct: usize,
    pub total: usize,
}

impl Bucket {
    fn record(&mut self, ok: bool) {
        self.total += 1;
        self.correct += ok as usize;
    }

    /// `None` for an empty bucket.
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

/// Translation outcomes by swap degree. A word is correct when both
/// translation directions land on its expected target: itself below a 50%
/// swap, its partner above.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TranslationAccuracy {
    /// Words outside the plan and degree-0 control pairs.
    pub unswapped: Bucket,
    pub below_half: Bucket,
    pub above_half: Bucket,
    /// Words swapped exactly half the time that still translate to themselves.
    pub half_self: Bucket,
}

pub fn translation_accuracy(pair: &AlignedPair, plan: &[ResolvedPair]) -> TranslationAccuracy {
    let n = pair.n_words();
    let mut role: Vec<Option<(usize, f64)>> = vec![None; n];
    for p in plan {
        role[p.a] = Some((p.b, p.degree));
        role[p.b] = Some((p.a, p.degree));
    }
    let mut acc = TranslationAccuracy::default();
    for (i, r) in role.into_iter().enumerate() {
        let hits = |target: usize| {
            translate(pair, i, Direction::FirstToSecond) == target && translate(pair, i, Direction::SecondToFirst) == target
        };
        match r {
            None => acc.unswapped.record(hits(i)),
            Some((_, 0.0)) => acc.unswapped.record(hits(i)),
            Some((_, d)) if d < 0.5 => acc.below_half.record(hits(i)),
            Some((_, 0.5)) => acc.half_self.record(hits(i)),
            Some((partner, _)) => acc.above_half.record(hits(partner)),
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub measures: Vec<MeasureEval>,
    pub translation: TranslationAccuracy,
    pub pos_matched: bool,
    pub decile_rule: String,
    pub svm_plateau_warning: bool,
}

impl EvalReport {
    pub fn measure(&self, m: Measure) -> Option<&MeasureEval> {
        self.measures.iter().find(|e| e.measure == m)
    }
}

/// Full evaluation of an original ↔ swapped aligned pair.
pub fn evaluate(
    pair: &AlignedPair,
    table: &MeasureTable,
    plan: &SwapPlan,
    vocab: &Vocabulary,
) -> Result<EvalReport> {
    let (degrees, in_plan) = plan.word_degrees(vocab)?;
    Ok(EvalReport {
        measures: evaluate_measures(table, &degrees, &in_plan)?,
        translation: translation_accuracy(pair, &plan.resolve(vocab)?),
        pos_matched: plan.pos_matched,
        decile_rule: DECILE_RULE.into(),
        svm_plateau_warning: table.svm_plateau_warning,
    })
}
