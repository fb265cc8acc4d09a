//! Dialectograms: projections of the vocabulary onto a focal word's offset
//! between the two aligned spaces.
//!
//! Sign convention: the offset is `first[focal] − second[focal]`, so positive
//! projections point toward corpus 1's embedding of the focal word.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::align::{translate, AlignedPair, Direction};
use crate::corpus::{CoocMatrix, Vocabulary};
use crate::linalg::{dot, norm};
use crate::measures::{excess_cooccurrence, unit_offset};
use crate::{Error, Result};

/// Number of most frequent words left out of a dialectogram by default.
pub const EXCLUDED_TOP_WORDS: usize = 3;

/// Scalar projections of every word in both spaces onto the unit offset of
/// `focal`.
pub fn project_offset(pair: &AlignedPair, focal: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if focal >= pair.n_words() {
        return Err(Error::param("focal", "index outside the vocabulary"));
    }
    let (u, _) = unit_offset(pair, focal)?;
    let a1 = pair.first.row_iter().map(|r| dot(r, &u)).collect();
    let a2 = pair.second.row_iter().map(|r| dot(r, &u)).collect();
    Ok((a1, a2))
}

/// Excess co-occurrence class of a word relative to the focal word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EcClass {
    Both,
    Only1,
    Only2,
    Neither,
}

impl EcClass {
    pub fn classify(ec1: f64, ec2: f64) -> EcClass {
        match (ec1 > 1.0, ec2 > 1.0) {
            (true, true) => EcClass::Both,
            (true, false) => EcClass::Only1,
            (false, true) => EcClass::Only2,
            (false, false) => EcClass::Neither,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EcClass::Both => "both",
            EcClass::Only1 => "only1",
            EcClass::Only2 => "only2",
            EcClass::Neither => "neither",
        }
    }

    pub fn from_name(s: &str) -> Option<EcClass> {
        [EcClass::Both, EcClass::Only1, EcClass::Only2, EcClass::Neither]
            .into_iter()
            .find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DialectogramRecord {
    pub token: String,
    pub alpha1: f64,
    pub alpha2: f64,
    pub freq1: u64,
    pub freq2: u64,
    pub ec_class: EcClass,
}

impl DialectogramRecord {
    pub fn mean_frequency(&self) -> f64 {
        (self.freq1 + self.freq2) as f64 / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dialectogram {
    pub focal: String,
    pub offset_norm: f64,
    /// Nearest corpus-2 word to the focal word's corpus-1 embedding.
    pub translation_1to2: String,
    /// Nearest corpus-1 word to the focal word's corpus-2 embedding.
    pub translation_2to1: String,
    #[cfg_attr(feature = "serde", serde(default))]
    pub excluded: Vec<String>,
    pub records: Vec<DialectogramRecord>,
}

/// Builds the dialectogram of `focal`: every word co-occurring with it in
/// either corpus, except the focal word itself and the `exclude_top` most
/// frequent words.
pub fn build_dialectogram(
    pair: &AlignedPair,
    cooc1: &CoocMatrix,
    cooc2: &CoocMatrix,
    vocab: &Vocabulary,
    focal: usize,
    exclude_top: usize,
) -> Result<Dialectogram> {
    let n = pair.n_words();
    if vocab.len() != n || cooc1.n_words() != n || cooc2.n_words() != n {
        return Err(Error::ShapeMismatch("dialectogram inputs cover different vocabularies".into()));
    }
    let (a1, a2) = project_offset(pair, focal)?;
    let offset_norm = norm(&pair.offset(focal));
    let top = vocab.most_frequent(exclude_top);

    let mut retained: Vec<usize> = cooc1.row(focal).chain(cooc2.row(focal)).map(|(j, _)| j).collect();
    retained.sort_unstable();
    retained.dedup();
    let records = retained
        .into_iter()
        .filter(|&j| j != focal && !top.contains(&j))
        .map(|j| DialectogramRecord {
            token: vocab.token(j).into(),
            alpha1: a1[j],
            alpha2: a2[j],
            freq1: vocab.count1(j),
            freq2: vocab.count2(j),
            ec_class: EcClass::classify(excess_cooccurrence(cooc1, focal, j), excess_cooccurrence(cooc2, focal, j)),
        })
        .collect();
    Ok(Dialectogram {
        focal: vocab.token(focal).into(),
        offset_norm,
        translation_1to2: vocab.token(translate(pair, focal, Direction::FirstToSecond)).into(),
        translation_2to1: vocab.token(translate(pair, focal, Direction::SecondToFirst)).into(),
        excluded: top.map(|j| vocab.token(j).into()).collect(),
        records,
    })
}

/// Projection of the vocabulary onto the sign-harmonized mean offset of a
/// word set.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanOffsetProjection {
    pub word_set: Vec<usize>,
    /// Unit mean offset.
    pub direction: Vec<f64>,
    /// Whether each member's offset was negated before averaging.
    pub flipped: Vec<bool>,
    /// Projections of each set member in corpus 1 and corpus 2.
    pub member_alpha1: Vec<f64>,
    pub member_alpha2: Vec<f64>,
    /// Most positive / most negative vocabulary words per space, as
    /// `(word, projection)`.
    pub top_positive: [Vec<(usize, f64)>; 2],
    pub top_negative: [Vec<(usize, f64)>; 2],
}

fn signed_mean(offsets: &[Vec<f64>], flipped: &[bool]) -> Vec<f64> {
    let d = offsets[0].len();
    let mut mean = vec![0.0; d];
    for (o, &f) in offsets.iter().zip(flipped) {
        let s = if f { -1.0 } else { 1.0 };
        for (m, x) in mean.iter_mut().zip(o) {
            *m += s * x;
        }
    }
    let k = offsets.len() as f64;
    mean.iter_mut().for_each(|m| *m /= k);
    mean
}

/// Harmonizes member offset signs so that every member agrees with the mean
/// they produce, then projects the vocabulary onto that mean.
///
/// Members whose offset has a negative cosine with the current mean are
/// flipped and the mean recomputed until no member disagrees. If the initial
/// mean vanishes (e.g. perfectly antipodal offsets), the first member's
/// offset seeds the reference direction instead.
pub fn mean_offset_projection(pair: &AlignedPair, word_set: &[usize], top_k: usize) -> Result<MeanOffsetProjection> {
    if word_set.len() < 2 {
        return Err(Error::param("word_set", "needs at least two words"));
    }
    if let Some(&bad) = word_set.iter().find(|&&w| w >= pair.n_words()) {
        return Err(Error::param("word_set", alloc::format!("index {bad} outside the vocabulary")));
    }
    let offsets: Vec<Vec<f64>> = word_set.iter().map(|&w| pair.offset(w)).collect();
    let mut flipped = vec![false; word_set.len()];
    let mut mean = signed_mean(&offsets, &flipped);
    if norm(&mean) < 1e-12 {
        mean = offsets[0].clone();
        if norm(&mean) < 1e-12 {
            return Err(Error::DegenerateMean { norm: norm(&mean) });
        }
    }
    // Each pass strictly increases ‖Σ sᵢ oᵢ‖, so this terminates; the bound
    // is a guard against floating-point cycling.
    for _ in 0..=4 * word_set.len() {
        let mut changed = false;
        for (k, o) in offsets.iter().enumerate() {
            let s = if flipped[k] { -1.0 } else { 1.0 };
            if s * dot(o, &mean) < 0.0 {
                flipped[k] = !flipped[k];
                changed = true;
            }
        }
        mean = signed_mean(&offsets, &flipped);
        if !changed {
            break;
        }
    }
    let n = norm(&mean);
    if n < 1e-12 {
        return Err(Error::DegenerateMean { norm: n });
    }
    let direction: Vec<f64> = mean.iter().map(|x| x / n).collect();

    let a1: Vec<f64> = pair.first.row_iter().map(|r| dot(r, &direction)).collect();
    let a2: Vec<f64> = pair.second.row_iter().map(|r| dot(r, &direction)).collect();
    let extremes = |a: &[f64], positive: bool| -> Vec<(usize, f64)> {
        let mut idx: Vec<usize> = (0..a.len()).collect();
        idx.sort_by(|&x, &y| {
            let o = a[y].total_cmp(&a[x]);
            (if positive { o } else { o.reverse() }).then(x.cmp(&y))
        });
        idx.into_iter().take(top_k).map(|i| (i, a[i])).collect()
    };
    Ok(MeanOffsetProjection {
        word_set: word_set.to_vec(),
        member_alpha1: word_set.iter().map(|&w| a1[w]).collect(),
        member_alpha2: word_set.iter().map(|&w| a2[w]).collect(),
        top_positive: [extremes(&a1, true), extremes(&a2, true)],
        top_negative: [extremes(&a1, false), extremes(&a2, false)],
        direction,
        flipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregateScore {
    pub word: usize,
    /// Focal words on whose offset this word's mean projection exceeds `t`.
    pub count_pos: usize,
    /// Focal words on whose offset it falls below `−t`.
    pub count_neg: usize,
}

impl AggregateScore {
    pub fn score(&self) -> i64 {
        self.count_pos as i64 - self.count_neg as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTable {
    pub threshold: f64,
    pub focal_words: Vec<usize>,
    /// Sorted by descending score, ties by word index.
    pub scores: Vec<AggregateScore>,
    /// Focal words skipped because their two embeddings coincide.
    pub skipped: Vec<usize>,
}

/// Counts, for every word, on how many focal offsets its mean projection
/// `(α¹ + α²)/2` lies above `t` versus below `−t`. A word is not counted
/// against its own offset.
pub fn aggregate_characteristic_use(pair: &AlignedPair, focal_words: &[usize], threshold: f64) -> Result<AggregateTable> {
    if focal_words.is_empty() {
        return Err(Error::param("focal_words", "must not be empty"));
    }
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::param("threshold", "must be positive"));
    }
    let n = pair.n_words();
    let mut pos = vec![0usize; n];
    let mut neg = vec![0usize; n];
    let mut skipped = Vec::new();
    for &i in focal_words {
        let (a1, a2) = match project_offset(pair, i) {
            Ok(p) => p,
            Err(Error::ZeroOffset { .. }) => {
                skipped.push(i);
                continue;
            }
            Err(e) => return Err(e),
        };
        for j in (0..n).filter(|&j| j != i) {
            let m = (a1[j] + a2[j]) / 2.0;
            if m > threshold {
                pos[j] += 1;
            } else if m < -threshold {
                neg[j] += 1;
            }
        }
    }
    let mut scores: Vec<AggregateScore> = (0..n)
        .map(|word| AggregateScore {
            word,
            count_pos: pos[word],
            count_neg: neg[word],
        })
        .collect();
    scores.sort_by(|a, b| b.score().cmp(&a.score()).then(a.word.cmp(&b.word)));
    Ok(AggregateTable {
        threshold,
        focal_words: focal_words.to_vec(),
        scores,
        skipped,
    })
}
