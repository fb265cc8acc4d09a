//! Corpora, the shared vocabulary and windowed co-occurrence counts.
//!
//! Co-occurrence weights are accumulated as integers in units of
//! `1 / lcm(1..=window)`, so every harmonic weight `1/d` is represented
//! exactly. Summation is then associative, which makes the resulting matrix
//! independent of document order and of how documents are sharded across
//! workers.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use crate::{Error, Result};

/// Tokenized documents from one community.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    /// Which side of the comparison this corpus is (1 or 2).
    pub label: u8,
    pub documents: Vec<Vec<String>>,
}

impl Corpus {
    pub fn new(label: u8, documents: Vec<Vec<String>>) -> Self {
        Corpus { label, documents }
    }

    pub fn doc_count(&self) -> usize {
        self.documents.len()
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }

    /// Occurrence count of every token type.
    pub fn token_counts(&self) -> HashMap<&str, u64> {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in &self.documents {
            for tok in doc {
                *counts.entry(tok.as_str()).or_insert(0) += 1;
            }
        }
        counts
    }
}

/// Drops every document that is an exact repeat of an earlier one.
pub fn dedup_documents(corpus: Corpus) -> Corpus {
    let mut seen: HashSet<Vec<String>> = HashSet::with_capacity(corpus.documents.len());
    let documents = corpus
        .documents
        .into_iter()
        .filter(|doc| seen.insert(doc.clone()))
        .collect();
    Corpus {
        label: corpus.label,
        documents,
    }
}

/// Words that occur at least `min_count` times in both corpora.
///
/// Tokens are ordered by descending mean count, ties broken
/// lexicographically, so index 0 is the most frequent word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts1: Vec<u64>,
    counts2: Vec<u64>,
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn build(c1: &Corpus, c2: &Corpus, min_count: u64) -> Result<Vocabulary> {
        if min_count < 1 {
            return Err(Error::param("min_count", "must be at least 1"));
        }
        let n1 = c1.token_counts();
        let n2 = c2.token_counts();
        let entries = n1
            .iter()
            .filter_map(|(tok, &a)| {
                let b = *n2.get(tok)?;
                (a >= min_count && b >= min_count).then(|| (String::from(*tok), a, b))
            })
            .collect();
        Vocabulary::from_counts(entries)
    }

    /// Builds a vocabulary from `(token, count1, count2)` triples, imposing
    /// the canonical order.
    pub fn from_counts(mut entries: Vec<(String, u64, u64)>) -> Result<Vocabulary> {
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        entries.sort_by(|a, b| (b.1 + b.2).cmp(&(a.1 + a.2)).then_with(|| a.0.cmp(&b.0)));
        let mut index = BTreeMap::new();
        for (i, (tok, _, _)) in entries.iter().enumerate() {
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                return Err(Error::param("vocabulary", alloc::format!("invalid token {tok:?}")));
            }
            if index.insert(tok.clone(), i).is_some() {
                return Err(Error::param("vocabulary", alloc::format!("duplicate token {tok:?}")));
            }
        }
        let mut tokens = Vec::with_capacity(entries.len());
        let mut counts1 = Vec::with_capacity(entries.len());
        let mut counts2 = Vec::with_capacity(entries.len());
        for (t, a, b) in entries {
            tokens.push(t);
            counts1.push(a);
            counts2.push(b);
        }
        Ok(Vocabulary {
            tokens,
            counts1,
            counts2,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn count1(&self, i: usize) -> u64 {
        self.counts1[i]
    }

    pub fn count2(&self, i: usize) -> u64 {
        self.counts2[i]
    }

    pub fn counts(&self, corpus: u8) -> &[u64] {
        if corpus == 2 {
            &self.counts2
        } else {
            &self.counts1
        }
    }

    pub fn mean_count(&self, i: usize) -> f64 {
        (self.counts1[i] + self.counts2[i]) as f64 / 2.0
    }

    /// `ln` of each word's count in one corpus.
    pub fn log_counts(&self, corpus: u8) -> Vec<f64> {
        self.counts(corpus).iter().map(|&c| libm::log(c as f64)).collect()
    }

    pub fn log_mean_frequency(&self) -> Vec<f64> {
        (0..self.len()).map(|i| libm::log(self.mean_count(i))).collect()
    }

    /// Indices of the `n` most frequent words by mean count.
    pub fn most_frequent(&self, n: usize) -> core::ops::Range<usize> {
        0..n.min(self.len())
    }

    /// Maps a document to vocabulary indices, `None` for unknown tokens.
    pub fn encode(&self, doc: &[String]) -> Vec<Option<u32>> {
        doc.iter()
            .map(|t| self.index_of(t).map(|i| i as u32))
            .collect()
    }

    /// Vocabulary tokens that sort closest to `token`, for error messages.
    pub fn nearest_tokens(&self, token: &str, n: usize) -> Vec<&str> {
        use core::ops::Bound;
        let after = self.index.range::<str, _>((Bound::Included(token), Bound::Unbounded)).take(n);
        let before = self.index.range::<str, _>((Bound::Unbounded, Bound::Excluded(token))).rev().take(n);
        let mut out: Vec<&str> = before.chain(after).map(|(t, _)| t.as_str()).collect();
        out.sort_by_key(|t| common_prefix(t, token));
        out.reverse();
        out.truncate(n);
        out
    }
}

fn common_prefix(a: &str, b: &str) -> usize {
    a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoocConfig {
    /// Maximum positional distance on each side of a token.
    pub window: usize,
    /// Weight pairs by `1/d` instead of 1.
    pub distance_weighting: bool,
}

impl Default for CoocConfig {
    fn default() -> Self {
        CoocConfig {
            window: 10,
            distance_weighting: true,
        }
    }
}

/// Largest harmonic window whose common denominator keeps ample headroom in
/// a `u64` accumulator.
pub const MAX_HARMONIC_WINDOW: usize = 24;

impl CoocConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::param("window", "must be at least 1"));
        }
        if self.distance_weighting && self.window > MAX_HARMONIC_WINDOW {
            return Err(Error::param(
                "window",
                alloc::format!("harmonic weighting supports windows up to {MAX_HARMONIC_WINDOW}"),
            ));
        }
        Ok(())
    }

    /// Common denominator of all weights: `lcm(1..=window)`, or 1 when
    /// unweighted.
    fn scale(&self) -> u64 {
        if !self.distance_weighting {
            return 1;
        }
        (1..=self.window as u64).fold(1, |acc, d| acc / gcd(acc, d) * d)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact accumulator for one shard of documents.
#[derive(Debug, Clone)]
pub struct CoocCounter {
    n_words: usize,
    config: CoocConfig,
    scale: u64,
    /// Keyed by `(min, max)`; the value is the weight of one direction.
    counts: HashMap<(u32, u32), u64>,
}

impl CoocCounter {
    pub fn new(n_words: usize, config: CoocConfig) -> Result<Self> {
        config.validate()?;
        Ok(CoocCounter {
            n_words,
            config,
            scale: config.scale(),
            counts: HashMap::new(),
        })
    }

    /// Counts one encoded document. Unknown tokens (`None`) still occupy
    /// positions, so they count toward distances.
    pub fn add_document(&mut self, ids: &[Option<u32>]) -> Result<()> {
        let window = self.config.window;
        for (p, a) in ids.iter().enumerate() {
            let Some(a) = *a else { continue };
            for d in 1..=window {
                let Some(Some(b)) = ids.get(p + d) else {
                    continue;
                };
                let w = self.scale / if self.config.distance_weighting { d as u64 } else { 1 };
                let key = if a <= *b { (a, *b) } else { (*b, a) };
                let slot = self.counts.entry(key).or_insert(0);
                *slot = slot.checked_add(w).ok_or(Error::CountOverflow)?;
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: CoocCounter) -> Result<()> {
        if other.n_words != self.n_words || other.config != self.config {
            return Err(Error::ShapeMismatch("merging counters with different settings".into()));
        }
        for (k, v) in other.counts {
            let slot = self.counts.entry(k).or_insert(0);
            *slot = slot.checked_add(v).ok_or(Error::CountOverflow)?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<CoocMatrix> {
        let scale = self.scale as f64;
        let mut triplets = Vec::with_capacity(self.counts.len());
        for ((i, j), v) in self.counts {
            // A self pair lands on (i,i) from both directions.
            let units = if i == j {
                v.checked_mul(2).ok_or(Error::CountOverflow)?
            } else {
                v
            };
            triplets.push((i as usize, j as usize, units as f64 / scale));
        }
        CoocMatrix::from_upper_triplets(self.n_words, triplets)
    }
}

/// Counts windowed co-occurrences of vocabulary words within documents.
pub fn count_cooccurrences(corpus: &Corpus, vocab: &Vocabulary, config: CoocConfig) -> Result<CoocMatrix> {
    let mut counter = CoocCounter::new(vocab.len(), config)?;
    for doc in &corpus.documents {
        counter.add_document(&vocab.encode(doc))?;
    }
    counter.finish()
}

/// Sparse symmetric co-occurrence weights in compressed row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CoocMatrix {
    n_words: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<f64>,
    row_sums: Vec<f64>,
    total: f64,
}

impl CoocMatrix {
    /// Builds the symmetric matrix from upper-triangle entries `(i, j, w)`
    /// with `i <= j`. Duplicate coordinates are rejected.
    pub fn from_upper_triplets(n_words: usize, triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut full: Vec<(u32, u32, f64)> = Vec::with_capacity(triplets.len() * 2);
        for (i, j, w) in triplets {
            if i > j {
                return Err(Error::param("cooc", alloc::format!("entry ({i},{j}) is below the diagonal")));
            }
            if j >= n_words {
                return Err(Error::param("cooc", alloc::format!("index {j} outside vocabulary of {n_words}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::param("cooc", alloc::format!("entry ({i},{j}) has weight {w}")));
            }
            full.push((i as u32, j as u32, w));
            if i != j {
                full.push((j as u32, i as u32, w));
            }
        }
        full.sort_unstable_by_key(|&(i, j, _)| (i, j));
        if full.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::param("cooc", "duplicate entry"));
        }
        let mut row_ptr = alloc::vec![0usize; n_words + 1];
        for &(i, _, _) in &full {
            row_ptr[i as usize + 1] += 1;
        }
        for r in 0..n_words {
            row_ptr[r + 1] += row_ptr[r];
        }
        let cols: Vec<u32> = full.iter().map(|e| e.1).collect();
        let weights: Vec<f64> = full.iter().map(|e| e.2).collect();
        let row_sums: Vec<f64> = (0..n_words)
            .map(|r| weights[row_ptr[r]..row_ptr[r + 1]].iter().sum())
            .collect();
        let total = row_sums.iter().sum();
        Ok(CoocMatrix {
            n_words,
            row_ptr,
            cols,
            weights,
            row_sums,
            total,
        })
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    /// Number of stored entries, counting both directions.
    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row_sums[i]
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[lo..hi].binary_search(&(j as u32)) {
            Ok(k) => self.weights[lo + k],
            Err(_) => 0.0,
        }
    }

    /// Stored `(j, weight)` entries of row `i`, in column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi]
            .iter()
            .zip(&self.weights[lo..hi])
            .map(|(&j, &w)| (j as usize, w))
    }

    /// All stored `(i, j, weight)` entries, both directions.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_words).flat_map(move |i| self.row(i).map(move |(j, w)| (i, j, w)))
    }

    /// Entries with `i <= j`, the on-disk representation.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries().filter(|&(i, j, _)| i <= j)
    }
}

/// Fraction of the vocabulary each word co-occurs with at all.
pub fn cooc_share(cooc: &CoocMatrix) -> Vec<f64> {
    let n = cooc.n_words() as f64;
    (0..cooc.n_words())
        .map(|i| cooc.row(i).filter(|&(_, w)| w > 0.0).count() as f64 / n)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn doc(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    fn corpus(docs: &[&str]) -> Corpus {
        Corpus::new(1, docs.iter().map(|d| doc(d)).collect())
    }

    fn vocab_of(tokens: &[&str]) -> Vocabulary {
        Vocabulary::from_counts(tokens.iter().map(|t| (String::from(*t), 1, 1)).collect()).unwrap()
    }

    #[test]
    fn dedup_keeps_first_occurrence() {
        let c = corpus(&["a b", "a b", "c"]);
        assert_eq!(dedup_documents(c).documents, vec![doc("a b"), doc("c")]);
        let c = corpus(&["a", "a a"]);
        assert_eq!(dedup_documents(c.clone()), c);
        let c = corpus(&["x y", "y x", "z"]);
        assert_eq!(dedup_documents(c.clone()), c);
    }

    #[test]
    fn vocabulary_intersects_min_counts() {
        let c1 = corpus(&["a a a a a b"]);
        let c2 = corpus(&["a a a b b b b b b b b b"]);
        let v = Vocabulary::build(&c1, &c2, 2).unwrap();
        assert_eq!(v.tokens(), &["a"]);
        assert_eq!((v.count1(0), v.count2(0)), (5, 3));
    }

    #[test]
    fn vocabulary_errors() {
        let c1 = corpus(&["a b"]);
        let c2 = corpus(&["c d"]);
        assert_eq!(Vocabulary::build(&c1, &c2, 1), Err(Error::EmptyVocabulary));
        assert!(Vocabulary::build(&c1, &c1, 0).is_err());
    }

    #[test]
    fn vocabulary_order_mean_count_then_lexicographic() {
        let v = Vocabulary::from_counts(vec![
            ("b".into(), 3, 3),
            ("a".into(), 5, 1),
            ("c".into(), 10, 10),
        ])
        .unwrap();
        assert_eq!(v.tokens(), &["c", "a", "b"]);
        assert_eq!(v.index_of("b"), Some(2));
        assert_eq!(v.most_frequent(2), 0..2);
    }

    #[test]
    fn adjacent_pair_weight_one() {
        let v = vocab_of(&["a", "b"]);
        let m = count_cooccurrences(&corpus(&["a b"]), &v, CoocConfig::default()).unwrap();
        let (a, b) = (v.index_of("a").unwrap(), v.index_of("b").unwrap());
        assert_eq!(m.get(a, b), 1.0);
        assert_eq!(m.get(b, a), 1.0);
        assert_eq!(m.total(), 2.0);
    }

    #[test]
    fn unknown_tokens_occupy_positions() {
        let v = vocab_of(&["a", "b"]);
        let m = count_cooccurrences(&corpus(&["a x b"]), &v, CoocConfig::default()).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
    }

    #[test]
    fn unweighted_window_one_by_enumeration() {
        // Pairs within distance 1 in "a b a": (a,b) and (b,a), nothing else.
        let v = vocab_of(&["a", "b"]);
        let cfg = CoocConfig {
            window: 1,
            distance_weighting: false,
        };
        let m = count_cooccurrences(&corpus(&["a b a"]), &v, cfg).unwrap();
        let (a, b) = (v.index_of("a").unwrap(), v.index_of("b").unwrap());
        assert_eq!(m.get(a, b), 2.0);
        assert_eq!(m.get(a, a), 0.0);
    }

    #[test]
    fn self_pairs_count_both_directions() {
        let v = vocab_of(&["a"]);
        let cfg = CoocConfig {
            window: 2,
            distance_weighting: true,
        };
        let m = count_cooccurrences(&corpus(&["a a"]), &v, cfg).unwrap();
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.total(), 2.0);
    }

    #[test]
    fn windows_do_not_cross_documents() {
        let v = vocab_of(&["a", "b"]);
        let m = count_cooccurrences(&corpus(&["a", "b"]), &v, CoocConfig::default()).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn harmonic_window_limit() {
        assert!(CoocCounter::new(
            3,
            CoocConfig {
                window: 25,
                distance_weighting: true
            }
        )
        .is_err());
        assert!(CoocCounter::new(
            3,
            CoocConfig {
                window: 25,
                distance_weighting: false
            }
        )
        .is_ok());
        assert!(CoocCounter::new(3, CoocConfig { window: 0, distance_weighting: false }).is_err());
    }

    #[test]
    fn share_counts_nonzero_row_entries() {
        let m = CoocMatrix::from_upper_triplets(3, vec![(0, 1, 2.0)]).unwrap();
        let s = cooc_share(&m);
        assert_eq!(s, vec![1.0 / 3.0, 1.0 / 3.0, 0.0]);
        let full = CoocMatrix::from_upper_triplets(3, vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(cooc_share(&full), vec![2.0 / 3.0; 3]);
    }

    #[test]
    fn rejects_bad_triplets() {
        assert!(CoocMatrix::from_upper_triplets(2, vec![(1, 0, 1.0)]).is_err());
        assert!(CoocMatrix::from_upper_triplets(2, vec![(0, 2, 1.0)]).is_err());
        assert!(CoocMatrix::from_upper_triplets(2, vec![(0, 1, 0.0)]).is_err());
        assert!(CoocMatrix::from_upper_triplets(2, vec![(0, 1, 1.0), (0, 1, 1.0)]).is_err());
    }

    #[test]
    fn nearest_tokens_suggestions() {
        let v = vocab_of(&["apple", "apply", "banana", "cherry"]);
        let near = v.nearest_tokens("appl", 2);
        assert_eq!(near.len(), 2);
        assert!(near.iter().all(|t| t.starts_with("appl")));
    }
}
