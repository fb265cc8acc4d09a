//! Per-word measures of how differently two corpora use a word.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::align::{mistranslation_set, AlignedPair};
use crate::corpus::CoocMatrix;
use crate::linalg::{dot, norm, svd, Matrix};
use crate::{Error, Result};

/// `1 − cos(first[i], second[i])`
pub fn cosine_distance(pair: &AlignedPair, i: usize) -> f64 {
    let a = pair.first.row(i);
    let b = pair.second.row(i);
    let d = norm(a) * norm(b);
    if d == 0.0 {
        return 1.0;
    }
    (1.0 - dot(a, b) / d).clamp(0.0, 2.0)
}

/// Row-normalized copy; zero rows stay zero.
fn unit_rows(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let n = norm(row);
        if n > 0.0 {
            row.iter_mut().for_each(|x| *x /= n);
        }
    }
    out
}

/// The `k` rows most cosine-similar to row `i` of a unit-row matrix,
/// excluding `i`; ties go to the lower index.
pub fn nearest_neighbors(unit: &Matrix, i: usize, k: usize) -> Vec<usize> {
    let q = unit.row(i);
    let mut sims: Vec<(f64, usize)> = unit
        .row_iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, r)| (dot(q, r), j))
        .collect();
    let by_rank = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    let k = k.min(sims.len());
    if k == 0 {
        return Vec::new();
    }
    if k < sims.len() {
        sims.select_nth_unstable_by(k - 1, by_rank);
        sims.truncate(k);
    }
    sims.sort_by(by_rank);
    sims.into_iter().map(|(_, j)| j).collect()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 1 || k >= n {
        return Err(Error::param("k", alloc::format!("must satisfy 1 <= k < {n}")));
    }
    Ok(())
}

/// `1 − |kNN₁(i) ∩ kNN₂(i)| / k`, with neighborhoods taken in each
/// (unaligned) space separately.
pub fn knn_overlap_distance(e1: &Matrix, e2: &Matrix, i: usize, k: usize) -> Result<f64> {
    if e1.rows() != e2.rows() {
        return Err(Error::ShapeMismatch("embeddings cover different vocabularies".into()));
    }
    check_k(k, e1.rows())?;
    let (u1, u2) = (unit_rows(e1), unit_rows(e2));
    Ok(knn_overlap_unit(&u1, &u2, i, k))
}

fn knn_overlap_unit(u1: &Matrix, u2: &Matrix, i: usize, k: usize) -> f64 {
    let mut a = nearest_neighbors(u1, i, k);
    let b = nearest_neighbors(u2, i, k);
    a.sort_unstable();
    let shared = b.iter().filter(|j| a.binary_search(j).is_ok()).count();
    1.0 - shared as f64 / k as f64
}

/// kNN overlap distance for every word.
pub fn knn_overlap_all(e1: &Matrix, e2: &Matrix, k: usize) -> Result<Vec<f64>> {
    if e1.rows() != e2.rows() {
        return Err(Error::ShapeMismatch("embeddings cover different vocabularies".into()));
    }
    check_k(k, e1.rows())?;
    let (u1, u2) = (unit_rows(e1), unit_rows(e2));
    Ok((0..e1.rows()).map(|i| knn_overlap_unit(&u1, &u2, i, k)).collect())
}

/// Absolute score of each word on the first principal direction of the
/// offsets `O = first − second`, i.e. `|(U S)[i, 0]|` for `O = U S Vᵀ`.
///
/// Offsets are not centered unless `center` is set.
pub fn offset_pca_scores(pair: &AlignedPair, center: bool) -> Result<Vec<f64>> {
    let mut o = pair.first.sub(&pair.second)?;
    if center {
        let n = o.rows() as f64;
        let means: Vec<f64> = (0..o.cols()).map(|c| o.column(c).iter().sum::<f64>() / n).collect();
        for r in 0..o.rows() {
            for (x, m) in o.row_mut(r).iter_mut().zip(&means) {
                *x -= m;
            }
        }
    }
    // The right singular vectors of O are those of the small Gram matrix.
    let gram = o.t_matmul(&o)?;
    let d = svd(&gram)?;
    let v1 = d.v.column(0);
    Ok(o.row_iter().map(|r| libm::fabs(dot(r, &v1))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Objective level above which a plateaued run is flagged.
    pub plateau_threshold: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 1e-4,
            epochs: 20,
            seed: 1,
            plateau_threshold: 0.5,
        }
    }
}

/// Linear soft-margin separator between the two aligned spaces, trained by
/// Pegasos subgradient descent. The bias is learned as the weight of a
/// constant feature.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSeparator {
    pub normal: Vec<f64>,
    pub bias: f64,
    /// Regularized hinge objective after each epoch.
    pub objective_trace: Vec<f64>,
    /// Training stalled with the objective above the threshold.
    pub plateau_warning: bool,
}

impl LinearSeparator {
    /// Fits on the `2N` rows, labeling corpus 1 as `+1` and corpus 2 as `−1`.
    pub fn fit(pair: &AlignedPair, config: &SvmConfig) -> Result<LinearSeparator> {
        if config.lambda.is_nan() || config.lambda <= 0.0 || config.epochs < 1 {
            return Err(Error::param("svm", "lambda must be positive and epochs at least 1"));
        }
        let n = pair.n_words();
        let d = pair.dim();
        let sample = |k: usize| -> (&[f64], f64) {
            if k < n {
                (pair.first.row(k), 1.0)
            } else {
                (pair.second.row(k - n), -1.0)
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut order: Vec<usize> = (0..2 * n).collect();
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let radius = 1.0 / libm::sqrt(config.lambda);
        let mut t = 0u64;
        let mut trace = Vec::with_capacity(config.epochs);
        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            for &k in &order {
                t += 1;
                let eta = 1.0 / (config.lambda * t as f64);
                let (x, y) = sample(k);
                let margin = y * (dot(&w, x) + b);
                let shrink = 1.0 - eta * config.lambda;
                w.iter_mut().for_each(|v| *v *= shrink);
                b *= shrink;
                if margin < 1.0 {
                    for (v, xi) in w.iter_mut().zip(x) {
                        *v += eta * y * xi;
                    }
                    b += eta * y;
                }
                let len = libm::sqrt(dot(&w, &w) + b * b);
                if len > radius {
                    let s = radius / len;
                    w.iter_mut().for_each(|v| *v *= s);
                    b *= s;
                }
            }
            let hinge: f64 = (0..2 * n)
                .map(|k| {
                    let (x, y) = sample(k);
                    (1.0 - y * (dot(&w, x) + b)).max(0.0)
                })
                .sum::<f64>()
                / (2 * n) as f64;
            trace.push(0.5 * config.lambda * (dot(&w, &w) + b * b) + hinge);
        }
        let last = *trace.last().expect("at least one epoch");
        let lookback = trace.len().saturating_sub(6);
        let stalled = libm::fabs(trace[lookback] - last) <= 0.01 * libm::fabs(trace[lookback]);
        Ok(LinearSeparator {
            normal: w,
            bias: b,
            plateau_warning: stalled && last > config.plateau_threshold,
            objective_trace: trace,
        })
    }

    /// Euclidean distance from `x` to the hyperplane.
    pub fn point_distance(&self, x: &[f64]) -> f64 {
        let n = norm(&self.normal);
        if n == 0.0 {
            return 0.0;
        }
        libm::fabs(dot(&self.normal, x) + self.bias) / n
    }

    /// Sum of the distances of a word's two aligned embeddings.
    pub fn distance(&self, pair: &AlignedPair, i: usize) -> f64 {
        self.point_distance(pair.first.row(i)) + self.point_distance(pair.second.row(i))
    }
}

/// `C_ij · N_c / (Σ_h C_ih · Σ_h C_hj)`; above 1 exactly when PMI is
/// positive. Zero when the pair never co-occurs.
pub fn excess_cooccurrence(cooc: &CoocMatrix, i: usize, j: usize) -> f64 {
    let c = cooc.get(i, j);
    if c == 0.0 {
        return 0.0;
    }
    c * cooc.total() / (cooc.row_sum(i) * cooc.row_sum(j))
}

/// Words co-occurring in excess with a focal word in exactly one corpus.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HighCooccurrence {
    /// Excess in corpus 1 only.
    pub first: Vec<usize>,
    /// Excess in corpus 2 only.
    pub second: Vec<usize>,
}

/// Builds both sets for `focal`, skipping the focal word itself. Only words
/// stored in either co-occurrence row are visited.
pub fn high_cooccurrence_sets(cooc1: &CoocMatrix, cooc2: &CoocMatrix, focal: usize) -> HighCooccurrence {
    let mut candidates: Vec<usize> = cooc1.row(focal).chain(cooc2.row(focal)).map(|(j, _)| j).collect();
    candidates.sort_unstable();
    candidates.dedup();
    let mut out = HighCooccurrence::default();
    for j in candidates {
        if j == focal {
            continue;
        }
        let e1 = excess_cooccurrence(cooc1, focal, j);
        let e2 = excess_cooccurrence(cooc2, focal, j);
        if e1 > 1.0 && e2 <= 1.0 {
            out.first.push(j);
        } else if e2 > 1.0 && e1 <= 1.0 {
            out.second.push(j);
        }
    }
    out
}

/// Mean diagonal projection `(α¹_j + α²_j)/2` of a word set onto the unit
/// offset.
fn mean_diagonal_projection(pair: &AlignedPair, unit_offset: &[f64], words: &[usize]) -> f64 {
    let sum: f64 = words
        .iter()
        .map(|&j| (dot(pair.first.row(j), unit_offset) + dot(pair.second.row(j), unit_offset)) / 2.0)
        .sum();
    sum / words.len() as f64
}

/// Unit offset of a focal word, or an error if it is embedded identically.
pub(crate) fn unit_offset(pair: &AlignedPair, focal: usize) -> Result<(Vec<f64>, f64)> {
    let o = pair.offset(focal);
    let n = norm(&o);
    if n <= 1e-12 {
        return Err(Error::ZeroOffset { word: focal });
    }
    Ok((o.iter().map(|x| x / n).collect(), n))
}

/// Sense separation: mean diagonal projection of the corpus-1-only excess
/// set minus that of the corpus-2-only set. `None` when either set is empty.
pub fn sense_separation(
    pair: &AlignedPair,
    cooc1: &CoocMatrix,
    cooc2: &CoocMatrix,
    focal: usize,
) -> Result<Option<f64>> {
    let (u, _) = unit_offset(pair, focal)?;
    let hc = high_cooccurrence_sets(cooc1, cooc2, focal);
    if hc.first.is_empty() || hc.second.is_empty() {
        return Ok(None);
    }
    Ok(Some(
        mean_diagonal_projection(pair, &u, &hc.first) - mean_diagonal_projection(pair, &u, &hc.second),
    ))
}

/// Ranks starting at 1; tied values share the average of their ranks.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch("correlated series differ in length".into()));
    }
    if x.len() < 2 {
        return Err(Error::param("series", "need at least two observations"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation with average ranks for ties.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::param("series", "contains NaN"));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Measure {
    CosineDistance,
    KnnOverlap,
    OffsetPca,
    SvmDistance,
    SenseSeparation,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::CosineDistance,
        Measure::SvmDistance,
        Measure::OffsetPca,
        Measure::KnnOverlap,
        Measure::SenseSeparation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::CosineDistance => "cosine_distance",
            Measure::KnnOverlap => "knn_overlap",
            Measure::OffsetPca => "offset_pca",
            Measure::SvmDistance => "svm_distance",
            Measure::SenseSeparation => "sense_separation",
        }
    }

    pub fn from_name(s: &str) -> Option<Measure> {
        Measure::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureRow {
    pub cosine_distance: f64,
    pub knn_overlap: f64,
    pub offset_pca: f64,
    pub svm_distance: f64,
    /// `None` when a high co-occurrence set is empty or the offset is zero.
    pub sense_separation: Option<f64>,
    pub mistranslates: bool,
}

impl MeasureRow {
    pub fn get(&self, m: Measure) -> Option<f64> {
        match m {
            Measure::CosineDistance => Some(self.cosine_distance),
            Measure::KnnOverlap => Some(self.knn_overlap),
            Measure::OffsetPca => Some(self.offset_pca),
            Measure::SvmDistance => Some(self.svm_distance),
            Measure::SenseSeparation => self.sense_separation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasureConfig {
    /// Neighborhood size for the kNN overlap.
    pub k: usize,
    pub svm: SvmConfig,
    pub center_offsets: bool,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            k: 30,
            svm: SvmConfig::default(),
            center_offsets: false,
        }
    }
}

/// All measures for every vocabulary word, row `i` for word `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTable {
    pub rows: Vec<MeasureRow>,
    pub svm_plateau_warning: bool,
}

impl MeasureTable {
    pub fn column(&self, m: Measure) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.get(m)).collect()
    }

    /// Words with a defined value, ordered by descending value (or
    /// descending magnitude), ties by index.
    pub fn ranking(&self, m: Measure, absolute: bool) -> Vec<usize> {
        let key = |v: f64| if absolute { libm::fabs(v) } else { v };
        let mut words: Vec<(usize, f64)> = self
            .rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.get(m).map(|v| (i, key(v))))
            .collect();
        words.sort_by(|a, b| match b.1.total_cmp(&a.1) {
            Ordering::Equal => a.0.cmp(&b.0),
            o => o,
        });
        words.into_iter().map(|(i, _)| i).collect()
    }
}

/// Sense separation for every word, mapping zero offsets to `None`.
pub fn sense_separation_all(pair: &AlignedPair, cooc1: &CoocMatrix, cooc2: &CoocMatrix) -> Result<Vec<Option<f64>>> {
    (0..pair.n_words())
        .map(|i| match sense_separation(pair, cooc1, cooc2, i) {
            Err(Error::ZeroOffset { .. }) => Ok(None),
            other => other,
        })
        .collect()
}

/// Computes the full table. `unaligned` are the embeddings before alignment,
/// used by the kNN overlap.
pub fn measure_table(
    pair: &AlignedPair,
    unaligned: (&Matrix, &Matrix),
    cooc1: &CoocMatrix,
    cooc2: &CoocMatrix,
    config: &MeasureConfig,
) -> Result<MeasureTable> {
    let n = pair.n_words();
    if cooc1.n_words() != n || cooc2.n_words() != n || unaligned.0.rows() != n || unaligned.1.rows() != n {
        return Err(Error::ShapeMismatch("measure inputs cover different vocabularies".into()));
    }
    let knn = knn_overlap_all(unaligned.0, unaligned.1, config.k)?;
    let pca = offset_pca_scores(pair, config.center_offsets)?;
    let svm = LinearSeparator::fit(pair, &config.svm)?;
    let sense = sense_separation_all(pair, cooc1, cooc2)?;
    let mistranslated = mistranslation_set(pair);
    Ok(assemble(pair, &knn, &pca, &svm, &sense, &mistranslated))
}

/// Combines separately computed per-word columns into a table.
pub fn assemble(
    pair: &AlignedPair,
    knn: &[f64],
    offset_pca: &[f64],
    svm: &LinearSeparator,
    sense: &[Option<f64>],
    mistranslated: &[usize],
) -> MeasureTable {
    let mut flags = vec![false; pair.n_words()];
    for &i in mistranslated {
        flags[i] = true;
    }
    let rows = (0..pair.n_words())
        .map(|i| MeasureRow {
            cosine_distance: cosine_distance(pair, i),
            knn_overlap: knn[i],
            offset_pca: offset_pca[i],
            svm_distance: svm.distance(pair, i),
            sense_separation: sense[i],
            mistranslates: flags[i],
        })
        .collect();
    MeasureTable {
        rows,
        svm_plateau_warning: svm.plateau_warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::AlignMethod;

    fn pair_of(a: &[[f64; 2]], b: &[[f64; 2]]) -> AlignedPair {
        AlignedPair::from_aligned(
            &Matrix::from_rows(a).unwrap(),
            &Matrix::from_rows(b).unwrap(),
            AlignMethod::Procrustes,
        )
        .unwrap()
    }

    #[test]
    fn cosine_distance_extremes() {
        let p = pair_of(&[[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]], &[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]);
        assert_eq!(cosine_distance(&p, 0), 0.0);
        assert!((cosine_distance(&p, 1) - 1.0).abs() < 1e-15);
        assert_eq!(cosine_distance(&p, 2), 2.0);
    }

    #[test]
    fn knn_identical_and_disjoint() {
        // Two clusters of three; in the second space the clusters trade
        // members so word 0's neighbors are disjoint.
        let e1 = Matrix::from_rows(&[[1.0, 0.0], [0.99, 0.1], [0.98, 0.2], [0.0, 1.0], [0.1, 0.99], [0.2, 0.98]]).unwrap();
        for i in 0..6 {
            assert_eq!(knn_overlap_distance(&e1, &e1, i, 2).unwrap(), 0.0);
        }
        let e2 = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.1, 0.99], [0.99, 0.1], [0.98, 0.2], [0.2, 0.98]]).unwrap();
        assert_eq!(knn_overlap_distance(&e1, &e2, 0, 2).unwrap(), 1.0);
        assert!(knn_overlap_distance(&e1, &e2, 0, 6).is_err());
        assert!(knn_overlap_distance(&e1, &e2, 0, 0).is_err());
    }

    #[test]
    fn knn_one_shared_neighbor_by_enumeration() {
        // Angles in degrees; neighbors of word 0 (at 0°):
        // space 1: 10°, 20°  -> {1, 2};  space 2: word 1 at 5°, word 3 at 15° -> {1, 3}.
        let deg = |d: f64| [libm::cos(d.to_radians()), libm::sin(d.to_radians())];
        let e1 = Matrix::from_rows(&[deg(0.0), deg(10.0), deg(20.0), deg(90.0), deg(180.0)]).unwrap();
        let e2 = Matrix::from_rows(&[deg(0.0), deg(5.0), deg(120.0), deg(15.0), deg(180.0)]).unwrap();
        assert_eq!(knn_overlap_distance(&e1, &e2, 0, 2).unwrap(), 0.5);
    }

    #[test]
    fn offset_pca_zero_and_rank_one() {
        let p = pair_of(&[[1.0, 0.0], [0.0, 1.0]], &[[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(offset_pca_scores(&p, false).unwrap(), vec![0.0, 0.0]);

        // Offsets ±c·u along u = (1,0): first − second = (2,0) and (−1,0)
        // after normalization when rows are (1,0) vs (−1,0), etc.
        let p = pair_of(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]], &[[-1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let s = offset_pca_scores(&p, false).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-12);
        assert!((s[1] - 2.0).abs() < 1e-12);
        assert!(s[2].abs() < 1e-12);
    }

    #[test]
    fn svm_symmetric_instance() {
        // Rows at (±0.6, 0.8) against their negations: the max-margin
        // hyperplane is y = 0 and each row is 0.8 away from it.
        let p = pair_of(&[[0.6, 0.8], [-0.6, 0.8]], &[[-0.6, -0.8], [0.6, -0.8]]);
        // The instance is symmetric under negating every point together
        // with its label, so the regularized optimum has zero bias and a
        // vertical normal for any lambda.
        let cfg = SvmConfig {
            lambda: 1e-2,
            epochs: 2000,
            ..SvmConfig::default()
        };
        let svm = LinearSeparator::fit(&p, &cfg).unwrap();
        for i in 0..2 {
            let d1 = svm.point_distance(p.first.row(i));
            let d2 = svm.point_distance(p.second.row(i));
            let d = svm.distance(&p, i);
            // |h·x + b| + |h·x − b| = 2|h·x| whenever |b| ≤ |h·x|.
            let hx = dot(&svm.normal, p.first.row(i)).abs() / norm(&svm.normal);
            assert!((d - 2.0 * hx).abs() < 1e-9);
            assert!((d - 1.6).abs() < 1e-2, "d = {d}, {d1} + {d2}");
        }
        assert!(!svm.plateau_warning);
    }

    #[test]
    fn svm_point_on_hyperplane_and_homogeneity() {
        let sep = LinearSeparator {
            normal: vec![3.0, 4.0],
            bias: -5.0,
            objective_trace: vec![],
            plateau_warning: false,
        };
        assert_eq!(sep.point_distance(&[1.0, 0.5]), 0.0);
        let x = [2.0, -1.0];
        let c = 3.5;
        let scaled = LinearSeparator {
            bias: sep.bias * c,
            ..sep.clone()
        };
        let d = sep.point_distance(&x);
        let dc = scaled.point_distance(&[x[0] * c, x[1] * c]);
        assert!((dc - c * d).abs() < 1e-12);
    }

    #[test]
    fn excess_cooccurrence_cases() {
        // Independence: C_ij = r_i r_j / N with r = (1, 2), N = 3.
        let m = CoocMatrix::from_upper_triplets(2, vec![(0, 0, 1.0 / 3.0), (0, 1, 2.0 / 3.0), (1, 1, 4.0 / 3.0)]).unwrap();
        assert!((excess_cooccurrence(&m, 0, 1) - 1.0).abs() < 1e-15);
        let m = CoocMatrix::from_upper_triplets(3, vec![(0, 1, 2.0), (1, 2, 3.0)]).unwrap();
        assert_eq!(excess_cooccurrence(&m, 0, 2), 0.0);
        // rows: 0 -> 2, 1 -> 5, 2 -> 3; total 10.
        assert!((excess_cooccurrence(&m, 0, 1) - 2.0 * 10.0 / (2.0 * 5.0)).abs() < 1e-12);
    }

    #[test]
    fn sense_separation_symmetric_sets() {
        // Focal 0 offset along x. Word 1 excess only in corpus 1 and sits at
        // +m on the diagonal, word 2 only in corpus 2 at −m.
        let m = 0.6;
        let y = libm::sqrt(1.0 - m * m);
        let p = pair_of(
            &[[1.0, 0.0], [m, y], [-m, y], [0.0, 1.0]],
            &[[-1.0, 0.0], [m, y], [-m, y], [0.0, 1.0]],
        );
        let c1 = CoocMatrix::from_upper_triplets(4, vec![(0, 1, 5.0), (2, 3, 5.0), (0, 3, 1.0), (1, 2, 1.0)]).unwrap();
        let c2 = CoocMatrix::from_upper_triplets(4, vec![(0, 2, 5.0), (1, 3, 5.0), (0, 3, 1.0), (1, 2, 1.0)]).unwrap();
        let hc = high_cooccurrence_sets(&c1, &c2, 0);
        assert_eq!(hc.first, vec![1]);
        assert_eq!(hc.second, vec![2]);
        let s = sense_separation(&p, &c1, &c2, 0).unwrap().unwrap();
        assert!((s - 2.0 * m).abs() < 1e-12);
    }

    #[test]
    fn sense_separation_sentinel_and_zero_offset() {
        let p = pair_of(&[[1.0, 0.0], [0.0, 1.0]], &[[0.0, 1.0], [0.0, 1.0]]);
        let c = CoocMatrix::from_upper_triplets(2, vec![(0, 1, 1.0)]).unwrap();
        assert_eq!(sense_separation(&p, &c, &c, 0).unwrap(), None);
        assert_eq!(sense_separation(&p, &c, &c, 1), Err(Error::ZeroOffset { word: 1 }));
        assert_eq!(sense_separation_all(&p, &c, &c).unwrap(), vec![None, None]);
    }

    #[test]
    fn spearman_basics() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((spearman_rho(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((spearman_rho(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(spearman_rho(&x, &[1.0; 5]), Err(Error::UndefinedCorrelation));
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn spearman_with_ties_by_hand() {
        // ranks x = [1, 2.5, 2.5, 4], ranks y = [1, 2, 3, 4];
        // deviations from 2.5: x = [-1.5, 0, 0, 1.5], y = [-1.5, -.5, .5, 1.5]
        // sxy = 4.5, sxx = 4.5, syy = 5  =>  rho = 4.5 / sqrt(22.5)
        let r = spearman_rho(&[1.0, 2.0, 2.0, 4.0], &[10.0, 20.0, 30.0, 40.0]).unwrap();
        assert!((r - 4.5 / libm::sqrt(22.5)).abs() < 1e-12);
    }

    #[test]
    fn ranking_skips_sentinels() {
        let row = |c: f64, s: Option<f64>| MeasureRow {
            cosine_distance: c,
            knn_overlap: 0.0,
            offset_pca: 0.0,
            svm_distance: 0.0,
            sense_separation: s,
            mistranslates: false,
        };
        let t = MeasureTable {
            rows: vec![row(0.1, Some(-0.9)), row(0.5, None), row(0.5, Some(0.3))],
            svm_plateau_warning: false,
        };
        assert_eq!(t.ranking(Measure::CosineDistance, false), vec![1, 2, 0]);
        assert_eq!(t.ranking(Measure::SenseSeparation, false), vec![2, 0]);
        assert_eq!(t.ranking(Measure::SenseSeparation, true), vec![0, 2]);
    }
}
