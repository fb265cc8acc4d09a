//! Frequency-direction removal, embedding-space alignment and translation.
//!
//! All three aligners map both embeddings into a shared space and
//! re-normalize the rows:
//!
//! * Procrustes, in its twofold form: with `E2ᵀE1 = U S Vᵀ`, the first space
//!   is mapped by `V` and the second by `U`. This is the single orthogonal map
//!   `W = U Vᵀ` from the second space onto the first, followed by the
//!   rotation `V` applied to both.
//! * CCA: both spaces are whitened by their own SVD and then rotated onto
//!   the singular vectors of `U2ᵀU1`, so shared dimensions are sorted by
//!   correlation.
//! * Unconstrained least squares, `argmin ‖E1 − E2 W‖_F`, kept as a baseline
//!   that distorts within-space geometry.

use alloc::vec::Vec;

use crate::glove::EmbeddingSet;
use crate::linalg::{dot, norm, svd, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AlignMethod {
    #[default]
    Procrustes,
    Cca,
    LeastSquares,
}

impl AlignMethod {
    pub fn name(self) -> &'static str {
        match self {
            AlignMethod::Procrustes => "procrustes",
            AlignMethod::Cca => "cca",
            AlignMethod::LeastSquares => "least_squares",
        }
    }
}

/// Two embeddings of the same vocabulary in a shared space.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub first: Matrix,
    pub second: Matrix,
    pub method: AlignMethod,
    /// Maps the first input space into the shared space.
    pub transform1: Matrix,
    /// Maps the second input space into the shared space.
    pub transform2: Matrix,
    /// `‖first − second‖_F`
    pub residual: f64,
}

impl AlignedPair {
    /// Builds a pair from already-aligned matrices, re-normalizing rows.
    pub fn from_aligned(first: &Matrix, second: &Matrix, method: AlignMethod) -> Result<AlignedPair> {
        if first.shape() != second.shape() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "aligned spaces {:?} vs {:?}",
                first.shape(),
                second.shape()
            )));
        }
        let d = first.cols();
        finish(first, second, method, Matrix::identity(d), Matrix::identity(d))
    }

    pub fn n_words(&self) -> usize {
        self.first.rows()
    }

    pub fn dim(&self) -> usize {
        self.first.cols()
    }

    /// The aligned matrix of corpus 1 or 2.
    pub fn space(&self, corpus: u8) -> &Matrix {
        if corpus == 2 {
            &self.second
        } else {
            &self.first
        }
    }

    /// Offset `first[i] − second[i]`.
    pub fn offset(&self, i: usize) -> Vec<f64> {
        self.first
            .row(i)
            .iter()
            .zip(self.second.row(i))
            .map(|(a, b)| a - b)
            .collect()
    }

    /// For a Procrustes pair, the orthogonal map `W = U Vᵀ` taking the second
    /// input space onto the first.
    pub fn second_to_first(&self) -> Result<Matrix> {
        self.transform2.matmul(&self.transform1.transpose())
    }
}

fn finish(
    mapped1: &Matrix,
    mapped2: &Matrix,
    method: AlignMethod,
    transform1: Matrix,
    transform2: Matrix,
) -> Result<AlignedPair> {
    let first = mapped1.normalized_rows()?;
    let second = mapped2.normalized_rows()?;
    let residual = first.sub(&second)?.frobenius_norm();
    Ok(AlignedPair {
        first,
        second,
        method,
        transform1,
        transform2,
        residual,
    })
}

/// The dominant log-frequency direction of one embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyAdjustment {
    /// Unit vector along `Eᵀf`.
    pub direction: Vec<f64>,
    /// `‖Eᵀf‖` before removal.
    pub removed_norm: f64,
}

impl FrequencyAdjustment {
    pub fn fit(e: &Matrix, log_freqs: &[f64]) -> Result<FrequencyAdjustment> {
        if log_freqs.len() != e.rows() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} frequencies for {} embedding rows",
                log_freqs.len(),
                e.rows()
            )));
        }
        if log_freqs.iter().any(|f| !f.is_finite()) {
            return Err(Error::param("log_freqs", "must be finite"));
        }
        let w = e.t_mul_vec(log_freqs);
        let n = norm(&w);
        if n < 1e-12 {
            return Err(Error::DegenerateDirection { norm: n });
        }
        Ok(FrequencyAdjustment {
            direction: w.iter().map(|x| x / n).collect(),
            removed_norm: n,
        })
    }

    /// Projects every row onto the orthogonal complement of the direction:
    /// `E (I − u uᵀ)`.
    pub fn apply(&self, e: &Matrix) -> Matrix {
        let u = &self.direction;
        let mut out = e.clone();
        for r in 0..out.rows() {
            let row = out.row_mut(r);
            let p = dot(row, u);
            for (x, ui) in row.iter_mut().zip(u) {
                *x -= p * ui;
            }
        }
        out
    }
}

/// Removes the log-frequency direction from an unaligned embedding.
pub fn frequency_adjust(e: &EmbeddingSet, log_freqs: &[f64]) -> Result<EmbeddingSet> {
    let adj = FrequencyAdjustment::fit(&e.matrix, log_freqs)?;
    Ok(EmbeddingSet::new(adj.apply(&e.matrix)))
}

fn check_pair(e1: &EmbeddingSet, e2: &EmbeddingSet) -> Result<()> {
    if e1.matrix.shape() != e2.matrix.shape() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "embeddings {:?} vs {:?}",
            e1.matrix.shape(),
            e2.matrix.shape()
        )));
    }
    if !e1.normalized || !e2.normalized {
        return Err(Error::param("embedding", "rows must be normalized before alignment"));
    }
    Ok(())
}

/// Factors of the Procrustes solution for `E1 ≈ E2 W`.
#[derive(Debug, Clone)]
pub struct ProcrustesFit {
    /// Left singular vectors of `E2ᵀE1`; maps the second space.
    pub u: Matrix,
    /// Right singular vectors of `E2ᵀE1`; maps the first space.
    pub v: Matrix,
    pub singular_values: Vec<f64>,
}

impl ProcrustesFit {
    /// `W = U Vᵀ`
    pub fn w(&self) -> Matrix {
        self.u.matmul(&self.v.transpose()).expect("square factors")
    }
}

pub fn procrustes_fit(e1: &Matrix, e2: &Matrix) -> Result<ProcrustesFit> {
    if e1.shape() != e2.shape() {
        return Err(Error::ShapeMismatch("procrustes inputs differ in shape".into()));
    }
    let m = e2.t_matmul(e1)?;
    let d = svd(&m)?;
    Ok(ProcrustesFit {
        u: d.u,
        v: d.v,
        singular_values: d.s,
    })
}

pub fn procrustes_align(e1: &EmbeddingSet, e2: &EmbeddingSet) -> Result<AlignedPair> {
    check_pair(e1, e2)?;
    let fit = procrustes_fit(&e1.matrix, &e2.matrix)?;
    let mapped1 = e1.matrix.matmul(&fit.v)?;
    let mapped2 = e2.matrix.matmul(&fit.u)?;
    finish(&mapped1, &mapped2, AlignMethod::Procrustes, fit.v, fit.u)
}

/// Smallest singular value accepted by the CCA and least-squares aligners.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// CCA transforms `(W1, W2)` and the canonical correlations.
pub fn cca_transforms(e1: &Matrix, e2: &Matrix) -> Result<(Matrix, Matrix, Vec<f64>)> {
    if e1.shape() != e2.shape() {
        return Err(Error::ShapeMismatch("cca inputs differ in shape".into()));
    }
    let d1 = svd(e1)?;
    let d2 = svd(e2)?;
    for &s in d1.s.iter().chain(&d2.s) {
        if s < RANK_TOLERANCE {
            return Err(Error::RankDeficient { singular_value: s });
        }
    }
    let inner = d2.u.t_matmul(&d1.u)?;
    let star = svd(&inner)?;
    let w1 = scale_columns_inv(&d1.v, &d1.s).matmul(&star.v)?;
    let w2 = scale_columns_inv(&d2.v, &d2.s).matmul(&star.u)?;
    Ok((w1, w2, star.s))
}

/// `V · S⁻¹`
fn scale_columns_inv(v: &Matrix, s: &[f64]) -> Matrix {
    let mut out = v.clone();
    for r in 0..out.rows() {
        for (x, sv) in out.row_mut(r).iter_mut().zip(s) {
            *x /= sv;
        }
    }
    out
}

pub fn cca_align(e1: &EmbeddingSet, e2: &EmbeddingSet) -> Result<AlignedPair> {
    check_pair(e1, e2)?;
    let (w1, w2, _) = cca_transforms(&e1.matrix, &e2.matrix)?;
    let mapped1 = e1.matrix.matmul(&w1)?;
    let mapped2 = e2.matrix.matmul(&w2)?;
    finish(&mapped1, &mapped2, AlignMethod::Cca, w1, w2)
}

/// Closed-form minimizer of `‖E1 − E2 W‖_F`, via the pseudoinverse of `E2`.
pub fn least_squares_map(e1: &Matrix, e2: &Matrix) -> Result<Matrix> {
    if e1.shape() != e2.shape() {
        return Err(Error::ShapeMismatch("least squares inputs differ in shape".into()));
    }
    let d = svd(e2)?;
    if let Some(&s) = d.s.iter().find(|&&s| s < RANK_TOLERANCE) {
        return Err(Error::RankDeficient { singular_value: s });
    }
    // W = V S⁻¹ Uᵀ E1
    let ut_e1 = d.u.t_matmul(e1)?;
    scale_columns_inv(&d.v, &d.s).matmul(&ut_e1)
}

pub fn least_squares_align(e1: &EmbeddingSet, e2: &EmbeddingSet) -> Result<AlignedPair> {
    check_pair(e1, e2)?;
    let w = least_squares_map(&e1.matrix, &e2.matrix)?;
    let mapped2 = e2.matrix.matmul(&w)?;
    finish(
        &e1.matrix,
        &mapped2,
        AlignMethod::LeastSquares,
        Matrix::identity(e1.dim()),
        w,
    )
}

pub fn align(e1: &EmbeddingSet, e2: &EmbeddingSet, method: AlignMethod) -> Result<AlignedPair> {
    match method {
        AlignMethod::Procrustes => procrustes_align(e1, e2),
        AlignMethod::Cca => cca_align(e1, e2),
        AlignMethod::LeastSquares => least_squares_align(e1, e2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlignOptions {
    pub method: AlignMethod,
    pub frequency_adjust: bool,
    /// Remove the frequency direction from the raw embedding (true) or from
    /// the row-normalized one (false).
    pub adjust_before_normalize: bool,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            method: AlignMethod::Procrustes,
            frequency_adjust: true,
            adjust_before_normalize: true,
        }
    }
}

/// Input embeddings after the pre-alignment steps, kept for measures that
/// work on unaligned spaces.
#[derive(Debug, Clone)]
pub struct PreparedPair {
    pub first: EmbeddingSet,
    pub second: EmbeddingSet,
    pub adjustments: Option<[FrequencyAdjustment; 2]>,
}

/// Frequency adjustment (optional) and row normalization, ahead of
/// alignment.
pub fn prepare(
    e1: &EmbeddingSet,
    e2: &EmbeddingSet,
    log_freqs1: &[f64],
    log_freqs2: &[f64],
    options: &AlignOptions,
) -> Result<PreparedPair> {
    let step = |e: &EmbeddingSet, f: &[f64]| -> Result<(EmbeddingSet, Option<FrequencyAdjustment>)> {
        if !options.frequency_adjust {
            return Ok((e.normalize()?, None));
        }
        let base = if options.adjust_before_normalize {
            e.clone()
        } else {
            e.normalize()?
        };
        let adj = FrequencyAdjustment::fit(&base.matrix, f)?;
        let adjusted = EmbeddingSet::new(adj.apply(&base.matrix)).normalize()?;
        Ok((adjusted, Some(adj)))
    };
    let (first, a1) = step(e1, log_freqs1)?;
    let (second, a2) = step(e2, log_freqs2)?;
    let adjustments = match (a1, a2) {
        (Some(a), Some(b)) => Some([a, b]),
        _ => None,
    };
    Ok(PreparedPair {
        first,
        second,
        adjustments,
    })
}

/// Which way to translate a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    FirstToSecond,
    SecondToFirst,
}

/// Index of the target-space row most cosine-similar to `source`; ties go to
/// the lowest index.
pub fn nearest_row(target: &Matrix, source: &[f64]) -> usize {
    let mut best = 0;
    let mut best_sim = f64::NEG_INFINITY;
    for (j, row) in target.row_iter().enumerate() {
        let n = norm(row);
        let sim = if n == 0.0 { 0.0 } else { dot(row, source) / n };
        if sim > best_sim {
            best_sim = sim;
            best = j;
        }
    }
    best
}

pub fn translate(pair: &AlignedPair, word: usize, direction: Direction) -> usize {
    let (source, target) = match direction {
        Direction::FirstToSecond => (&pair.first, &pair.second),
        Direction::SecondToFirst => (&pair.second, &pair.first),
    };
    nearest_row(target, source.row(word))
}

/// Translation of every word in one direction.
pub fn translate_all(pair: &AlignedPair, direction: Direction) -> Vec<usize> {
    (0..pair.n_words()).map(|i| translate(pair, i, direction)).collect()
}

/// Words that fail to translate to themselves in at least one direction,
/// given both translation tables.
pub fn mistranslations_from(forward: &[usize], backward: &[usize]) -> Vec<usize> {
    (0..forward.len())
        .filter(|&i| forward[i] != i || backward[i] != i)
        .collect()
}

pub fn mistranslation_set(pair: &AlignedPair) -> Vec<usize> {
    let f = translate_all(pair, Direction::FirstToSecond);
    let b = translate_all(pair, Direction::SecondToFirst);
    mistranslations_from(&f, &b)
}
