//! Plain-text artifact formats.
//!
//! Every writer produces deterministic bytes and every reader accepts
//! exactly what the matching writer produces. Floating-point values are
//! printed in shortest round-trip form unless a format says otherwise, so
//! reading an artifact back yields bit-identical numbers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use dialectoscope_core::align::{AlignMethod, AlignedPair};
use dialectoscope_core::corpus::{CoocMatrix, Corpus, Vocabulary};
use dialectoscope_core::dialectogram::{AggregateTable, Dialectogram, DialectogramRecord, EcClass, MeanOffsetProjection};
use dialectoscope_core::measures::{Measure, MeasureRow, MeasureTable};
use dialectoscope_core::swapbench::{EvalReport, TranslationAccuracy};
use dialectoscope_core::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};
use crate::io;

/// A format violation at a 1-based line (0 when not line-specific).
#[derive(Debug, Clone, PartialEq)]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl FormatError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        FormatError {
            line,
            message: message.into(),
        }
    }

    pub fn at(self, path: &Path) -> AppError {
        AppError::Parse {
            path: path.to_path_buf(),
            line: self.line,
            message: self.message,
        }
    }
}

type FormatResult<T> = std::result::Result<T, FormatError>;

/// Reads an artifact and parses it, attaching the path to any error.
pub fn load<T>(path: &Path, parse: impl FnOnce(&str) -> FormatResult<T>) -> Result<T> {
    let text = io::read_text(path)?;
    parse(&text).map_err(|e| e.at(path))
}

fn num<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> FormatResult<T> {
    field
        .parse()
        .map_err(|_| FormatError::new(line, format!("invalid {what} `{field}`")))
}

// ---------------------------------------------------------------- corpus

/// One document per line, tokens separated by whitespace.
pub fn parse_corpus(text: &str, label: u8) -> Corpus {
    let documents = text
        .lines()
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect();
    Corpus::new(label, documents)
}

pub fn format_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for doc in &corpus.documents {
        out.push_str(&doc.join(" "));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- vocabulary

/// `token<TAB>count1<TAB>count2`, one word per line in vocabulary order.
pub fn format_vocab(vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for i in 0..vocab.len() {
        writeln!(out, "{}\t{}\t{}", vocab.token(i), vocab.count1(i), vocab.count2(i)).unwrap();
    }
    out
}

pub fn parse_vocab(text: &str) -> FormatResult<Vocabulary> {
    let mut entries = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let ln = k + 1;
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(FormatError::new(ln, "expected token<TAB>count1<TAB>count2"));
        }
        entries.push((f[0].to_string(), num(f[1], ln, "count")?, num(f[2], ln, "count")?));
    }
    let vocab = Vocabulary::from_counts(entries.clone()).map_err(|e| FormatError::new(0, e.to_string()))?;
    // The stored order must already be canonical, so indices in other
    // artifacts stay valid.
    if entries.iter().enumerate().any(|(i, (t, _, _))| vocab.token(i) != t) {
        return Err(FormatError::new(0, "vocabulary is not in canonical order"));
    }
    Ok(vocab)
}

// ---------------------------------------------------------------- co-occurrences

pub const COOC_HEADER: &str = "#dialectoscope-cooc v1";

/// Header line, then `i j weight` for each upper-triangle entry with the
/// weight printed to 17 significant digits.
pub fn format_cooc(cooc: &CoocMatrix) -> String {
    let mut out = format!("{COOC_HEADER} N_w={}\n", cooc.n_words());
    for (i, j, w) in cooc.upper_entries() {
        writeln!(out, "{i} {j} {w:.16e}").unwrap();
    }
    out
}

pub fn parse_cooc(text: &str) -> FormatResult<CoocMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| FormatError::new(1, "empty file"))?;
    let n: usize = header
        .strip_prefix(COOC_HEADER)
        .and_then(|rest| rest.trim().strip_prefix("N_w="))
        .ok_or_else(|| FormatError::new(1, format!("expected `{COOC_HEADER} N_w=<n>`")))
        .and_then(|v| num(v, 1, "vocabulary size"))?;
    let mut triplets = Vec::new();
    for (k, line) in lines.enumerate() {
        let ln = k + 2;
        let f: Vec<&str> = line.split(' ').collect();
        if f.len() != 3 {
            return Err(FormatError::new(ln, "expected `i j weight`"));
        }
        triplets.push((num(f[0], ln, "index")?, num(f[1], ln, "index")?, num(f[2], ln, "weight")?));
    }
    CoocMatrix::from_upper_triplets(n, triplets).map_err(|e| FormatError::new(0, e.to_string()))
}

// ---------------------------------------------------------------- embeddings

/// word2vec-style text: `<rows> <dim>` header, then `token v1 … vD`.
/// One line per word, `token v1 ... vD`, values at 9 significant digits.
pub fn format_embedding(tokens: &[String], m: &Matrix) -> String {
    let mut out = String::new();
    for (t, row) in tokens.iter().zip(m.row_iter()) {
        out.push_str(t);
        for v in row {
            write!(out, " {v:.8e}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Reads the headerless text format; a leading word2vec-style
/// `<rows> <dim>` line is accepted and checked when present.
pub fn parse_embedding(text: &str) -> FormatResult<(Vec<String>, Matrix)> {
    let mut lines = text.lines().enumerate().peekable();
    let mut declared = None;
    if let Some((_, first)) = lines.peek() {
        let h: Vec<&str> = first.split(' ').collect();
        if let [r, d] = h[..] {
            if let (Ok(r), Ok(d)) = (r.parse::<usize>(), d.parse::<usize>()) {
                declared = Some((r, d));
                lines.next();
            }
        }
    }
    let mut tokens = Vec::new();
    let mut data = Vec::new();
    let mut dim = declared.map(|(_, d)| d);
    for (k, line) in lines {
        let ln = k + 1;
        if line.is_empty() {
            continue;
        }
        let mut f = line.split(' ');
        tokens.push(f.next().unwrap_or_default().to_string());
        let before = data.len();
        for v in f {
            data.push(num::<f64>(v, ln, "value")?);
        }
        let got = data.len() - before;
        match dim {
            None if got == 0 => return Err(FormatError::new(ln, "word has no values")),
            None => dim = Some(got),
            Some(d) if d != got => return Err(FormatError::new(ln, format!("expected {d} values, found {got}"))),
            Some(_) => {}
        }
    }
    let dim = dim.ok_or_else(|| FormatError::new(1, "no embeddings"))?;
    if let Some((rows, _)) = declared {
        if rows != tokens.len() {
            return Err(FormatError::new(1, format!("header declares {rows} rows, found {}", tokens.len())));
        }
    }
    let m = Matrix::from_vec(tokens.len(), dim, data).map_err(|e| FormatError::new(0, e.to_string()))?;
    Ok((tokens, m))
}

pub fn format_loss(initial: f64, trace: &[f64]) -> String {
    let mut out = String::from("epoch,mean_loss\n");
    writeln!(out, "0,{initial}").unwrap();
    for (e, l) in trace.iter().enumerate() {
        writeln!(out, "{},{l}", e + 1).unwrap();
    }
    out
}

pub fn parse_loss(text: &str) -> FormatResult<(f64, Vec<f64>)> {
    let mut values = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let (e, l) = line
            .split_once(',')
            .ok_or_else(|| FormatError::new(k + 1, "expected `epoch,mean_loss`"))?;
        if num::<usize>(e, k + 1, "epoch")? != values.len() {
            return Err(FormatError::new(k + 1, "epochs out of sequence"));
        }
        values.push(num(l, k + 1, "loss")?);
    }
    if values.is_empty() {
        return Err(FormatError::new(0, "no initial loss"));
    }
    let initial = values.remove(0);
    Ok((initial, values))
}

// ---------------------------------------------------------------- alignment sidecar

/// Everything about an alignment except the aligned vectors themselves,
/// which are stored as embedding files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentInfo {
    pub method: AlignMethod,
    pub residual: f64,
    #[serde(rename = "D")]
    pub dim: usize,
    #[serde(rename = "N_w")]
    pub n_words: usize,
    pub frequency_adjusted: bool,
    /// `‖Eᵀf‖` removed from each space, when adjusted.
    pub removed_norms: Option<[f64; 2]>,
    /// SHA-256 of each transform's rows as printed below.
    pub transform_checksums: [String; 2],
    pub transform1: Vec<Vec<f64>>,
    pub transform2: Vec<Vec<f64>>,
}

impl AlignmentInfo {
    pub fn new(pair: &AlignedPair, removed_norms: Option<[f64; 2]>) -> Self {
        let t1 = matrix_rows(&pair.transform1);
        let t2 = matrix_rows(&pair.transform2);
        let sum = |t: &Vec<Vec<f64>>| io::sha256_hex(serde_json::to_string(t).expect("finite rows").as_bytes());
        AlignmentInfo {
            method: pair.method,
            residual: pair.residual,
            dim: pair.dim(),
            n_words: pair.n_words(),
            frequency_adjusted: removed_norms.is_some(),
            removed_norms,
            transform_checksums: [sum(&t1), sum(&t2)],
            transform1: t1,
            transform2: t2,
        }
    }
}

pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(<[f64]>::to_vec).collect()
}

pub fn rows_matrix(rows: &[Vec<f64>]) -> FormatResult<Matrix> {
    Matrix::from_rows(rows).map_err(|e| FormatError::new(0, e.to_string()))
}

// ---------------------------------------------------------------- JSON helpers

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact types serialize");
    s.push('\n');
    s
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> FormatResult<T> {
    serde_json::from_str(text).map_err(|e| FormatError::new(e.line(), e.to_string()))
}

// ---------------------------------------------------------------- CSV helpers

fn csv_string<T: Serialize>(comments: &[(String, String)], rows: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for (k, v) in comments {
        writeln!(out, "# {k}={v}").unwrap();
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory CSV write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8"));
    out
}

/// Header-less CSV with only a header line when there are no rows.
fn csv_string_with_header<T: Serialize>(comments: &[(String, String)], header: &[&str], rows: Vec<T>) -> String {
    if rows.is_empty() {
        let mut out = String::new();
        for (k, v) in comments {
            writeln!(out, "# {k}={v}").unwrap();
        }
        out.push_str(&header.join(","));
        out.push('\n');
        return out;
    }
    csv_string(comments, rows)
}

fn csv_parse<T: for<'de> Deserialize<'de>>(text: &str) -> FormatResult<(BTreeMap<String, String>, Vec<T>)> {
    let mut meta = BTreeMap::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line.trim_start_matches('#').trim_start().split_once('=') {
            meta.insert(k.to_string(), v.to_string());
        }
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, rec) in r.deserialize().enumerate() {
        rows.push(rec.map_err(|e| FormatError::new(k + 2 + meta.len(), e.to_string()))?);
    }
    Ok((meta, rows))
}

fn meta_get<'a>(meta: &'a BTreeMap<String, String>, key: &str) -> FormatResult<&'a str> {
    meta.get(key)
        .map(String::as_str)
        .ok_or_else(|| FormatError::new(0, format!("missing `# {key}=` line")))
}

// ---------------------------------------------------------------- measures

const MEASURE_HEADER: [&str; 9] = [
    "token",
    "freq1",
    "freq2",
    "cosine_distance",
    "knn_overlap",
    "offset_pca",
    "svm_distance",
    "sense_separation",
    "mistranslates",
];

#[derive(Debug, Serialize, Deserialize)]
struct MeasureCsvRow {
    token: String,
    freq1: u64,
    freq2: u64,
    cosine_distance: f64,
    knn_overlap: f64,
    offset_pca: f64,
    svm_distance: f64,
    /// Empty when undefined.
    sense_separation: Option<f64>,
    mistranslates: bool,
}

/// One row per vocabulary word; an empty `sense_separation` field marks a
/// word whose high co-occurrence sets are empty.
pub fn format_measures(vocab: &Vocabulary, table: &MeasureTable) -> String {
    let comments = [("svm_plateau_warning".to_string(), table.svm_plateau_warning.to_string())];
    let rows = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| MeasureCsvRow {
            token: vocab.token(i).to_string(),
            freq1: vocab.count1(i),
            freq2: vocab.count2(i),
            cosine_distance: r.cosine_distance,
            knn_overlap: r.knn_overlap,
            offset_pca: r.offset_pca,
            svm_distance: r.svm_distance,
            sense_separation: r.sense_separation,
            mistranslates: r.mistranslates,
        })
        .collect();
    csv_string_with_header(&comments, &MEASURE_HEADER, rows)
}

/// Returns the tokens in file order alongside the table.
pub fn parse_measures(text: &str) -> FormatResult<(Vec<String>, MeasureTable)> {
    let (meta, rows) = csv_parse::<MeasureCsvRow>(text)?;
    let warning = meta_get(&meta, "svm_plateau_warning")?
        .parse()
        .map_err(|_| FormatError::new(1, "invalid svm_plateau_warning"))?;
    let tokens = rows.iter().map(|r| r.token.clone()).collect();
    let rows = rows
        .into_iter()
        .map(|r| MeasureRow {
            cosine_distance: r.cosine_distance,
            knn_overlap: r.knn_overlap,
            offset_pca: r.offset_pca,
            svm_distance: r.svm_distance,
            sense_separation: r.sense_separation,
            mistranslates: r.mistranslates,
        })
        .collect();
    Ok((
        tokens,
        MeasureTable {
            rows,
            svm_plateau_warning: warning,
        },
    ))
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct RankingRow {
    pub measure: String,
    pub rank: usize,
    pub token: String,
    pub value: f64,
}

/// Every measure's descending word ranking, long format. Words without a
/// sense separation value are left out of that measure's ranking.
pub fn format_rankings(vocab: &Vocabulary, table: &MeasureTable, absolute_sense: bool) -> String {
    let order = if absolute_sense { "absolute" } else { "signed" };
    let comments = [("sense_separation_order".to_string(), order.to_string())];
    let mut rows = Vec::new();
    for m in Measure::ALL {
        let absolute = absolute_sense && m == Measure::SenseSeparation;
        for (rank, i) in table.ranking(m, absolute).into_iter().enumerate() {
            rows.push(RankingRow {
                measure: m.name().to_string(),
                rank: rank + 1,
                token: vocab.token(i).to_string(),
                value: table.rows[i].get(m).expect("ranked words have values"),
            });
        }
    }
    csv_string_with_header(&comments, &["measure", "rank", "token", "value"], rows)
}

pub fn parse_rankings(text: &str) -> FormatResult<Vec<RankingRow>> {
    Ok(csv_parse(text)?.1)
}

// ---------------------------------------------------------------- dialectograms

const DIALECTOGRAM_HEADER: [&str; 6] = ["token", "alpha1", "alpha2", "freq1", "freq2", "ec_class"];

/// Records as CSV rows; the metadata travels in leading `# key=value` lines.
pub fn format_dialectogram_csv(d: &Dialectogram) -> String {
    let comments = [
        ("focal".to_string(), d.focal.clone()),
        ("offset_norm".to_string(), d.offset_norm.to_string()),
        ("translation_1to2".to_string(), d.translation_1to2.clone()),
        ("translation_2to1".to_string(), d.translation_2to1.clone()),
        ("excluded".to_string(), d.excluded.join(" ")),
    ];
    csv_string_with_header(&comments, &DIALECTOGRAM_HEADER, d.records.clone())
}

pub fn parse_dialectogram_csv(text: &str) -> FormatResult<Dialectogram> {
    let (meta, records) = csv_parse::<DialectogramRecord>(text)?;
    Ok(Dialectogram {
        focal: meta_get(&meta, "focal")?.to_string(),
        offset_norm: num(meta_get(&meta, "offset_norm")?, 0, "offset norm")?,
        translation_1to2: meta_get(&meta, "translation_1to2")?.to_string(),
        translation_2to1: meta_get(&meta, "translation_2to1")?.to_string(),
        excluded: meta_get(&meta, "excluded")?.split_whitespace().map(String::from).collect(),
        records,
    })
}

// ---------------------------------------------------------------- aggregates

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCsvRow {
    pub rank: usize,
    pub token: String,
    pub count_pos: usize,
    pub count_neg: usize,
    pub score: i64,
}

pub fn format_aggregate(vocab: &Vocabulary, table: &AggregateTable) -> String {
    let comments = [
        ("threshold".to_string(), table.threshold.to_string()),
        ("focal_words".to_string(), table.focal_words.len().to_string()),
        ("skipped_focal_words".to_string(), table.skipped.len().to_string()),
    ];
    let rows = table
        .scores
        .iter()
        .enumerate()
        .map(|(k, s)| AggregateCsvRow {
            rank: k + 1,
            token: vocab.token(s.word).to_string(),
            count_pos: s.count_pos,
            count_neg: s.count_neg,
            score: s.score(),
        })
        .collect();
    csv_string_with_header(&comments, &["rank", "token", "count_pos", "count_neg", "score"], rows)
}

pub fn parse_aggregate(text: &str) -> FormatResult<(f64, Vec<AggregateCsvRow>)> {
    let (meta, rows) = csv_parse(text)?;
    Ok((num(meta_get(&meta, "threshold")?, 0, "threshold")?, rows))
}

// ---------------------------------------------------------------- mean offsets

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberProjection {
    pub token: String,
    pub alpha1: f64,
    pub alpha2: f64,
    pub flipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeWord {
    pub token: String,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanOffsetReport {
    pub direction: Vec<f64>,
    pub members: Vec<MemberProjection>,
    pub top_positive_1: Vec<ExtremeWord>,
    pub top_negative_1: Vec<ExtremeWord>,
    pub top_positive_2: Vec<ExtremeWord>,
    pub top_negative_2: Vec<ExtremeWord>,
}

impl MeanOffsetReport {
    pub fn new(vocab: &Vocabulary, m: &MeanOffsetProjection) -> Self {
        let ext = |v: &[(usize, f64)]| {
            v.iter()
                .map(|&(w, a)| ExtremeWord {
                    token: vocab.token(w).to_string(),
                    alpha: a,
                })
                .collect()
        };
        MeanOffsetReport {
            direction: m.direction.clone(),
            members: m
                .word_set
                .iter()
                .enumerate()
                .map(|(k, &w)| MemberProjection {
                    token: vocab.token(w).to_string(),
                    alpha1: m.member_alpha1[k],
                    alpha2: m.member_alpha2[k],
                    flipped: m.flipped[k],
                })
                .collect(),
            top_positive_1: ext(&m.top_positive[0]),
            top_negative_1: ext(&m.top_negative[0]),
            top_positive_2: ext(&m.top_positive[1]),
            top_negative_2: ext(&m.top_negative[1]),
        }
    }
}

// ---------------------------------------------------------------- swap evaluation

#[derive(Debug, Serialize, Deserialize)]
struct SpearmanCsvRow {
    measure: String,
    spearman_all: Option<f64>,
    spearman_swapped_only: Option<f64>,
    n_all: usize,
    n_swapped: usize,
}

/// Rank correlations with swap degree, one row per measure.
pub fn format_spearman_csv(report: &EvalReport) -> String {
    let comments = [
        ("pos_matched".to_string(), report.pos_matched.to_string()),
        ("decile_rule".to_string(), report.decile_rule.clone()),
        ("svm_plateau_warning".to_string(), report.svm_plateau_warning.to_string()),
    ];
    let rows: Vec<SpearmanCsvRow> = report
        .measures
        .iter()
        .map(|m| SpearmanCsvRow {
            measure: m.measure.name().to_string(),
            spearman_all: m.spearman_all,
            spearman_swapped_only: m.spearman_swapped_only,
            n_all: m.n_all,
            n_swapped: m.n_swapped,
        })
        .collect();
    csv_string(&comments, rows)
}

#[derive(Debug, Serialize, Deserialize)]
struct TranslationCsvRow {
    unswapped: Option<f64>,
    below_50: Option<f64>,
    above_50: Option<f64>,
    exactly_50_self: Option<f64>,
    n_unswapped: usize,
    n_below_50: usize,
    n_above_50: usize,
    n_exactly_50: usize,
}

/// Translation accuracy by swap-degree bucket.
pub fn format_translation_csv(t: &TranslationAccuracy) -> String {
    csv_string(
        &[],
        [TranslationCsvRow {
            unswapped: t.unswapped.accuracy(),
            below_50: t.below_half.accuracy(),
            above_50: t.above_half.accuracy(),
            exactly_50_self: t.half_self.accuracy(),
            n_unswapped: t.unswapped.total,
            n_below_50: t.below_half.total,
            n_above_50: t.above_half.total,
            n_exactly_50: t.half_self.total,
        }],
    )
}

// ---------------------------------------------------------------- POS map

/// `token<TAB>tag` lines; later duplicates are an error.
pub fn parse_pos_map(text: &str) -> FormatResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (tok, tag) = line
            .split_once('\t')
            .ok_or_else(|| FormatError::new(k + 1, "expected token<TAB>tag"))?;
        if map.insert(tok.to_string(), tag.trim().to_string()).is_some() {
            return Err(FormatError::new(k + 1, format!("duplicate token `{tok}`")));
        }
    }
    Ok(map)
}

pub fn ec_class_counts(d: &Dialectogram) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for r in &d.records {
        *m.entry(r.ec_class.name()).or_insert(0) += 1;
    }
    for c in [EcClass::Both, EcClass::Only1, EcClass::Only2, EcClass::Neither] {
        m.entry(c.name()).or_insert(0);
    }
    m
}
