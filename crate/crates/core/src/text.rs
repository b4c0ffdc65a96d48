//! Tokenization and per-document lexical diversity reports.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use unicode_segmentation::UnicodeSegmentation;

use crate::accumulation::{growth_curves, CheckpointSchedule};
use crate::diversity::{DiversityOrder, FrequencyDistribution};
use crate::error::{Error, Result};
use crate::fit::{asymptote, compare_models, fit_model, fit_power_law, FitResult, ModelKind, RankedModel};
use crate::par::Execution;

/// Normalized word forms of one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenStream {
    pub source: String,
    pub tokens: Vec<String>,
}

impl TokenStream {
    pub fn new(source: impl Into<String>, text: &str) -> Self {
        TokenStream { source: source.into(), tokens: tokenize(text) }
    }

    /// Decodes UTF-8 bytes first; invalid encodings are an input error.
    pub fn from_bytes(source: impl Into<String>, bytes: &[u8]) -> Result<Self> {
        let source = source.into();
        let text = std::str::from_utf8(bytes)
            .map_err(|e| Error::Input(format!("{source}: not valid UTF-8 ({e})")))?;
        Ok(TokenStream { tokens: tokenize(text), source })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::from_bytes(path.display().to_string(), &bytes)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn distribution(&self) -> FrequencyDistribution {
        self.tokens.iter().map(String::as_str).collect()
    }
}

fn is_joiner(segment: &str) -> bool {
    matches!(segment, "-" | "'" | "\u{2019}" | "\u{2010}")
}

/// A combining mark after a space is segmented together with the space;
/// such segments are separators, not words.
fn is_wordlike(segment: &str) -> bool {
    segment.chars().any(char::is_alphanumeric) && !segment.chars().any(char::is_whitespace)
}

/// Splits on Unicode word boundaries and lower-cases. A hyphen or
/// apostrophe directly between two word segments stays inside the token;
/// any other punctuation ends it. Tokens without a letter are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let segments: Vec<&str> = text.split_word_bounds().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut i = 0;
    while i < segments.len() {
        let seg = segments[i];
        if is_wordlike(seg) {
            current.push_str(seg);
        } else if !current.is_empty()
            && is_joiner(seg)
            && segments.get(i + 1).is_some_and(|next| is_wordlike(next))
        {
            current.push_str(seg);
        } else {
            flush(&mut current, &mut tokens);
        }
        i += 1;
    }
    flush(&mut current, &mut tokens);
    tokens
}

fn flush(current: &mut String, tokens: &mut Vec<String>) {
    // A word begins with a base character, not a combining mark or joiner.
    let start = current
        .char_indices()
        .find(|&(i, c)| c.is_alphanumeric() && !extends_space(&current[i..]))
        .map_or(current.len(), |(i, _)| i);
    let word = &current[start..];
    if word.chars().any(char::is_alphabetic) {
        tokens.push(word.to_lowercase());
    }
    current.clear();
}

fn extends_space(rest: &str) -> bool {
    let c = rest.chars().next().expect("non-empty");
    let mut probe = String::with_capacity(1 + c.len_utf8());
    probe.push(' ');
    probe.push(c);
    probe.split_word_bounds().count() == 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexicalOptions {
    pub order: DiversityOrder,
    pub schedule: CheckpointSchedule,
    pub train_limit: u64,
}

impl Default for LexicalOptions {
    fn default() -> Self {
        LexicalOptions {
            order: DiversityOrder::SHANNON,
            schedule: CheckpointSchedule::Every(100),
            train_limit: 10_000,
        }
    }
}

/// Summary of one document's vocabulary and diversity growth.
#[derive(Debug, Clone, Serialize)]
pub struct LexicalReport {
    pub source: String,
    pub tokens: u64,
    pub types: u64,
    pub order: DiversityOrder,
    pub observed_diversity: f64,
    /// `C n^α` fitted to vocabulary growth; absent below three checkpoints.
    pub power_law: Option<FitResult>,
    /// M4 fitted to the whole diversity curve; absent below four checkpoints.
    pub m4: Option<FitResult>,
    /// `D` of the M4 fit when it converged.
    pub extrapolated_diversity: Option<f64>,
    /// Holdout comparison of M1..M4, when the document extends past the training limit.
    pub ranking: Option<Vec<RankedModel>>,
}

pub fn lexical_report(doc: &TokenStream, opts: &LexicalOptions, exec: Execution) -> Result<LexicalReport> {
    if doc.is_empty() {
        return Err(Error::Input(format!("{}: document has no tokens", doc.source)));
    }
    let curves = growth_curves(&doc.tokens, &opts.schedule, opts.order);
    let last = curves.diversity.last().expect("non-empty stream");
    let power_law = optional(fit_power_law(&curves.types))?;
    let m4 = optional(fit_model(&curves.diversity, ModelKind::M4))?;
    let extrapolated_diversity = m4.as_ref().and_then(|f| asymptote(f).ok());
    let ranking = if last.n > opts.train_limit {
        optional(compare_models(&curves.diversity, opts.train_limit, exec))?
    } else {
        None
    };
    Ok(LexicalReport {
        source: doc.source.clone(),
        tokens: last.n,
        types: curves.types.last().map_or(0, |p| p.value as u64),
        order: opts.order,
        observed_diversity: last.value,
        power_law,
        m4,
        extrapolated_diversity,
        ranking,
    })
}

/// Turns "not enough checkpoints" into `None`; other errors propagate.
fn optional<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::InsufficientData(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Reports for many documents; order follows the input.
pub fn corpus_reports(
    docs: &[TokenStream],
    opts: &LexicalOptions,
    exec: Execution,
) -> Vec<Result<LexicalReport>> {
    // Documents fan out; each report's own model comparison stays sequential.
    exec.map(docs, |doc| lexical_report(doc, opts, Execution::Sequential))
}

pub const CORPUS_CSV_HEADER: &str = "source,tokens,types,observed_D,extrapolated_D,C,alpha";

/// One row per report; missing fits leave their columns empty.
pub fn write_corpus_csv<W: Write>(reports: &[LexicalReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CORPUS_CSV_HEADER.split(',')).map_err(csv_err)?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
    for r in reports {
        let (c, alpha) = match &r.power_law {
            Some(f) => (Some(f.params[0]), Some(f.params[1])),
            None => (None, None),
        };
        w.write_record([
            r.source.clone(),
            r.tokens.to_string(),
            r.types.to_string(),
            format!("{:.4}", r.observed_diversity),
            fmt(r.extrapolated_diversity),
            fmt(c),
            fmt(alpha),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Pearson correlation coefficient.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Validation(format!(
            "sequences differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData("correlation needs at least two pairs".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("one of the sequences is constant".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation of extrapolated diversity against document length, over the
/// reports that have an extrapolated value.
pub fn diversity_length_correlation(reports: &[LexicalReport]) -> Result<f64> {
    let (lengths, ds): (Vec<f64>, Vec<f64>) = reports
        .iter()
        .filter_map(|r| r.extrapolated_diversity.map(|d| (r.tokens as f64, d)))
        .unzip();
    pearson_r(&lengths, &ds)
}
