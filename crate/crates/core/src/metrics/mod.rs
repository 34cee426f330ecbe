//! Corpus-level MT evaluation metrics: BLEU, char-BLEU, chrF2, WER, TER.
//!
//! Every metric takes aligned hypothesis/reference line slices and
//! aggregates sufficient statistics over the whole corpus before scoring,
//! so results do not depend on line order.

mod edit;

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use edit::{levenshtein, ter_line, TerLine};

/// Floor applied to zero n-gram match counts in standard BLEU.
pub const BLEU_EPSILON: f64 = 1e-9;
pub const MAX_SHIFT_DISTANCE: usize = 10;
pub const MAX_SHIFT_LENGTH: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Bleu,
    CharBleu,
    Chrf2,
    Ter,
    Wer,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::Bleu,
        MetricKind::CharBleu,
        MetricKind::Chrf2,
        MetricKind::Ter,
        MetricKind::Wer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Bleu => "bleu",
            MetricKind::CharBleu => "char_bleu",
            MetricKind::Chrf2 => "chrf2",
            MetricKind::Ter => "ter",
            MetricKind::Wer => "wer",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        MetricKind::ALL
            .into_iter()
            .find(|m| m.name() == key || (key == "chrf" && *m == MetricKind::Chrf2))
            .ok_or_else(|| Error::format(0, format!("unknown metric '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BleuMode {
    /// Geometric mean of precisions times the exponential brevity penalty.
    #[default]
    Standard,
    /// `min(1, c/r) * prod(p_n)` with no smoothing.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Details {
    Ngram {
        precisions: Vec<f64>,
        matches: Vec<u64>,
        totals: Vec<u64>,
        brevity_penalty: f64,
        hyp_len: u64,
        ref_len: u64,
    },
    Chrf {
        precision: f64,
        recall: f64,
        beta: f64,
        char_order: usize,
        effective_order: usize,
    },
    Edit {
        edits: u64,
        shifts: u64,
        ref_words: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub metric: MetricKind,
    /// BLEU/chrF2/WER on a 0..100 scale; TER as a ratio.
    pub score: f64,
    pub details: Details,
    /// Parameters that produced the score.
    pub signature: String,
}

fn check_aligned<H: AsRef<str>, R: AsRef<str>>(hyps: &[H], refs: &[R]) -> Result<()> {
    if hyps.len() != refs.len() {
        return Err(Error::AlignmentMismatch {
            left: hyps.len(),
            right: refs.len(),
        });
    }
    Ok(())
}

fn words(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

fn ngram_counts<T: Eq + Hash>(seq: &[T], n: usize) -> HashMap<&[T], u64> {
    let mut counts = HashMap::new();
    if seq.len() >= n {
        for g in seq.windows(n) {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
}

struct NgramStats {
    matches: Vec<u64>,
    totals: Vec<u64>,
    hyp_len: u64,
    ref_len: u64,
}

impl NgramStats {
    fn new(max_order: usize) -> Self {
        NgramStats {
            matches: vec![0; max_order],
            totals: vec![0; max_order],
            hyp_len: 0,
            ref_len: 0,
        }
    }

    fn add<T: Eq + Hash>(&mut self, hyp: &[T], reference: &[T]) {
        self.hyp_len += hyp.len() as u64;
        self.ref_len += reference.len() as u64;
        for n in 1..=self.matches.len() {
            let h = ngram_counts(hyp, n);
            let r = ngram_counts(reference, n);
            self.matches[n - 1] += h
                .iter()
                .map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0)))
                .sum::<u64>();
            self.totals[n - 1] += (hyp.len() + 1).saturating_sub(n) as u64;
        }
    }
}

fn bleu_from_stats(stats: NgramStats, mode: BleuMode) -> (f64, Details) {
    let precisions: Vec<f64> = stats
        .matches
        .iter()
        .zip(&stats.totals)
        .map(|(&m, &t)| if t == 0 { 0.0 } else { m as f64 / t as f64 })
        .collect();
    let (c, r) = (stats.hyp_len as f64, stats.ref_len as f64);
    let effective: Vec<usize> = (0..stats.totals.len()).filter(|&i| stats.totals[i] > 0).collect();

    let (bp, score) = if stats.hyp_len == 0 || stats.matches[0] == 0 {
        let bp = if stats.hyp_len == 0 {
            0.0
        } else {
            brevity_penalty(c, r, mode)
        };
        (bp, 0.0)
    } else {
        let bp = brevity_penalty(c, r, mode);
        let score = match mode {
            BleuMode::Standard => {
                let log_sum: f64 = effective
                    .iter()
                    .map(|&i| {
                        let m = stats.matches[i] as f64;
                        let m = if m == 0.0 { BLEU_EPSILON } else { m };
                        (m / stats.totals[i] as f64).ln()
                    })
                    .sum();
                bp * (log_sum / effective.len() as f64).exp()
            }
            BleuMode::Literal => bp * effective.iter().map(|&i| precisions[i]).product::<f64>(),
        };
        (bp, 100.0 * score)
    };
    let details = Details::Ngram {
        precisions,
        matches: stats.matches,
        totals: stats.totals,
        brevity_penalty: bp,
        hyp_len: stats.hyp_len,
        ref_len: stats.ref_len,
    };
    (score, details)
}

fn brevity_penalty(c: f64, r: f64, mode: BleuMode) -> f64 {
    match mode {
        BleuMode::Standard if c >= r => 1.0,
        BleuMode::Standard => (1.0 - r / c).exp(),
        BleuMode::Literal => (c / r).min(1.0),
    }
}

/// Corpus BLEU over whitespace tokens against a single reference per line.
pub fn bleu<H: AsRef<str>, R: AsRef<str>>(
    hyps: &[H],
    refs: &[R],
    max_order: usize,
    mode: BleuMode,
) -> Result<EvalResult> {
    check_aligned(hyps, refs)?;
    if max_order == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let mut stats = NgramStats::new(max_order);
    for (h, r) in hyps.iter().zip(refs) {
        stats.add(&words(h.as_ref()), &words(r.as_ref()));
    }
    if stats.ref_len == 0 {
        return Err(Error::EmptyReference);
    }
    let (score, details) = bleu_from_stats(stats, mode);
    let mode_name = match mode {
        BleuMode::Standard => "standard|smooth:add-eps",
        BleuMode::Literal => "literal|smooth:none",
    };
    Ok(EvalResult {
        metric: MetricKind::Bleu,
        score,
        details,
        signature: format!("bleu|order:{max_order}|mode:{mode_name}|tok:whitespace"),
    })
}

/// BLEU over characters, whitespace included.
pub fn char_bleu<H: AsRef<str>, R: AsRef<str>>(hyps: &[H], refs: &[R], max_order: usize) -> Result<EvalResult> {
    check_aligned(hyps, refs)?;
    if max_order == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let mut stats = NgramStats::new(max_order);
    for (h, r) in hyps.iter().zip(refs) {
        let h: Vec<char> = h.as_ref().chars().collect();
        let r: Vec<char> = r.as_ref().chars().collect();
        stats.add(&h, &r);
    }
    if stats.ref_len == 0 {
        return Err(Error::EmptyReference);
    }
    let (score, details) = bleu_from_stats(stats, BleuMode::Standard);
    Ok(EvalResult {
        metric: MetricKind::CharBleu,
        score,
        details,
        signature: format!("char_bleu|order:{max_order}|mode:standard|smooth:add-eps|tok:char"),
    })
}

/// Character n-gram F-score; whitespace is removed before extraction.
///
/// Precision and recall are averaged over the orders with reference
/// n-grams, then combined as F_beta.
pub fn chrf<H: AsRef<str>, R: AsRef<str>>(hyps: &[H], refs: &[R], char_order: usize, beta: f64) -> Result<EvalResult> {
    check_aligned(hyps, refs)?;
    if char_order == 0 {
        return Err(Error::InvalidOrder(0));
    }
    let mut stats = NgramStats::new(char_order);
    let mut ref_totals = vec![0u64; char_order];
    for (h, r) in hyps.iter().zip(refs) {
        let h: Vec<char> = h.as_ref().chars().filter(|c| !c.is_whitespace()).collect();
        let r: Vec<char> = r.as_ref().chars().filter(|c| !c.is_whitespace()).collect();
        stats.add(&h, &r);
        for (n, t) in ref_totals.iter_mut().enumerate() {
            *t += (r.len() + 1).saturating_sub(n + 1) as u64;
        }
    }
    let effective: Vec<usize> = (0..char_order).filter(|&i| ref_totals[i] > 0).collect();
    if effective.is_empty() {
        return Err(Error::EmptyReference);
    }
    let k = effective.len() as f64;
    let precision = effective
        .iter()
        .map(|&i| {
            if stats.totals[i] == 0 {
                0.0
            } else {
                stats.matches[i] as f64 / stats.totals[i] as f64
            }
        })
        .sum::<f64>()
        / k;
    let recall = effective
        .iter()
        .map(|&i| stats.matches[i] as f64 / ref_totals[i] as f64)
        .sum::<f64>()
        / k;
    let b2 = beta * beta;
    let f = if precision + recall == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / (b2 * precision + recall)
    };
    Ok(EvalResult {
        metric: MetricKind::Chrf2,
        score: 100.0 * f,
        details: Details::Chrf {
            precision,
            recall,
            beta,
            char_order,
            effective_order: effective.len(),
        },
        signature: format!("chrf|order:{char_order}|beta:{beta}|whitespace:removed"),
    })
}

pub fn chrf2<H: AsRef<str>, R: AsRef<str>>(hyps: &[H], refs: &[R]) -> Result<EvalResult> {
    chrf(hyps, refs, 6, 2.0)
}

/// Word error rate: summed word-level Levenshtein distance over total
/// reference words, times 100.
pub fn wer<H: AsRef<str>, R: AsRef<str>>(hyps: &[H], refs: &[R]) -> Result<EvalResult> {
    check_aligned(hyps, refs)?;
    let mut edits = 0u64;
    let mut ref_words = 0u64;
    for (h, r) in hyps.iter().zip(refs) {
        let (h, r) = (words(h.as_ref()), words(r.as_ref()));
        edits += levenshtein(&h, &r) as u64;
        ref_words += r.len() as u64;
    }
    if ref_words == 0 {
        return Err(Error::EmptyReference);
    }
    Ok(EvalResult {
        metric: MetricKind::Wer,
        score: 100.0 * edits as f64 / ref_words as f64,
        details: Details::Edit {
            edits,
            shifts: 0,
            ref_words,
        },
        signature: "wer|tok:whitespace|scale:100".to_string(),
    })
}

/// Translation edit rate: (edits + block shifts) over reference words,
/// reported as a ratio.
pub fn ter<H: AsRef<str>, R: AsRef<str>>(hyps: &[H], refs: &[R], max_shift_distance: usize) -> Result<EvalResult> {
    check_aligned(hyps, refs)?;
    let mut edits = 0u64;
    let mut shifts = 0u64;
    let mut ref_words = 0u64;
    for (h, r) in hyps.iter().zip(refs) {
        let (h, r) = (words(h.as_ref()), words(r.as_ref()));
        let line = ter_line(&h, &r, max_shift_distance, MAX_SHIFT_LENGTH);
        edits += line.edits as u64;
        shifts += line.shifts as u64;
        ref_words += r.len() as u64;
    }
    if ref_words == 0 {
        return Err(Error::EmptyReference);
    }
    Ok(EvalResult {
        metric: MetricKind::Ter,
        score: (edits + shifts) as f64 / ref_words as f64,
        details: Details::Edit {
            edits,
            shifts,
            ref_words,
        },
        signature: format!(
            "ter|tok:whitespace|max_shift_distance:{max_shift_distance}|max_shift_length:{MAX_SHIFT_LENGTH}|scale:ratio"
        ),
    })
}

/// Runs one metric with its default parameters.
pub fn evaluate_metric<H: AsRef<str>, R: AsRef<str>>(metric: MetricKind, hyps: &[H], refs: &[R]) -> Result<EvalResult> {
    match metric {
        MetricKind::Bleu => bleu(hyps, refs, 4, BleuMode::Standard),
        MetricKind::CharBleu => char_bleu(hyps, refs, 4),
        MetricKind::Chrf2 => chrf2(hyps, refs),
        MetricKind::Ter => ter(hyps, refs, MAX_SHIFT_DISTANCE),
        MetricKind::Wer => wer(hyps, refs),
    }
}
