use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::{corpus_score, perplexity, train_char_lm, CharNGramLM, LmConfig};
use crate::metrics::{evaluate_metric, EvalResult, MetricKind};

/// A labelled monolingual corpus.
#[derive(Debug, Clone)]
pub struct LanguageCorpus {
    pub label: String,
    pub lines: Vec<String>,
}

impl LanguageCorpus {
    pub fn new(label: impl Into<String>, lines: Vec<String>) -> Self {
        LanguageCorpus {
            label: label.into(),
            lines,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Ssnglm,
    PerplexityRaw,
    PerplexitySymmetric,
}

/// Directed language-by-language scores; rows are the model (source)
/// language, columns the scored (target) corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub languages: Vec<String>,
    pub kind: MatrixKind,
    pub raw: Vec<Vec<Option<f64>>>,
    pub normalized: Vec<Vec<Option<f64>>>,
}

impl SimilarityMatrix {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }

    /// TSV with a header row and a label column; `-` marks undefined cells.
    pub fn to_tsv(&self, normalized: bool) -> String {
        let cells = if normalized { &self.normalized } else { &self.raw };
        let mut out = String::from("model");
        for l in &self.languages {
            out.push('\t');
            out.push_str(l);
        }
        out.push('\n');
        for (label, row) in self.languages.iter().zip(cells) {
            out.push_str(label);
            for v in row {
                match v {
                    Some(v) => {
                        let _ = write!(out, "\t{v:.6}");
                    }
                    None => out.push_str("\t-"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Min-max scaling of the selected finite cells into `[0, 1]`; other cells
/// become `None`. If all selected values are equal they map to 0.
pub fn min_max_normalize(raw: &[Vec<Option<f64>>], include: impl Fn(usize, usize) -> bool) -> Vec<Vec<Option<f64>>> {
    let selected = |i: usize, j: usize| raw[i][j].filter(|v| v.is_finite() && include(i, j));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, row) in raw.iter().enumerate() {
        for j in 0..row.len() {
            if let Some(v) = selected(i, j) {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    (0..raw.len())
        .map(|i| {
            (0..raw[i].len())
                .map(|j| selected(i, j).map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 }))
                .collect()
        })
        .collect()
}

fn check_languages(corpora: &[LanguageCorpus]) -> Result<()> {
    if corpora.len() < 2 {
        return Err(Error::TooFewInputs {
            needed: 2,
            got: corpora.len(),
        });
    }
    Ok(())
}

fn train_all(corpora: &[LanguageCorpus], config: &LmConfig) -> Result<Vec<CharNGramLM>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = corpora
            .iter()
            .map(|c| s.spawn(move || train_char_lm(&c.lines, config).map_err(|e| with_label(e, &c.label))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread"))
            .collect()
    })
}

fn with_label(e: Error, label: &str) -> Error {
    match e {
        Error::EmptyCorpus => Error::Format {
            line: 0,
            message: format!("corpus for '{label}' is empty"),
        },
        other => other,
    }
}

fn score_all(
    models: &[CharNGramLM],
    corpora: &[LanguageCorpus],
    score: fn(&CharNGramLM, &[String]) -> Result<f64>,
) -> Result<Vec<Vec<Option<f64>>>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = models
            .iter()
            .map(|lm| {
                s.spawn(move || {
                    corpora
                        .iter()
                        .map(|c| score(lm, &c.lines).map(Some).map_err(|e| with_label(e, &c.label)))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scoring thread")).collect()
    })
}

/// Scaled n-gram LM similarity: the per-token average log10 probability of
/// each target corpus under each source language's character model,
/// min-max normalized over source != target pairs.
pub fn ssnglm_matrix(corpora: &[LanguageCorpus], config: &LmConfig) -> Result<SimilarityMatrix> {
    check_languages(corpora)?;
    let models = train_all(corpora, config)?;
    let raw = score_all(&models, corpora, corpus_score)?;
    let normalized = min_max_normalize(&raw, |i, j| i != j);
    Ok(SimilarityMatrix {
        languages: corpora.iter().map(|c| c.label.clone()).collect(),
        kind: MatrixKind::Ssnglm,
        raw,
        normalized,
    })
}

/// Character perplexity of every corpus under every language's model,
/// min-max normalized over all directed pairs. With `symmetrize`, each
/// cell becomes the mean of its two directions (raw and normalized).
pub fn perplexity_matrix(corpora: &[LanguageCorpus], config: &LmConfig, symmetrize: bool) -> Result<SimilarityMatrix> {
    check_languages(corpora)?;
    let models = train_all(corpora, config)?;
    let raw = score_all(&models, corpora, perplexity)?;
    let normalized = min_max_normalize(&raw, |_, _| true);
    let languages = corpora.iter().map(|c| c.label.clone()).collect();
    if !symmetrize {
        return Ok(SimilarityMatrix {
            languages,
            kind: MatrixKind::PerplexityRaw,
            raw,
            normalized,
        });
    }
    let mean = |m: &Vec<Vec<Option<f64>>>| -> Vec<Vec<Option<f64>>> {
        (0..m.len())
            .map(|i| {
                (0..m.len())
                    .map(|j| match (m[i][j], m[j][i]) {
                        (Some(a), Some(b)) => Some((a + b) / 2.0),
                        _ => None,
                    })
                    .collect()
            })
            .collect()
    };
    Ok(SimilarityMatrix {
        languages,
        kind: MatrixKind::PerplexitySymmetric,
        raw: mean(&raw),
        normalized: mean(&normalized),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub source: String,
    pub target: String,
    pub results: Vec<EvalResult>,
}

/// Surface similarity of the two sides of a parallel corpus (both already
/// in one script), scoring the source side as the hypothesis.
pub fn pairwise_surface_similarity<S: AsRef<str>, T: AsRef<str>>(
    source: (&str, &[S]),
    target: (&str, &[T]),
    metrics: &[MetricKind],
) -> Result<MetricReport> {
    let (src_label, src) = source;
    let (tgt_label, tgt) = target;
    if src.len() != tgt.len() {
        return Err(Error::AlignmentMismatch {
            left: src.len(),
            right: tgt.len(),
        });
    }
    let results = metrics
        .iter()
        .map(|&m| evaluate_metric(m, src, tgt))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricReport {
        source: src_label.to_string(),
        target: tgt_label.to_string(),
        results,
    })
}
