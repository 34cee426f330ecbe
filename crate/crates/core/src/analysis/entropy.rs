use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Character unigram counts, whitespace excluded.
pub fn char_distribution<S: AsRef<str>>(corpus: &[S]) -> BTreeMap<char, u64> {
    let mut counts = BTreeMap::new();
    for line in corpus {
        for c in line.as_ref().chars().filter(|c| !c.is_whitespace()) {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    counts
}

/// Shannon entropy in bits of a count distribution, clamped to
/// `[0, log2 V]` so rounding never breaks the bound.
fn entropy_of<'a>(counts: impl IntoIterator<Item = &'a u64>) -> Option<(f64, usize)> {
    let counts: Vec<f64> = counts.into_iter().filter(|&&c| c > 0).map(|&c| c as f64).collect();
    let n: f64 = counts.iter().sum();
    if n == 0.0 {
        return None;
    }
    let v = counts.len();
    // H = log2 N - (1/N) sum c log2 c
    let h = n.log2() - counts.iter().map(|c| c * c.log2()).sum::<f64>() / n;
    Some((h.clamp(0.0, (v as f64).log2()), v))
}

/// Corpus-level character entropy in bits.
pub fn char_entropy<S: AsRef<str>>(corpus: &[S]) -> Result<f64> {
    let dist = char_distribution(corpus);
    entropy_of(dist.values()).map(|(h, _)| h).ok_or(Error::EmptyCorpus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordEntropyStats {
    pub max: f64,
    /// Lower middle for an even number of word types.
    pub median: f64,
    pub average: f64,
    pub word_types: usize,
}

/// Character entropy of each distinct word, summarised over the vocabulary.
pub fn word_char_entropy_stats<S: AsRef<str>>(corpus: &[S]) -> Result<WordEntropyStats> {
    let types: BTreeSet<&str> = corpus.iter().flat_map(|l| l.as_ref().split_whitespace()).collect();
    if types.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut hs: Vec<f64> = types
        .iter()
        .map(|w| {
            let mut counts: BTreeMap<char, u64> = BTreeMap::new();
            for c in w.chars() {
                *counts.entry(c).or_insert(0) += 1;
            }
            entropy_of(counts.values()).map_or(0.0, |(h, _)| h)
        })
        .collect();
    hs.sort_by(f64::total_cmp);
    Ok(WordEntropyStats {
        max: hs[hs.len() - 1],
        median: hs[(hs.len() - 1) / 2],
        average: hs.iter().sum::<f64>() / hs.len() as f64,
        word_types: hs.len(),
    })
}

/// Shannon redundancy `1 - H / log2 V`.
///
/// V is the observed alphabet unless a larger `alphabet_size` is declared.
pub fn redundancy<S: AsRef<str>>(corpus: &[S], alphabet_size: Option<usize>) -> Result<f64> {
    let dist = char_distribution(corpus);
    let (h, observed) = entropy_of(dist.values()).ok_or(Error::EmptyCorpus)?;
    let v = alphabet_size.unwrap_or(observed);
    if v < 2 || v < observed {
        return Err(Error::DegenerateAlphabet(v));
    }
    Ok(1.0 - h / (v as f64).log2())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub language: String,
    pub corpus_char_entropy: f64,
    pub per_word_entropy: WordEntropyStats,
    /// `None` when fewer than two distinct characters occur.
    pub redundancy: Option<f64>,
    pub alphabet_size: usize,
    pub lines: usize,
}

/// Entropy, per-word statistics and redundancy of a corpus, optionally
/// restricted to its first `max_lines` lines.
pub fn entropy_report<S: AsRef<str>>(language: &str, corpus: &[S], max_lines: Option<usize>) -> Result<EntropyReport> {
    let corpus = match max_lines {
        Some(n) if n < corpus.len() => &corpus[..n],
        _ => corpus,
    };
    let dist = char_distribution(corpus);
    let (h, v) = entropy_of(dist.values()).ok_or(Error::EmptyCorpus)?;
    let redundancy = if v >= 2 {
        Some(1.0 - h / (v as f64).log2())
    } else {
        None
    };
    Ok(EntropyReport {
        language: language.to_string(),
        corpus_char_entropy: h,
        per_word_entropy: word_char_entropy_stats(corpus)?,
        redundancy,
        alphabet_size: v,
        lines: corpus.len(),
    })
}
