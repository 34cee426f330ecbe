//! Character-level n-gram language models.
//!
//! Training counts character n-grams over sentences padded with `order - 1`
//! BOS symbols and one EOS, then compiles the smoothed estimates into
//! backoff tables (the same shape as an ARPA file). Scoring walks those
//! tables, so a model read back from ARPA scores identically.

mod arpa;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub(crate) const BOS_ID: u32 = 0;
pub(crate) const EOS_ID: u32 = 1;
pub(crate) const UNK_ID: u32 = 2;

/// Log10 probability written for symbols that are never predicted.
pub(crate) const NEVER: f64 = -99.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Discount {
    Fixed(f64),
    /// Per order `n1 / (n1 + 2 n2)` from count-of-counts; orders where
    /// either count is zero fall back to Witten-Bell.
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Smoothing {
    KneserNey(Discount),
    WittenBell,
    /// Unsmoothed relative frequencies; unseen events get probability 0.
    Mle,
    /// Every symbol equally likely; a baseline.
    Uniform,
    /// Loaded from a file that did not record its smoothing.
    Unknown,
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::KneserNey(Discount::Fixed(0.75))
    }
}

impl Smoothing {
    fn is_smoothed(self) -> bool {
        !matches!(self, Smoothing::Mle)
    }
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothing::KneserNey(Discount::Fixed(d)) => write!(f, "kneser-ney:{d}"),
            Smoothing::KneserNey(Discount::Estimated) => f.write_str("kneser-ney:estimated"),
            Smoothing::WittenBell => f.write_str("witten-bell"),
            Smoothing::Mle => f.write_str("mle"),
            Smoothing::Uniform => f.write_str("uniform"),
            Smoothing::Unknown => f.write_str("unknown"),
        }
    }
}

impl FromStr for Smoothing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format {
            line: 0,
            message: format!("unknown smoothing '{s}'"),
        };
        Ok(match s {
            "kneser-ney" | "kn" => Smoothing::default(),
            "kneser-ney:estimated" | "kn:estimated" => Smoothing::KneserNey(Discount::Estimated),
            "witten-bell" | "wb" => Smoothing::WittenBell,
            "mle" => Smoothing::Mle,
            "uniform" => Smoothing::Uniform,
            "unknown" => Smoothing::Unknown,
            other => {
                let d = other
                    .strip_prefix("kneser-ney:")
                    .or_else(|| other.strip_prefix("kn:"))
                    .and_then(|d| d.parse::<f64>().ok())
                    .ok_or_else(bad)?;
                if !(d > 0.0 && d < 1.0) {
                    return Err(bad());
                }
                Smoothing::KneserNey(Discount::Fixed(d))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    pub order: usize,
    pub smoothing: Smoothing,
    /// Whether the end of sentence is modelled and scored.
    pub include_eos: bool,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            order: 6,
            smoothing: Smoothing::default(),
            include_eos: true,
        }
    }
}

impl LmConfig {
    pub fn with_order(order: usize) -> Self {
        LmConfig {
            order,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NGramEntry {
    pub log10_prob: f64,
    /// Log10 backoff weight; only meaningful for n-grams used as contexts.
    pub backoff: Option<f64>,
}

/// Log-probability of one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub total_log10_prob: f64,
    /// Character events scored, EOS included when modelled.
    pub scored_tokens: usize,
}

/// A trained (or loaded) character n-gram model.
#[derive(Debug, Clone)]
pub struct CharNGramLM {
    order: usize,
    smoothing: Smoothing,
    include_eos: bool,
    symbols: Vec<String>,
    char_ids: HashMap<char, u32>,
    // tables[k] holds n-grams of length k + 1
    tables: Vec<HashMap<Vec<u32>, NGramEntry>>,
}

/// Raw n-gram counts of a padded corpus.
struct Counts {
    // raw[k]: n-grams of length k + 1 ending at a predicted position
    raw: Vec<HashMap<Vec<u32>, u64>>,
}

fn count_corpus<S: AsRef<str>>(
    corpus: &[S],
    order: usize,
    include_eos: bool,
    char_ids: &mut HashMap<char, u32>,
    symbols: &mut Vec<String>,
) -> Counts {
    let mut raw = vec![HashMap::new(); order];
    let mut seq: Vec<u32> = Vec::new();
    for line in corpus {
        seq.clear();
        seq.extend(std::iter::repeat_n(BOS_ID, order - 1));
        for c in line.as_ref().chars() {
            let id = *char_ids.entry(c).or_insert_with(|| {
                symbols.push(c.to_string());
                (symbols.len() - 1) as u32
            });
            seq.push(id);
        }
        if include_eos {
            seq.push(EOS_ID);
        }
        for j in order - 1..seq.len() {
            for k in 0..order {
                let gram = &seq[j - k..=j];
                *raw[k].entry(gram.to_vec()).or_insert(0) += 1;
            }
        }
    }
    Counts { raw }
}

enum LevelRule {
    Discounted(f64),
    WittenBell,
    Mle,
}

pub fn train_char_lm<S: AsRef<str>>(corpus: &[S], config: &LmConfig) -> Result<CharNGramLM> {
    if config.order < 1 {
        return Err(Error::InvalidOrder(config.order));
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if let Smoothing::KneserNey(Discount::Fixed(d)) = config.smoothing {
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::Format {
                line: 0,
                message: format!("discount {d} must lie in (0, 1)"),
            });
        }
    }
    let mut symbols = vec![BOS.to_string(), EOS.to_string(), UNK.to_string()];
    let mut char_ids = HashMap::new();
    let counts = count_corpus(corpus, config.order, config.include_eos, &mut char_ids, &mut symbols);
    if char_ids.is_empty() && !config.include_eos {
        return Err(Error::EmptyCorpus);
    }

    let mut lm = CharNGramLM {
        order: config.order,
        smoothing: config.smoothing,
        include_eos: config.include_eos,
        symbols,
        char_ids,
        tables: Vec::new(),
    };
    match config.smoothing {
        Smoothing::Uniform | Smoothing::Unknown => lm.compile_uniform(),
        _ => lm.compile(&counts),
    }
    Ok(lm)
}

impl CharNGramLM {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    pub fn include_eos(&self) -> bool {
        self.include_eos
    }

    /// Symbols that can be predicted: characters, UNK and (if modelled) EOS.
    pub fn alphabet(&self) -> Vec<&str> {
        self.predictable()
            .map(|id| self.symbols[id as usize].as_str())
            .collect()
    }

    pub fn alphabet_size(&self) -> usize {
        self.predictable().count()
    }

    /// Number of n-grams stored for each order, lowest first.
    pub fn ngram_counts(&self) -> Vec<usize> {
        self.tables.iter().map(HashMap::len).collect()
    }

    fn predictable(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.symbols.len() as u32).filter(move |&id| id != BOS_ID && (id != EOS_ID || self.include_eos))
    }

    fn compile_uniform(&mut self) {
        let v = self.alphabet_size() as f64;
        let logp = -v.log10();
        let mut unigrams = HashMap::new();
        unigrams.insert(
            vec![BOS_ID],
            NGramEntry {
                log10_prob: NEVER,
                backoff: None,
            },
        );
        for id in self.predictable().collect::<Vec<_>>() {
            unigrams.insert(
                vec![id],
                NGramEntry {
                    log10_prob: logp,
                    backoff: None,
                },
            );
        }
        self.order = 1;
        self.tables = vec![unigrams];
    }

    fn level_counts(&self, counts: &Counts, k: usize) -> HashMap<Vec<u32>, u64> {
        let use_continuation = matches!(self.smoothing, Smoothing::KneserNey(_)) && k + 1 < self.order;
        if !use_continuation {
            return counts.raw[k].clone();
        }
        let mut cont: HashMap<Vec<u32>, u64> = HashMap::new();
        for gram in counts.raw[k + 1].keys() {
            *cont.entry(gram[1..].to_vec()).or_insert(0) += 1;
        }
        cont
    }

    fn level_rule(&self, level: &HashMap<Vec<u32>, u64>) -> LevelRule {
        match self.smoothing {
            Smoothing::KneserNey(Discount::Fixed(d)) => LevelRule::Discounted(d),
            Smoothing::KneserNey(Discount::Estimated) => {
                let n1 = level.values().filter(|&&c| c == 1).count() as f64;
                let n2 = level.values().filter(|&&c| c == 2).count() as f64;
                if n1 == 0.0 || n2 == 0.0 {
                    LevelRule::WittenBell
                } else {
                    LevelRule::Discounted(n1 / (n1 + 2.0 * n2))
                }
            }
            Smoothing::WittenBell => LevelRule::WittenBell,
            Smoothing::Mle => LevelRule::Mle,
            Smoothing::Uniform | Smoothing::Unknown => unreachable!("not count based"),
        }
    }

    fn compile(&mut self, counts: &Counts) {
        let v = self.alphabet_size() as f64;
        self.tables = Vec::with_capacity(self.order);
        for k in 0..self.order {
            let level = self.level_counts(counts, k);
            let rule = self.level_rule(&level);

            // per-context totals and type counts
            let mut contexts: HashMap<&[u32], (f64, f64)> = HashMap::new();
            for (gram, &c) in &level {
                let e = contexts.entry(&gram[..k]).or_insert((0.0, 0.0));
                e.0 += c as f64;
                e.1 += 1.0;
            }
            let gamma = |total: f64, types: f64| -> f64 {
                match rule {
                    LevelRule::Discounted(d) => d * types / total,
                    LevelRule::WittenBell => types / (total + types),
                    LevelRule::Mle => 0.0,
                }
            };

            let mut table: HashMap<Vec<u32>, NGramEntry> = HashMap::new();
            let mut grams: Vec<&Vec<u32>> = level.keys().collect();
            if k == 0 {
                // every predictable symbol gets a unigram, seen or not
                let extra: Vec<Vec<u32>> = self
                    .predictable()
                    .map(|id| vec![id])
                    .filter(|g| !level.contains_key(g))
                    .collect();
                let (total, types) = contexts.get(&[][..]).copied().unwrap_or((0.0, 0.0));
                let g = if total > 0.0 { gamma(total, types) } else { 1.0 };
                for gram in &extra {
                    let p = match rule {
                        LevelRule::Mle => 0.0,
                        _ => g / v,
                    };
                    table.insert(
                        gram.clone(),
                        NGramEntry {
                            log10_prob: p.log10(),
                            backoff: None,
                        },
                    );
                }
                table.insert(
                    vec![BOS_ID],
                    NGramEntry {
                        log10_prob: NEVER,
                        backoff: None,
                    },
                );
            }
            grams.sort();
            for gram in grams {
                let c = level[gram] as f64;
                let (total, types) = contexts[&gram[..k]];
                let lower = if k == 0 {
                    1.0 / v
                } else {
                    10f64.powf(self.lookup(&gram[1..k], gram[k]))
                };
                let p = match rule {
                    LevelRule::Discounted(d) => (c - d) / total + gamma(total, types) * lower,
                    LevelRule::WittenBell => (c + types * lower) / (total + types),
                    LevelRule::Mle => c / total,
                };
                table.insert(
                    gram.clone(),
                    NGramEntry {
                        log10_prob: p.log10(),
                        backoff: None,
                    },
                );
            }

            if k > 0 {
                // attach backoff weights to the (k)-gram contexts one level down
                let mut ctx_list: Vec<(&[u32], (f64, f64))> = contexts.into_iter().collect();
                ctx_list.sort_by(|a, b| a.0.cmp(b.0));
                for (ctx, (total, types)) in ctx_list {
                    let bow = gamma(total, types).log10();
                    let key = ctx.to_vec();
                    if !self.tables[k - 1].contains_key(&key) {
                        let last = *ctx.last().expect("k > 0");
                        let logp = if last == BOS_ID {
                            NEVER
                        } else {
                            self.lookup(&ctx[..k - 1], last)
                        };
                        self.tables[k - 1].insert(
                            key.clone(),
                            NGramEntry {
                                log10_prob: logp,
                                backoff: None,
                            },
                        );
                    }
                    self.tables[k - 1].get_mut(&key).expect("inserted").backoff = Some(bow);
                }
            }
            self.tables.push(table);
        }
    }

    /// Log10 p(word | history) by backoff over the compiled tables.
    /// `history` may be longer than the model order.
    pub(crate) fn lookup(&self, history: &[u32], word: u32) -> f64 {
        let max_ctx = history.len().min(self.tables.len() - 1);
        let mut acc = 0.0;
        let mut key: Vec<u32> = Vec::with_capacity(max_ctx + 1);
        for k in (0..=max_ctx).rev() {
            let ctx = &history[history.len() - k..];
            key.clear();
            key.extend_from_slice(ctx);
            key.push(word);
            if let Some(e) = self.tables[k].get(&key) {
                return acc + e.log10_prob;
            }
            if k > 0 {
                if let Some(b) = self.tables[k - 1].get(ctx).and_then(|e| e.backoff) {
                    acc += b;
                }
            }
        }
        f64::NEG_INFINITY
    }

    fn symbol_id(&self, c: char) -> u32 {
        self.char_ids.get(&c).copied().unwrap_or(UNK_ID)
    }

    /// Conditional probability of `next` (a character, or [`EOS`]) after
    /// `context` characters; the context is BOS-padded as in training.
    pub fn prob(&self, context: &str, next: &str) -> f64 {
        let history = self.history(context);
        let id = match next {
            EOS => EOS_ID,
            UNK => UNK_ID,
            s => {
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => self.symbol_id(c),
                    _ => UNK_ID,
                }
            }
        };
        if id == EOS_ID && !self.include_eos {
            return 0.0;
        }
        10f64.powf(self.lookup(&history, id))
    }

    fn history(&self, context: &str) -> Vec<u32> {
        let pad = self.tables.len().saturating_sub(1);
        let mut h: Vec<u32> = std::iter::repeat_n(BOS_ID, pad).collect();
        h.extend(context.chars().map(|c| self.symbol_id(c)));
        h
    }

    /// Sum of log10 probabilities of every character (and EOS) of `line`.
    pub fn sentence_logprob(&self, line: &str) -> SentenceScore {
        let pad = self.tables.len() - 1;
        let mut seq: Vec<u32> = std::iter::repeat_n(BOS_ID, pad).collect();
        seq.extend(line.chars().map(|c| self.symbol_id(c)));
        if self.include_eos {
            seq.push(EOS_ID);
        }
        let mut total = 0.0;
        for j in pad..seq.len() {
            total += self.lookup(&seq[j - pad..j], seq[j]);
        }
        SentenceScore {
            total_log10_prob: total,
            scored_tokens: seq.len() - pad,
        }
    }

    /// Corpus totals: summed log10 probability and scored events.
    pub fn corpus_logprob<S: AsRef<str>>(&self, corpus: &[S]) -> Result<SentenceScore> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut total = 0.0;
        let mut tokens = 0;
        for line in corpus {
            let s = self.sentence_logprob(line.as_ref());
            total += s.total_log10_prob;
            tokens += s.scored_tokens;
        }
        Ok(SentenceScore {
            total_log10_prob: total,
            scored_tokens: tokens,
        })
    }

    /// True when every conditional distribution is the uniform one.
    pub fn is_uniform(&self) -> bool {
        self.smoothing == Smoothing::Uniform
    }

    pub fn is_smoothed(&self) -> bool {
        self.smoothing.is_smoothed()
    }

    pub(crate) fn parts(&self) -> (&[String], &[HashMap<Vec<u32>, NGramEntry>]) {
        (&self.symbols, &self.tables)
    }

    pub(crate) fn from_parts(
        smoothing: Smoothing,
        symbols: Vec<String>,
        tables: Vec<HashMap<Vec<u32>, NGramEntry>>,
    ) -> CharNGramLM {
        let char_ids = symbols
            .iter()
            .enumerate()
            .skip(3)
            .map(|(i, s)| (s.chars().next().expect("single char"), i as u32))
            .collect();
        let include_eos = tables.first().is_some_and(|t| t.contains_key(&[EOS_ID][..]));
        CharNGramLM {
            order: tables.len(),
            smoothing,
            include_eos,
            symbols,
            char_ids,
            tables,
        }
    }
}

/// Per-token average log10 probability of `corpus` under `lm`.
///
/// This is the scaled score behind the cross-lingual similarity matrix: the
/// sum of sentence log-probabilities divided by the number of scored events.
pub fn corpus_score<S: AsRef<str>>(lm: &CharNGramLM, corpus: &[S]) -> Result<f64> {
    let s = lm.corpus_logprob(corpus)?;
    Ok(s.total_log10_prob / s.scored_tokens as f64)
}

/// Per-character perplexity `10^(-log10 P / W)` with W scored events.
///
/// A uniform model's perplexity is its alphabet size by definition and is
/// returned in closed form, exact in floating point.
pub fn perplexity<S: AsRef<str>>(lm: &CharNGramLM, corpus: &[S]) -> Result<f64> {
    let s = lm.corpus_logprob(corpus)?;
    if lm.is_uniform() {
        return Ok(lm.alphabet_size() as f64);
    }
    Ok(perplexity_from(s))
}

pub fn perplexity_from(score: SentenceScore) -> f64 {
    if score.scored_tokens == 0 {
        return 1.0;
    }
    10f64.powf(-score.total_log10_prob / score.scored_tokens as f64)
}
