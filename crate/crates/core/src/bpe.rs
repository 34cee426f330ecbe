//! Classic byte-pair-encoding over whitespace-separated words.
//!
//! Each word is split into characters with [`BOUNDARY_MARKER`] glued to the
//! first one, so word starts and word-internal pieces are distinct symbols
//! and detokenisation is unambiguous.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOUNDARY_MARKER: &str = "\u{2581}";

const FORMAT_TAG: &str = "#wxbridge-bpe";
const FORMAT_VERSION: u32 = 1;
const VOCAB_SECTION: &str = "#vocab";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpeConfig {
    /// Upper bound on the number of merges learned.
    pub merges: usize,
    /// Learning stops once the vocabulary reaches this size.
    pub vocab_cap: usize,
    /// Pairs rarer than this are never merged.
    pub min_frequency: u64,
}

impl Default for BpeConfig {
    fn default() -> Self {
        BpeConfig {
            merges: 5000,
            vocab_cap: 5000,
            min_frequency: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    vocab: BTreeMap<String, u64>,
    marker: String,
    config: BpeConfig,
    ranks: HashMap<(String, String), usize>,
}

#[derive(Debug, PartialEq, Eq)]
struct Candidate {
    count: i64,
    left: String,
    right: String,
    pair: (u32, u32),
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // highest count first, then lexicographically smallest pair
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Default)]
struct Interner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(s.to_string());
        self.ids.insert(s.to_string(), id);
        id
    }

    fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }
}

/// Splits a word into its initial symbols: characters, the first one
/// carrying the boundary marker.
pub fn initial_symbols(word: &str, marker: &str) -> Vec<String> {
    let mut out: Vec<String> = word.chars().map(String::from).collect();
    if let Some(first) = out.first_mut() {
        first.insert_str(0, marker);
    }
    out
}

/// Replaces every non-overlapping occurrence of `(left, right)`, scanning
/// left to right. Returns true if anything changed.
fn merge_in_place<T: PartialEq + Clone>(symbols: &mut Vec<T>, left: &T, right: &T, merged: &T) -> bool {
    let mut i = 0;
    let mut changed = false;
    while i + 1 < symbols.len() {
        if symbols[i] == *left && symbols[i + 1] == *right {
            symbols[i] = merged.clone();
            symbols.remove(i + 1);
            changed = true;
        }
        i += 1;
    }
    changed
}

fn word_counts<I, S>(corpus: I) -> BTreeMap<String, u64>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts = BTreeMap::new();
    for line in corpus {
        for word in line.as_ref().split_whitespace() {
            *counts.entry(word.to_string()).or_insert(0) += 1;
        }
    }
    counts
}

/// Learns merges greedily by pair frequency.
///
/// Ties go to the lexicographically smallest `(left, right)`. Learning stops
/// after `config.merges` merges, when the best pair is rarer than
/// `config.min_frequency`, or when the vocabulary reaches `config.vocab_cap`.
pub fn learn_bpe<I, S>(corpus: I, config: &BpeConfig) -> Result<BpeModel>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let counts = word_counts(corpus);
    if counts.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut interner = Interner::default();
    let mut words: Vec<(Vec<u32>, i64)> = counts
        .iter()
        .map(|(w, &n)| {
            let syms = initial_symbols(w, BOUNDARY_MARKER)
                .iter()
                .map(|s| interner.intern(s))
                .collect();
            (syms, n as i64)
        })
        .collect();

    let mut symbol_counts: HashMap<u32, i64> = HashMap::new();
    let mut pair_counts: HashMap<(u32, u32), i64> = HashMap::new();
    let mut pair_words: HashMap<(u32, u32), HashSet<usize>> = HashMap::new();
    for (idx, (syms, n)) in words.iter().enumerate() {
        for &s in syms {
            *symbol_counts.entry(s).or_insert(0) += n;
        }
        for w in syms.windows(2) {
            let pair = (w[0], w[1]);
            *pair_counts.entry(pair).or_insert(0) += n;
            pair_words.entry(pair).or_default().insert(idx);
        }
    }
    let mut live_vocab = symbol_counts.values().filter(|&&c| c > 0).count();

    let mut heap: BinaryHeap<Candidate> = pair_counts
        .iter()
        .map(|(&pair, &count)| Candidate {
            count,
            left: interner.name(pair.0).to_string(),
            right: interner.name(pair.1).to_string(),
            pair,
        })
        .collect();

    let mut merges = Vec::new();
    while merges.len() < config.merges && live_vocab < config.vocab_cap {
        let Some(top) = heap.pop() else { break };
        let current = pair_counts.get(&top.pair).copied().unwrap_or(0);
        if current != top.count {
            if current > 0 {
                heap.push(Candidate { count: current, ..top });
            }
            continue;
        }
        if current < config.min_frequency.max(1) as i64 {
            break;
        }

        let (left, right) = top.pair;
        let merged_name = format!("{}{}", top.left, top.right);
        let merged = interner.intern(&merged_name);
        let mut touched: Vec<usize> = pair_words.remove(&top.pair).unwrap_or_default().into_iter().collect();
        touched.sort_unstable();

        let mut changed_pairs = HashSet::new();
        for idx in touched {
            let (syms, n) = &mut words[idx];
            let n = *n;
            let before = syms.clone();
            if !merge_in_place(syms, &left, &right, &merged) {
                continue;
            }
            for w in before.windows(2) {
                let pair = (w[0], w[1]);
                *pair_counts.get_mut(&pair).expect("counted") -= n;
                changed_pairs.insert(pair);
            }
            for &s in &before {
                let c = symbol_counts.get_mut(&s).expect("counted");
                *c -= n;
                if *c == 0 {
                    live_vocab -= 1;
                }
            }
            for &s in syms.iter() {
                let c = symbol_counts.entry(s).or_insert(0);
                if *c == 0 {
                    live_vocab += 1;
                }
                *c += n;
            }
            for w in syms.windows(2) {
                let pair = (w[0], w[1]);
                *pair_counts.entry(pair).or_insert(0) += n;
                pair_words.entry(pair).or_default().insert(idx);
                changed_pairs.insert(pair);
            }
        }
        pair_counts.remove(&top.pair);

        let mut changed_pairs: Vec<_> = changed_pairs.into_iter().collect();
        changed_pairs.sort_unstable();
        for pair in changed_pairs {
            match pair_counts.get(&pair).copied() {
                Some(count) if count > 0 => heap.push(Candidate {
                    count,
                    left: interner.name(pair.0).to_string(),
                    right: interner.name(pair.1).to_string(),
                    pair,
                }),
                Some(_) => {
                    pair_counts.remove(&pair);
                }
                None => {}
            }
        }
        merges.push((top.left, top.right));
    }

    let vocab = symbol_counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .map(|(&s, &c)| (interner.name(s).to_string(), c as u64))
        .collect();
    Ok(BpeModel::from_parts(
        merges,
        vocab,
        BOUNDARY_MARKER.to_string(),
        *config,
    ))
}

impl BpeModel {
    pub fn from_parts(
        merges: Vec<(String, String)>,
        vocab: BTreeMap<String, u64>,
        marker: String,
        config: BpeConfig,
    ) -> BpeModel {
        let ranks = merges.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        BpeModel {
            merges,
            vocab,
            marker,
            config,
            ranks,
        }
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    /// Symbols of the training segmentation with their frequencies.
    pub fn vocab(&self) -> &BTreeMap<String, u64> {
        &self.vocab
    }

    pub fn marker(&self) -> &str {
        &self.marker
    }

    pub fn config(&self) -> &BpeConfig {
        &self.config
    }

    /// Segments one word by replaying merges in learned order.
    pub fn segment_word(&self, word: &str) -> Vec<String> {
        let mut symbols = initial_symbols(word, &self.marker);
        loop {
            let best = symbols
                .windows(2)
                .filter_map(|w| self.ranks.get(&(w[0].clone(), w[1].clone())).copied())
                .min();
            let Some(rank) = best else { break };
            let (left, right) = &self.merges[rank];
            let merged = format!("{left}{right}");
            merge_in_place(&mut symbols, left, right, &merged);
        }
        symbols
    }

    /// Tokenises a line; an empty or blank line gives no tokens.
    pub fn apply(&self, line: &str) -> Vec<String> {
        line.split_whitespace().flat_map(|w| self.segment_word(w)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{FORMAT_TAG} version={FORMAT_VERSION} marker={} merges={} vocab_cap={} min_frequency={} learned={}\n",
            self.marker,
            self.config.merges,
            self.config.vocab_cap,
            self.config.min_frequency,
            self.merges.len()
        );
        for (l, r) in &self.merges {
            out.push_str(l);
            out.push(' ');
            out.push_str(r);
            out.push('\n');
        }
        if !self.vocab.is_empty() {
            out.push_str(VOCAB_SECTION);
            out.push('\n');
            for (sym, n) in &self.vocab {
                out.push_str(&format!("{sym}\t{n}\n"));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<BpeModel> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::format(1, "empty model file"))?;
        let mut fields = header.split(' ');
        if fields.next() != Some(FORMAT_TAG) {
            return Err(Error::format(1, format!("missing '{FORMAT_TAG}' header")));
        }
        let mut settings: HashMap<&str, &str> = HashMap::new();
        for field in fields {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::format(1, format!("bad header field '{field}'")))?;
            settings.insert(k, v);
        }
        let num = |key: &str| -> Result<u64> {
            settings
                .get(key)
                .ok_or_else(|| Error::format(1, format!("header lacks '{key}'")))?
                .parse()
                .map_err(|_| Error::format(1, format!("'{key}' is not a number")))
        };
        let version = num("version")?;
        if version != FORMAT_VERSION as u64 {
            return Err(Error::format(1, format!("unsupported version {version}")));
        }
        let marker = settings
            .get("marker")
            .filter(|m| !m.is_empty())
            .ok_or_else(|| Error::format(1, "header lacks 'marker'"))?
            .to_string();
        let config = BpeConfig {
            merges: num("merges")? as usize,
            vocab_cap: num("vocab_cap")? as usize,
            min_frequency: num("min_frequency")?,
        };

        let mut merges = Vec::new();
        let mut vocab = BTreeMap::new();
        let mut in_vocab = false;
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            if !in_vocab && line == VOCAB_SECTION {
                in_vocab = true;
                continue;
            }
            if in_vocab {
                let (sym, n) = line
                    .split_once('\t')
                    .ok_or_else(|| Error::format(lineno, "vocab line must be 'symbol<TAB>count'"))?;
                let n = n.parse().map_err(|_| Error::format(lineno, "bad vocab count"))?;
                vocab.insert(sym.to_string(), n);
            } else {
                let mut parts = line.split(' ');
                match (parts.next(), parts.next(), parts.next()) {
                    (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => {
                        merges.push((l.to_string(), r.to_string()))
                    }
                    _ => return Err(Error::format(lineno, "merge line must be 'left right'")),
                }
            }
        }
        if let Some(learned) = settings.get("learned") {
            if learned.parse::<usize>().ok() != Some(merges.len()) {
                return Err(Error::format(1, "merge count does not match 'learned'"));
            }
        }
        Ok(BpeModel::from_parts(merges, vocab, marker, config))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.to_text().as_bytes())
    }

    pub fn load(path: &Path) -> Result<BpeModel> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.in_file(path))
    }
}

/// Joins tokens back into text; a boundary marker starts a new word.
pub fn undo_bpe<S: AsRef<str>>(tokens: &[S], marker: &str) -> String {
    let mut out = String::new();
    for tok in tokens {
        let tok = tok.as_ref();
        match tok.strip_prefix(marker) {
            Some(rest) => {
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(rest);
            }
            None => out.push_str(tok),
        }
    }
    out
}
