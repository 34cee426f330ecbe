//! ARPA text format for character models.
//!
//! Characters are single tokens; whitespace and control characters are
//! written as `<U+XXXX>` so the space-separated n-gram column stays
//! unambiguous. A leading comment records smoothing so that closed-form
//! baselines survive a round trip.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{CharNGramLM, NGramEntry, Smoothing, BOS, BOS_ID, EOS, UNK, UNK_ID};
use crate::error::{Error, Result};
use crate::io;

const HEADER: &str = "# wxbridge char-lm";

fn escape(sym: &str) -> String {
    let mut chars = sym.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_whitespace() || c.is_control() => format!("<U+{:04X}>", c as u32),
        _ => sym.to_string(),
    }
}

fn unescape(token: &str, line: usize) -> Result<String> {
    if matches!(token, BOS | EOS | UNK) {
        return Ok(token.to_string());
    }
    if let Some(hex) = token.strip_prefix("<U+").and_then(|t| t.strip_suffix('>')) {
        return u32::from_str_radix(hex, 16)
            .ok()
            .and_then(char::from_u32)
            .map(String::from)
            .ok_or_else(|| Error::format(line, format!("bad escape '{token}'")));
    }
    let mut chars = token.chars();
    match (chars.next(), chars.next()) {
        (Some(_), None) => Ok(token.to_string()),
        _ => Err(Error::format(
            line,
            format!("token '{token}' is not a single character"),
        )),
    }
}

fn fmt_float(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x}")
    }
}

fn parse_float(s: &str, line: usize) -> Result<f64> {
    match s {
        "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse::<f64>()
            .ok()
            .filter(|x| !x.is_nan())
            .ok_or_else(|| Error::format(line, format!("bad number '{s}'"))),
    }
}

impl CharNGramLM {
    pub fn to_arpa(&self) -> String {
        let (symbols, tables) = self.parts();
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER} smoothing={}", self.smoothing());
        out.push_str("\n\\data\\\n");
        for (k, table) in tables.iter().enumerate() {
            let _ = writeln!(out, "ngram {}={}", k + 1, table.len());
        }
        for (k, table) in tables.iter().enumerate() {
            let _ = writeln!(out, "\n\\{}-grams:", k + 1);
            let mut rows: Vec<(String, &NGramEntry)> = table
                .iter()
                .map(|(gram, e)| {
                    let text = gram
                        .iter()
                        .map(|&id| escape(&symbols[id as usize]))
                        .collect::<Vec<_>>()
                        .join(" ");
                    (text, e)
                })
                .collect();
            rows.sort_by(|a, b| a.0.cmp(&b.0));
            for (text, e) in rows {
                out.push_str(&fmt_float(e.log10_prob));
                out.push('\t');
                out.push_str(&text);
                if let Some(b) = e.backoff {
                    out.push('\t');
                    out.push_str(&fmt_float(b));
                }
                out.push('\n');
            }
        }
        out.push_str("\n\\end\\\n");
        out
    }

    pub fn from_arpa(text: &str) -> Result<CharNGramLM> {
        let mut smoothing = Smoothing::Unknown;
        let mut declared: Vec<usize> = Vec::new();
        let mut tables: Vec<HashMap<Vec<u32>, NGramEntry>> = Vec::new();
        let mut symbols = vec![BOS.to_string(), EOS.to_string(), UNK.to_string()];
        let mut ids: HashMap<String, u32> = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();

        enum Section {
            Preamble,
            Data,
            Grams(usize),
            End,
        }
        let mut section = Section::Preamble;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix(HEADER) {
                for field in rest.split_whitespace() {
                    if let Some(v) = field.strip_prefix("smoothing=") {
                        smoothing = v.parse().map_err(|_| Error::format(line_no, "bad smoothing"))?;
                    }
                }
                continue;
            }
            match line.trim() {
                "\\data\\" => {
                    section = Section::Data;
                    continue;
                }
                "\\end\\" => {
                    section = Section::End;
                    continue;
                }
                t if t.starts_with('\\') && t.ends_with("-grams:") => {
                    let n: usize = t[1..t.len() - "-grams:".len()]
                        .parse()
                        .map_err(|_| Error::format(line_no, "bad section header"))?;
                    if n == 0 || n > declared.len() || n != tables.len() + 1 {
                        return Err(Error::format(line_no, format!("unexpected {n}-grams section")));
                    }
                    tables.push(HashMap::with_capacity(declared[n - 1]));
                    section = Section::Grams(n);
                    continue;
                }
                _ => {}
            }
            match section {
                Section::Preamble => {}
                Section::Data => {
                    let (k, v) = line
                        .trim()
                        .strip_prefix("ngram ")
                        .and_then(|r| r.split_once('='))
                        .ok_or_else(|| Error::format(line_no, "expected 'ngram N=COUNT'"))?;
                    let k: usize = k.trim().parse().map_err(|_| Error::format(line_no, "bad order"))?;
                    let v: usize = v.trim().parse().map_err(|_| Error::format(line_no, "bad count"))?;
                    if k != declared.len() + 1 {
                        return Err(Error::format(line_no, "orders must be listed in sequence"));
                    }
                    declared.push(v);
                }
                Section::Grams(n) => {
                    let mut fields = line.split('\t');
                    let logp = parse_float(fields.next().unwrap_or(""), line_no)?;
                    let gram_text = fields.next().ok_or_else(|| Error::format(line_no, "missing n-gram"))?;
                    let backoff = fields.next().map(|b| parse_float(b, line_no)).transpose()?;
                    if fields.next().is_some() {
                        return Err(Error::format(line_no, "too many fields"));
                    }
                    let mut gram = Vec::with_capacity(n);
                    for token in gram_text.split(' ') {
                        let sym = unescape(token, line_no)?;
                        let next = ids.len() as u32;
                        let id = *ids.entry(sym.clone()).or_insert_with(|| {
                            symbols.push(sym);
                            next
                        });
                        gram.push(id);
                    }
                    if gram.len() != n {
                        return Err(Error::format(line_no, format!("expected {n} tokens")));
                    }
                    tables[n - 1].insert(
                        gram,
                        NGramEntry {
                            log10_prob: logp,
                            backoff,
                        },
                    );
                }
                Section::End => return Err(Error::format(line_no, "content after \\end\\")),
            }
        }

        if !matches!(section, Section::End) {
            return Err(Error::format(0, "missing \\end\\ marker"));
        }
        if declared.is_empty() || tables.len() != declared.len() {
            return Err(Error::format(0, "n-gram sections do not match the \\data\\ header"));
        }
        for (k, (table, &n)) in tables.iter().zip(&declared).enumerate() {
            if table.len() != n {
                return Err(Error::format(
                    0,
                    format!("{}-grams: header says {n}, found {}", k + 1, table.len()),
                ));
            }
        }
        let unigrams = &tables[0];
        if !unigrams.keys().any(|g| g[0] != BOS_ID) {
            return Err(Error::format(0, "model has no predictable unigrams"));
        }
        for id in [BOS_ID, UNK_ID] {
            if !unigrams.contains_key(&[id][..]) {
                return Err(Error::format(0, format!("missing unigram {}", symbols[id as usize])));
            }
        }
        Ok(CharNGramLM::from_parts(smoothing, symbols, tables))
    }

    pub fn save_arpa(&self, path: &Path) -> Result<()> {
        io::write_atomic(path, self.to_arpa().as_bytes())
    }

    pub fn load_arpa(path: &Path) -> Result<CharNGramLM> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_arpa(&text).map_err(|e| e.in_file(path))
    }
}
