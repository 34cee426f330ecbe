//! Script identifiers and Unicode-block based script detection.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A writing system with a WX mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScriptId {
    Devanagari,
    Gujarati,
    Gurmukhi,
    PersoArabic,
}

impl ScriptId {
    /// Enumeration order; also the tie-break order for detection.
    pub const ALL: [ScriptId; 4] = [
        ScriptId::Devanagari,
        ScriptId::Gujarati,
        ScriptId::Gurmukhi,
        ScriptId::PersoArabic,
    ];

    /// The primary Unicode block of the script.
    pub fn block(self) -> RangeInclusive<char> {
        match self {
            ScriptId::Devanagari => '\u{0900}'..='\u{097F}',
            ScriptId::Gujarati => '\u{0A80}'..='\u{0AFF}',
            ScriptId::Gurmukhi => '\u{0A00}'..='\u{0A7F}',
            ScriptId::PersoArabic => '\u{0600}'..='\u{06FF}',
        }
    }

    pub fn contains(self, c: char) -> bool {
        self.block().contains(&c)
    }

    /// Whether decode(encode(s)) can reproduce s.
    pub fn is_invertible(self) -> bool {
        !matches!(self, ScriptId::PersoArabic)
    }

    /// Lower-case file stem used for the bundled table.
    pub fn slug(self) -> &'static str {
        match self {
            ScriptId::Devanagari => "devanagari",
            ScriptId::Gujarati => "gujarati",
            ScriptId::Gurmukhi => "gurmukhi",
            ScriptId::PersoArabic => "perso-arabic",
        }
    }

    pub fn of_char(c: char) -> Option<ScriptId> {
        Self::ALL.into_iter().find(|s| s.contains(c))
    }
}

impl fmt::Display for ScriptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ScriptId::Devanagari => "Devanagari",
            ScriptId::Gujarati => "Gujarati",
            ScriptId::Gurmukhi => "Gurmukhi",
            ScriptId::PersoArabic => "PersoArabic",
        };
        f.write_str(name)
    }
}

impl From<ScriptId> for String {
    fn from(s: ScriptId) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for ScriptId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ScriptId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "devanagari" | "deva" => Ok(ScriptId::Devanagari),
            "gujarati" | "gujr" => Ok(ScriptId::Gujarati),
            "gurmukhi" | "gurumukhi" | "guru" => Ok(ScriptId::Gurmukhi),
            "persoarabic" | "arabic" | "urdu" | "arab" => Ok(ScriptId::PersoArabic),
            _ => Err(Error::Table(format!("unknown script '{s}'"))),
        }
    }
}

/// Detects the script holding the plurality of letter codepoints.
///
/// Letters are codepoints inside any known block plus any other alphabetic
/// codepoint; the returned ratio is the winning block's share of them.
pub fn detect_script(text: &str) -> Result<(ScriptId, f64)> {
    let mut counts = [0usize; ScriptId::ALL.len()];
    let mut letters = 0usize;
    for c in text.chars() {
        if let Some(pos) = ScriptId::ALL.iter().position(|s| s.contains(c)) {
            counts[pos] += 1;
            letters += 1;
        } else if c.is_alphabetic() {
            letters += 1;
        }
    }
    let (best, &count) = counts
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|&(_, n)| n)
        .expect("non-empty");
    if count == 0 {
        return Err(Error::NoIndicContent);
    }
    Ok((ScriptId::ALL[best], count as f64 / letters as f64))
}
