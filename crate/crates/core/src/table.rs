//! Script tables: the data-driven codepoint ↔ WX mapping for one script.
//!
//! Tables are plain tab-separated text so they can be audited and corrected
//! without touching code. The four bundled tables are compiled in; a table
//! directory can override any of them at runtime.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::script::ScriptId;

/// Role a codepoint plays during transduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CharClass {
    /// Independent vowel letter.
    Vowel,
    /// Dependent vowel sign (maatraa).
    Matra,
    Consonant,
    /// Anusvara, visarga, candrabindu.
    Sign,
    Nukta,
    Virama,
    Digit,
    /// Precomposed consonant + nukta; encodes like the decomposed pair.
    NuktaForm,
    /// Direct one-way mapping with no inherent vowel (Perso-Arabic).
    Letter,
    /// Do-chashmi he: aspirates the preceding letter (Perso-Arabic).
    Aspirate,
    /// Consumed without output (Perso-Arabic).
    Skip,
}

impl FromStr for CharClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "vowel" => CharClass::Vowel,
            "matra" => CharClass::Matra,
            "consonant" => CharClass::Consonant,
            "sign" => CharClass::Sign,
            "nukta" => CharClass::Nukta,
            "virama" => CharClass::Virama,
            "digit" => CharClass::Digit,
            "nukta-form" => CharClass::NuktaForm,
            "letter" => CharClass::Letter,
            "aspirate" => CharClass::Aspirate,
            "skip" => CharClass::Skip,
            other => return Err(format!("unknown class '{other}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub class: CharClass,
    pub wx: String,
}

/// A WX symbol as seen by the decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum DecodeSym {
    Consonant(char),
    Vowel { independent: char, matra: Option<char> },
    Sign(char),
    Nukta(char),
    Digit(char),
}

/// Bidirectional mapping between one script's codepoints and WX.
#[derive(Debug, Clone)]
pub struct ScriptTable {
    script: ScriptId,
    version: u32,
    invertible: bool,
    entries: HashMap<char, Entry>,
    virama: Option<char>,
    decode: HashMap<String, DecodeSym>,
    max_symbol_len: usize,
}

const DEVANAGARI: &str = include_str!("../tables/devanagari.tsv");
const GUJARATI: &str = include_str!("../tables/gujarati.tsv");
const GURMUKHI: &str = include_str!("../tables/gurmukhi.tsv");
const PERSO_ARABIC: &str = include_str!("../tables/perso-arabic.tsv");

impl ScriptTable {
    /// The table compiled into the library.
    pub fn bundled(script: ScriptId) -> ScriptTable {
        let text = match script {
            ScriptId::Devanagari => DEVANAGARI,
            ScriptId::Gujarati => GUJARATI,
            ScriptId::Gurmukhi => GURMUKHI,
            ScriptId::PersoArabic => PERSO_ARABIC,
        };
        Self::parse(text).expect("bundled table is valid")
    }

    pub fn load(path: &Path) -> Result<ScriptTable> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.in_file(path))
    }

    pub fn parse(text: &str) -> Result<ScriptTable> {
        let mut script = None;
        let mut version = None;
        let mut invertible = None;
        let mut block = None;
        let mut entries = HashMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[0] {
                "script" => {
                    let value = fields.get(1).ok_or_else(|| Error::format(lineno, "missing script"))?;
                    script = Some(
                        value
                            .parse::<ScriptId>()
                            .map_err(|e| Error::format(lineno, e.to_string()))?,
                    );
                }
                "version" => {
                    let value = fields.get(1).and_then(|v| v.parse().ok());
                    version = Some(value.ok_or_else(|| Error::format(lineno, "bad version"))?);
                }
                "invertible" => {
                    invertible = Some(match fields.get(1).copied() {
                        Some("yes") => true,
                        Some("no") => false,
                        _ => return Err(Error::format(lineno, "invertible must be yes or no")),
                    });
                }
                "block" => {
                    let lo = fields.get(1).and_then(|v| parse_codepoint(v));
                    let hi = fields.get(2).and_then(|v| parse_codepoint(v));
                    match (lo, hi) {
                        (Some(lo), Some(hi)) if lo <= hi => block = Some(lo..=hi),
                        _ => return Err(Error::format(lineno, "bad block range")),
                    }
                }
                cp => {
                    if fields.len() != 4 {
                        return Err(Error::format(lineno, "expected 4 tab-separated fields"));
                    }
                    let c =
                        parse_codepoint(cp).ok_or_else(|| Error::format(lineno, format!("bad codepoint '{cp}'")))?;
                    let class: CharClass = fields[2].parse().map_err(|e: String| Error::format(lineno, e))?;
                    let wx = match fields[3] {
                        "-" => String::new(),
                        w => w.to_string(),
                    };
                    if !wx.bytes().all(|b| b.is_ascii_alphanumeric()) {
                        return Err(Error::format(
                            lineno,
                            format!("WX output '{wx}' is not ASCII alphanumeric"),
                        ));
                    }
                    let needs_wx = !matches!(class, CharClass::Virama | CharClass::Aspirate | CharClass::Skip);
                    if needs_wx == wx.is_empty() {
                        return Err(Error::format(
                            lineno,
                            "WX output must be '-' exactly for virama/aspirate/skip",
                        ));
                    }
                    if entries.insert(c, Entry { class, wx }).is_some() {
                        return Err(Error::format(lineno, format!("duplicate codepoint {cp}")));
                    }
                }
            }
        }

        let script = script.ok_or_else(|| Error::Table("missing 'script' header".into()))?;
        let block = block.ok_or_else(|| Error::Table("missing 'block' header".into()))?;
        if block != script.block() {
            return Err(Error::Table(format!("block does not match the {script} block")));
        }
        if let Some(c) = entries.keys().find(|c| !block.contains(c)) {
            return Err(Error::Table(format!(
                "U+{:04X} lies outside the {script} block",
                *c as u32
            )));
        }
        let invertible = invertible.unwrap_or(script.is_invertible());
        if invertible != script.is_invertible() {
            return Err(Error::Table(format!("{script} invertibility flag is wrong")));
        }
        let virama = entries
            .iter()
            .find(|(_, e)| e.class == CharClass::Virama)
            .map(|(c, _)| *c);

        let decode = if invertible {
            build_decoder(&entries)?
        } else {
            HashMap::new()
        };
        let max_symbol_len = decode.keys().map(String::len).max().unwrap_or(1);

        Ok(ScriptTable {
            script,
            version: version.unwrap_or(1),
            invertible,
            entries,
            virama,
            decode,
            max_symbol_len,
        })
    }

    pub fn script(&self) -> ScriptId {
        self.script
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn is_invertible(&self) -> bool {
        self.invertible
    }

    pub fn get(&self, c: char) -> Option<&Entry> {
        self.entries.get(&c)
    }

    pub fn virama(&self) -> Option<char> {
        self.virama
    }

    /// All entries ordered by codepoint.
    pub fn entries(&self) -> impl Iterator<Item = (char, &Entry)> {
        let sorted: BTreeMap<char, &Entry> = self.entries.iter().map(|(c, e)| (*c, e)).collect();
        sorted.into_iter()
    }

    pub(crate) fn decode_symbol(&self, wx: &str) -> Option<&DecodeSym> {
        self.decode.get(wx)
    }

    pub(crate) fn max_symbol_len(&self) -> usize {
        self.max_symbol_len
    }

    /// Every WX symbol the decoder accepts.
    pub fn wx_symbols(&self) -> impl Iterator<Item = &str> {
        self.decode.keys().map(String::as_str)
    }
}

fn parse_codepoint(s: &str) -> Option<char> {
    let s = s.trim_start_matches("U+");
    u32::from_str_radix(s, 16).ok().and_then(char::from_u32)
}

/// Builds the WX → codepoint map, rejecting tables whose inverse would be
/// ambiguous.
fn build_decoder(entries: &HashMap<char, Entry>) -> Result<HashMap<String, DecodeSym>> {
    let mut independent: HashMap<&str, char> = HashMap::new();
    let mut matras: HashMap<&str, char> = HashMap::new();
    let mut decode: HashMap<String, DecodeSym> = HashMap::new();

    let mut sorted: Vec<(&char, &Entry)> = entries.iter().collect();
    sorted.sort_by_key(|(c, _)| **c);

    let mut insert = |wx: &str, sym: DecodeSym, c: char| -> Result<()> {
        if let Some(prev) = decode.insert(wx.to_string(), sym) {
            return Err(Error::Table(format!(
                "WX '{wx}' is produced by U+{:04X} and by an earlier entry ({prev:?}); decode would be ambiguous",
                c as u32
            )));
        }
        Ok(())
    };

    for (&c, entry) in &sorted {
        let wx = entry.wx.as_str();
        match entry.class {
            CharClass::Consonant => insert(wx, DecodeSym::Consonant(c), c)?,
            CharClass::Sign => insert(wx, DecodeSym::Sign(c), c)?,
            CharClass::Nukta => insert(wx, DecodeSym::Nukta(c), c)?,
            CharClass::Digit => insert(wx, DecodeSym::Digit(c), c)?,
            CharClass::Vowel => {
                if independent.insert(wx, c).is_some() {
                    return Err(Error::Table(format!("two independent vowels map to '{wx}'")));
                }
            }
            CharClass::Matra => {
                if matras.insert(wx, c).is_some() {
                    return Err(Error::Table(format!("two vowel signs map to '{wx}'")));
                }
            }
            CharClass::NuktaForm | CharClass::Virama => {}
            CharClass::Letter | CharClass::Aspirate | CharClass::Skip => {
                return Err(Error::Table(format!(
                    "class of U+{:04X} is only valid in one-directional tables",
                    c as u32
                )));
            }
        }
    }
    for (wx, c) in &matras {
        if !independent.contains_key(wx) {
            return Err(Error::Table(format!(
                "vowel sign U+{:04X} ('{wx}') has no independent vowel",
                *c as u32
            )));
        }
    }
    for (wx, c) in independent {
        let sym = DecodeSym::Vowel {
            independent: c,
            matra: matras.get(wx).copied(),
        };
        if decode.insert(wx.to_string(), sym).is_some() {
            return Err(Error::Table(format!("WX '{wx}' is both a vowel and another symbol")));
        }
    }
    if !decode.contains_key("a") {
        return Err(Error::Table("table lacks the vowel 'a'".into()));
    }
    // NuktaForm outputs must be reachable as base + nukta.
    for (&c, entry) in &sorted {
        if entry.class == CharClass::NuktaForm && !decodes_greedily(&decode, &entry.wx) {
            return Err(Error::Table(format!(
                "precomposed U+{:04X} maps to '{}', which the decoder cannot split",
                c as u32, entry.wx
            )));
        }
    }
    Ok(decode)
}

fn decodes_greedily(decode: &HashMap<String, DecodeSym>, wx: &str) -> bool {
    let max = decode.keys().map(String::len).max().unwrap_or(1);
    let mut rest = wx;
    while !rest.is_empty() {
        let hit = (1..=max.min(rest.len()))
            .rev()
            .find(|&n| rest.is_char_boundary(n) && decode.contains_key(&rest[..n]));
        match hit {
            Some(n) => rest = &rest[n..],
            None => return false,
        }
    }
    true
}

/// The four tables, optionally overridden from a directory.
#[derive(Debug, Clone)]
pub struct TableSet {
    tables: Vec<ScriptTable>,
}

impl TableSet {
    pub fn bundled() -> TableSet {
        TableSet {
            tables: ScriptId::ALL.iter().map(|&s| ScriptTable::bundled(s)).collect(),
        }
    }

    /// Loads `<dir>/<slug>.tsv` for each script, falling back to the
    /// bundled table when the file is absent.
    pub fn from_dir(dir: &Path) -> Result<TableSet> {
        let mut tables = Vec::with_capacity(ScriptId::ALL.len());
        for script in ScriptId::ALL {
            let path = dir.join(format!("{}.tsv", script.slug()));
            let table = if path.exists() {
                let table = ScriptTable::load(&path)?;
                if table.script() != script {
                    return Err(Error::Table(format!(
                        "{} declares script {}",
                        path.display(),
                        table.script()
                    )));
                }
                table
            } else {
                ScriptTable::bundled(script)
            };
            tables.push(table);
        }
        Ok(TableSet { tables })
    }

    pub fn get(&self, script: ScriptId) -> &ScriptTable {
        let idx = ScriptId::ALL.iter().position(|&s| s == script).expect("known script");
        &self.tables[idx]
    }
}

impl Default for TableSet {
    fn default() -> Self {
        Self::bundled()
    }
}
