//! Transduction between native Indic text and WX.
//!
//! Encoding is total: anything the table does not cover is copied into a
//! passthrough span, so code-switched material survives untouched. Decoding
//! is the deterministic inverse for the invertible scripts.

use serde::{Deserialize, Serialize};
use unicode_normalization::char::compose;

use crate::error::{Error, Result};
use crate::script::ScriptId;
use crate::table::{CharClass, DecodeSym, ScriptTable};

const DANDA: char = '\u{0964}';
const DOUBLE_DANDA: char = '\u{0965}';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanKind {
    Transliterated,
    Passthrough,
}

/// Byte range of the WX output and how it was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub kind: SpanKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// Dependent vowel sign with no consonant to attach to.
    OrphanVowelSign,
    OrphanVirama,
    OrphanNukta,
    /// In-block codepoint with no table entry; passed through.
    UnmappedCodepoint,
    /// ASCII letter sequence the decoder has no symbol for.
    UnmappableSymbol,
    /// Character outside the WX alphabet.
    OutsideAlphabet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Byte offset into the text being processed.
    pub offset: usize,
    pub kind: DiagnosticKind,
    pub symbol: String,
}

/// WX output of [`encode`] with passthrough annotations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedText {
    pub wx: String,
    pub spans: Vec<Span>,
    pub source_script: ScriptId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

impl EncodedText {
    pub fn span_text(&self, span: &Span) -> &str {
        &self.wx[span.start..span.end]
    }

    /// Concatenation of all passthrough span contents.
    pub fn passthrough(&self) -> String {
        self.spans
            .iter()
            .filter(|s| s.kind == SpanKind::Passthrough)
            .map(|s| self.span_text(s))
            .collect()
    }
}

struct Encoder<'t> {
    table: &'t ScriptTable,
    out: String,
    spans: Vec<Span>,
    diagnostics: Vec<Diagnostic>,
    // a consonant was emitted and its inherent vowel is still undecided
    pending: bool,
}

impl<'t> Encoder<'t> {
    fn new(table: &'t ScriptTable, capacity: usize) -> Self {
        Encoder {
            table,
            out: String::with_capacity(capacity),
            spans: Vec::new(),
            diagnostics: Vec::new(),
            pending: false,
        }
    }

    fn push(&mut self, s: &str, kind: SpanKind) {
        if s.is_empty() {
            return;
        }
        let start = self.out.len();
        self.out.push_str(s);
        match self.spans.last_mut() {
            Some(last) if last.kind == kind && last.end == start => last.end = self.out.len(),
            _ => self.spans.push(Span {
                start,
                end: self.out.len(),
                kind,
            }),
        }
    }

    fn wx(&mut self, s: &str) {
        self.push(s, SpanKind::Transliterated);
    }

    fn resolve_inherent(&mut self) {
        if self.pending {
            self.wx("a");
            self.pending = false;
        }
    }

    fn flag(&mut self, offset: usize, kind: DiagnosticKind, c: char) {
        self.diagnostics.push(Diagnostic {
            offset,
            kind,
            symbol: c.to_string(),
        });
    }

    fn brahmic(&mut self, offset: usize, c: char) {
        let table = self.table;
        let entry = match table.get(c) {
            Some(e) => e,
            None => {
                self.resolve_inherent();
                let mut buf = [0u8; 4];
                self.push(c.encode_utf8(&mut buf), SpanKind::Passthrough);
                if table.script().contains(c) && c != DANDA && c != DOUBLE_DANDA {
                    self.flag(offset, DiagnosticKind::UnmappedCodepoint, c);
                }
                return;
            }
        };
        match entry.class {
            CharClass::Consonant | CharClass::NuktaForm => {
                self.resolve_inherent();
                self.wx(&entry.wx);
                self.pending = true;
            }
            CharClass::Nukta => {
                if !self.pending {
                    self.flag(offset, DiagnosticKind::OrphanNukta, c);
                }
                self.wx(&entry.wx);
            }
            CharClass::Virama => {
                if !self.pending {
                    self.flag(offset, DiagnosticKind::OrphanVirama, c);
                }
                self.pending = false;
            }
            CharClass::Matra => {
                if !self.pending {
                    self.flag(offset, DiagnosticKind::OrphanVowelSign, c);
                }
                self.pending = false;
                self.wx(&entry.wx);
            }
            CharClass::Vowel | CharClass::Sign | CharClass::Digit => {
                self.resolve_inherent();
                self.wx(&entry.wx);
            }
            // one-directional classes never appear in Brahmic tables
            CharClass::Letter | CharClass::Aspirate | CharClass::Skip => {
                self.resolve_inherent();
                self.wx(&entry.wx);
            }
        }
    }

    fn perso_arabic(&mut self, offset: usize, c: char) {
        let table = self.table;
        match table.get(c) {
            Some(entry) => match entry.class {
                CharClass::Aspirate => {
                    let last = self.out.chars().last();
                    let aspirable = matches!(
                        self.spans.last(),
                        Some(s) if s.kind == SpanKind::Transliterated && s.end == self.out.len()
                    );
                    match last {
                        Some(l) if aspirable && "kgcjtdwxpb".contains(l) => {
                            self.out.pop();
                            self.out.push(l.to_ascii_uppercase());
                        }
                        _ => self.wx("h"),
                    }
                }
                CharClass::Skip => {}
                _ => self.wx(&entry.wx),
            },
            None => {
                let mut buf = [0u8; 4];
                self.push(c.encode_utf8(&mut buf), SpanKind::Passthrough);
                if table.script().contains(c) {
                    self.flag(offset, DiagnosticKind::UnmappedCodepoint, c);
                }
            }
        }
    }
}

/// Projects `text` written in `table`'s script onto WX.
pub fn encode(text: &str, table: &ScriptTable) -> EncodedText {
    let mut enc = Encoder::new(table, text.len());
    let brahmic = table.is_invertible();
    for (offset, c) in text.char_indices() {
        if brahmic {
            enc.brahmic(offset, c);
        } else {
            enc.perso_arabic(offset, c);
        }
    }
    enc.resolve_inherent();
    EncodedText {
        wx: enc.out,
        spans: enc.spans,
        source_script: table.script(),
        diagnostics: enc.diagnostics,
    }
}

/// Decoder output together with any symbols it could not map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub text: String,
    pub diagnostics: Vec<Diagnostic>,
}

struct Decoder<'t> {
    table: &'t ScriptTable,
    out: String,
    diagnostics: Vec<Diagnostic>,
    // last output was a consonant (plus optional nukta) with no vowel yet
    after_consonant: bool,
}

impl<'t> Decoder<'t> {
    fn close_consonant(&mut self) {
        if self.after_consonant {
            if let Some(v) = self.table.virama() {
                self.out.push(v);
            }
            self.after_consonant = false;
        }
    }

    fn run(&mut self, wx: &str, base_offset: usize) {
        let bytes = wx.as_bytes();
        let max = self.table.max_symbol_len();
        let mut i = 0;
        while i < wx.len() {
            if bytes[i].is_ascii_alphanumeric() {
                let avail = bytes[i..]
                    .iter()
                    .take(max)
                    .take_while(|b| b.is_ascii_alphanumeric())
                    .count();
                let hit = (1..=avail)
                    .rev()
                    .find_map(|n| self.table.decode_symbol(&wx[i..i + n]).map(|sym| (n, sym)));
                match hit {
                    Some((n, sym)) => {
                        self.symbol(sym);
                        i += n;
                    }
                    None => {
                        self.close_consonant();
                        self.out.push(bytes[i] as char);
                        self.diagnostics.push(Diagnostic {
                            offset: base_offset + i,
                            kind: DiagnosticKind::UnmappableSymbol,
                            symbol: (bytes[i] as char).to_string(),
                        });
                        i += 1;
                    }
                }
            } else {
                let c = wx[i..].chars().next().expect("in bounds");
                self.close_consonant();
                self.out.push(c);
                i += c.len_utf8();
            }
        }
    }

    fn symbol(&mut self, sym: &DecodeSym) {
        match *sym {
            DecodeSym::Consonant(c) => {
                self.close_consonant();
                self.out.push(c);
                self.after_consonant = true;
            }
            DecodeSym::Nukta(c) => {
                // emit the NFC spelling: a few consonant + nukta pairs compose
                let composed = match self.out.chars().next_back() {
                    Some(base) if self.after_consonant => compose(base, c),
                    _ => None,
                };
                match composed {
                    Some(k) => {
                        self.out.pop();
                        self.out.push(k);
                    }
                    None => self.out.push(c),
                }
            }
            DecodeSym::Vowel { independent, matra } => {
                if self.after_consonant {
                    self.after_consonant = false;
                    match matra {
                        Some(m) => self.out.push(m),
                        // inherent vowel: nothing to write
                        None if independent == self.inherent() => {}
                        None => {
                            if let Some(v) = self.table.virama() {
                                self.out.push(v);
                            }
                            self.out.push(independent);
                        }
                    }
                } else {
                    self.out.push(independent);
                }
            }
            DecodeSym::Sign(c) | DecodeSym::Digit(c) => {
                self.close_consonant();
                self.out.push(c);
            }
        }
    }

    fn inherent(&self) -> char {
        match self.table.decode_symbol("a") {
            Some(DecodeSym::Vowel { independent, .. }) => *independent,
            _ => '\0',
        }
    }
}

/// Decodes WX back to native script, reporting unmappable symbols.
///
/// Every ASCII letter is read as WX; use [`decode_spans`] to keep
/// passthrough regions of an [`EncodedText`] intact.
pub fn decode_with_diagnostics(wx: &str, table: &ScriptTable) -> Result<Decoded> {
    if !table.is_invertible() {
        return Err(Error::NonInvertibleScript(table.script()));
    }
    let mut dec = Decoder {
        table,
        out: String::with_capacity(wx.len() * 3),
        diagnostics: Vec::new(),
        after_consonant: false,
    };
    dec.run(wx, 0);
    dec.close_consonant();
    Ok(Decoded {
        text: dec.out,
        diagnostics: dec.diagnostics,
    })
}

pub fn decode(wx: &str, table: &ScriptTable) -> Result<String> {
    decode_with_diagnostics(wx, table).map(|d| d.text)
}

/// Decodes only the transliterated spans, copying passthrough spans verbatim.
pub fn decode_spans(encoded: &EncodedText, table: &ScriptTable) -> Result<Decoded> {
    if !table.is_invertible() {
        return Err(Error::NonInvertibleScript(table.script()));
    }
    let mut dec = Decoder {
        table,
        out: String::with_capacity(encoded.wx.len() * 3),
        diagnostics: Vec::new(),
        after_consonant: false,
    };
    for span in &encoded.spans {
        let text = encoded.span_text(span);
        match span.kind {
            SpanKind::Transliterated => dec.run(text, span.start),
            SpanKind::Passthrough => {
                dec.close_consonant();
                dec.out.push_str(text);
            }
        }
    }
    dec.close_consonant();
    Ok(Decoded {
        text: dec.out,
        diagnostics: dec.diagnostics,
    })
}

fn allowed_punctuation(c: char) -> bool {
    matches!(
        c,
        '.' | ',' | ';' | ':' | '!' | '?' | '\'' | '"' | '(' | ')' | '-' | '/' | DANDA | DOUBLE_DANDA
    )
}

/// Reports symbols outside the WX alphabet of `table` and structurally
/// undecodable sequences. An empty result means decoding is exact.
pub fn validate_wx(wx: &str, table: &ScriptTable) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let bytes = wx.as_bytes();
    let max = table.max_symbol_len();
    let mut after_consonant = false;
    let mut i = 0;
    while i < wx.len() {
        let c = wx[i..].chars().next().expect("in bounds");
        if c.is_ascii_alphanumeric() {
            let avail = bytes[i..]
                .iter()
                .take(max)
                .take_while(|b| b.is_ascii_alphanumeric())
                .count();
            let hit = (1..=avail)
                .rev()
                .find_map(|n| table.decode_symbol(&wx[i..i + n]).map(|sym| (n, sym)));
            match hit {
                Some((n, sym)) => {
                    match sym {
                        DecodeSym::Consonant(_) => after_consonant = true,
                        DecodeSym::Nukta(_) => {
                            if !after_consonant {
                                out.push(Diagnostic {
                                    offset: i,
                                    kind: DiagnosticKind::OrphanNukta,
                                    symbol: wx[i..i + n].to_string(),
                                });
                            }
                        }
                        _ => after_consonant = false,
                    }
                    i += n;
                }
                None => {
                    out.push(Diagnostic {
                        offset: i,
                        kind: DiagnosticKind::UnmappableSymbol,
                        symbol: c.to_string(),
                    });
                    after_consonant = false;
                    i += 1;
                }
            }
        } else {
            if !(c.is_whitespace() || allowed_punctuation(c)) {
                out.push(Diagnostic {
                    offset: i,
                    kind: DiagnosticKind::OutsideAlphabet,
                    symbol: c.to_string(),
                });
            }
            after_consonant = false;
            i += c.len_utf8();
        }
    }
    out
}
