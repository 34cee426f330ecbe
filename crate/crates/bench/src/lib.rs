//! Shared inputs for the benchmarks: the bundled sample corpora.

use wxbridge_core::{encode, ScriptId, ScriptTable};

pub const HINDI: &str = include_str!("../../core/data/samples/hi.txt");
pub const MARATHI: &str = include_str!("../../core/data/samples/mr.txt");
pub const NEPALI: &str = include_str!("../../core/data/samples/ne.txt");

pub fn lines(text: &str) -> Vec<String> {
    text.lines().map(str::to_string).collect()
}

/// The sample corpus projected to WX.
pub fn wx_lines(text: &str) -> Vec<String> {
    let table = ScriptTable::bundled(ScriptId::Devanagari);
    text.lines().map(|l| encode(l, &table).wx).collect()
}
