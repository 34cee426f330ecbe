use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LineFlag;
use crate::bpe::undo_bpe;
use crate::codec::{decode_spans, decode_with_diagnostics, validate_wx, EncodedText};
use crate::error::{Error, Result};
use crate::io::{read_lines, write_lines};
use crate::table::ScriptTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostprocessReport {
    pub lines: usize,
    /// Lines whose passthrough regions were restored from recorded spans.
    pub restored_with_spans: usize,
    pub flagged_lines: usize,
    pub flags: Vec<LineFlag>,
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Reads the JSON-lines span file written by `prepare`.
pub fn read_spans(path: &Path) -> Result<Vec<EncodedText>> {
    read_lines(path)?
        .iter()
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::format(i + 1, e.to_string()).in_file(path)))
        .collect()
}

/// Undoes BPE and decodes each hypothesis line back to `table`'s script.
///
/// When `recorded` holds the encoding of the same line (equal WX up to
/// whitespace), its spans drive decoding so passthrough text is restored
/// verbatim. Lines that fail WX validation are kept as WX and flagged.
pub fn postprocess_lines<S: AsRef<str>>(
    hyps: &[S],
    table: &ScriptTable,
    recorded: Option<&[EncodedText]>,
    marker: &str,
    file_label: &Path,
) -> Result<(Vec<String>, PostprocessReport)> {
    if !table.is_invertible() {
        return Err(Error::NonInvertibleScript(table.script()));
    }
    let mut out = Vec::with_capacity(hyps.len());
    let mut report = PostprocessReport {
        lines: hyps.len(),
        restored_with_spans: 0,
        flagged_lines: 0,
        flags: Vec::new(),
    };
    for (i, line) in hyps.iter().enumerate() {
        let tokens: Vec<&str> = line.as_ref().split_whitespace().collect();
        let wx = undo_bpe(&tokens, marker);
        if let Some(rec) = recorded.and_then(|r| r.get(i)) {
            if normalize_ws(&rec.wx) == normalize_ws(&wx) {
                let decoded = decode_spans(rec, table)?;
                if decoded.diagnostics.is_empty() {
                    out.push(decoded.text);
                    report.restored_with_spans += 1;
                    continue;
                }
            }
        }
        let mut diagnostics = validate_wx(&wx, table);
        if diagnostics.is_empty() {
            let decoded = decode_with_diagnostics(&wx, table)?;
            diagnostics = decoded.diagnostics;
            if diagnostics.is_empty() {
                out.push(decoded.text);
                continue;
            }
        }
        report.flagged_lines += 1;
        report.flags.push(LineFlag {
            file: file_label.to_path_buf(),
            line: i + 1,
            diagnostics,
        });
        out.push(wx);
    }
    Ok((out, report))
}

/// File-level [`postprocess_lines`]: reads BPE hypotheses, writes native text.
pub fn postprocess(
    hyp_path: &Path,
    table: &ScriptTable,
    spans_path: Option<&Path>,
    marker: &str,
    out_path: &Path,
) -> Result<PostprocessReport> {
    let hyps = read_lines(hyp_path)?;
    let recorded = spans_path.map(read_spans).transpose()?;
    let (lines, report) =
        postprocess_lines(&hyps, table, recorded.as_deref(), marker, hyp_path).map_err(|e| e.in_file(hyp_path))?;
    write_lines(out_path, &lines)?;
    Ok(report)
}
