//! File-level orchestration: prepare corpora for an external trainer,
//! restore its output, and produce analysis and evaluation reports.

mod manifest;
mod postprocess;
mod prepare;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use manifest::{CorpusManifest, PairSpec, PipelineOptions, Split, SplitFiles};
pub use postprocess::{postprocess, postprocess_lines, read_spans, PostprocessReport};
pub use prepare::{prepare, settings_hash};

use crate::analysis::{
    entropy_report, pairwise_surface_similarity, perplexity_matrix, ssnglm_matrix, EntropyReport, LanguageCorpus,
    MetricReport, SimilarityMatrix,
};
use crate::codec::{encode, Diagnostic};
use crate::error::{Error, Result};
use crate::io::{read_lines, write_atomic};
use crate::lm::LmConfig;
use crate::metrics::{bleu, evaluate_metric, BleuMode, EvalResult, MetricKind};
use crate::script::{detect_script, ScriptId};
use crate::table::TableSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Wx,
    Spans,
    Tokens,
    BpeModel,
    RunRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: PathBuf,
    pub kind: OutputKind,
    pub pair: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lines: Option<usize>,
}

/// A line that produced diagnostics; it was processed, not dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineFlag {
    pub file: PathBuf,
    /// 1-based.
    pub line: usize,
    pub diagnostics: Vec<Diagnostic>,
}

/// Provenance of a `prepare` run, written as `run.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub run_id: String,
    pub tool_version: String,
    /// Deterministic for identical manifests and inputs.
    pub settings_hash: String,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub finished_at: u64,
    pub outputs: Vec<OutputRecord>,
    pub flagged_lines: usize,
    pub flags: Vec<LineFlag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Entropy,
    Redundancy,
    Ssnglm,
    Perplexity,
    Surface,
}

impl Analysis {
    pub const ALL: [Analysis; 5] = [
        Analysis::Entropy,
        Analysis::Redundancy,
        Analysis::Ssnglm,
        Analysis::Perplexity,
        Analysis::Surface,
    ];
}

impl FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "entropy" => Analysis::Entropy,
            "redundancy" => Analysis::Redundancy,
            "ssnglm" => Analysis::Ssnglm,
            "perplexity" => Analysis::Perplexity,
            "surface" => Analysis::Surface,
            other => return Err(Error::format(0, format!("unknown analysis '{other}'"))),
        })
    }
}

/// A monolingual corpus in its native script.
#[derive(Debug, Clone)]
pub struct ScriptedCorpus {
    pub label: String,
    /// Detected from the text when absent.
    pub script: Option<ScriptId>,
    pub lines: Vec<String>,
}

/// Two aligned sides of a parallel corpus.
#[derive(Debug, Clone)]
pub struct ParallelCorpus {
    pub source: ScriptedCorpus,
    pub target: ScriptedCorpus,
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeInput {
    pub corpora: Vec<ScriptedCorpus>,
    pub parallel: Vec<ParallelCorpus>,
}

impl AnalyzeInput {
    /// Languages and pairs of a manifest, each read from its first
    /// available split (train, then valid, then test).
    pub fn from_manifest(m: &CorpusManifest) -> Result<AnalyzeInput> {
        let mut input = AnalyzeInput::default();
        for p in &m.pairs {
            let Some(files) = Split::ALL.iter().find_map(|&s| p.split(s)) else {
                continue;
            };
            let side = |label: &str, script, path: &Path| -> Result<ScriptedCorpus> {
                let path = m.resolve(path);
                Ok(ScriptedCorpus {
                    label: label.to_string(),
                    script: Some(script),
                    lines: read_lines(&path)?,
                })
            };
            let source = side(&p.source_lang, p.source_script, &files.source)?;
            let target = side(&p.target_lang, p.target_script, &files.target)?;
            for c in [&source, &target] {
                if !input.corpora.iter().any(|x| x.label == c.label) {
                    input.corpora.push(c.clone());
                }
            }
            input.parallel.push(ParallelCorpus { source, target });
        }
        Ok(input)
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub lm: LmConfig,
    /// Project every corpus to WX before the cross-lingual analyses.
    pub wx: bool,
    /// Restrict entropy statistics to the first N lines.
    pub max_lines: Option<usize>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            lm: LmConfig::default(),
            wx: true,
            max_lines: None,
        }
    }
}

/// Raw-script and WX entropy of one language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyComparison {
    pub language: String,
    pub script: Option<ScriptId>,
    pub raw: EntropyReport,
    pub wx: Option<EntropyReport>,
    /// Raw minus WX corpus character entropy.
    pub difference: Option<f64>,
}

fn resolve_script(c: &ScriptedCorpus) -> Option<ScriptId> {
    c.script
        .or_else(|| detect_script(&c.lines.join("\n")).ok().map(|(s, _)| s))
}

fn to_wx(c: &ScriptedCorpus, tables: &TableSet) -> Option<Vec<String>> {
    let table = tables.get(resolve_script(c)?);
    Some(c.lines.iter().map(|l| encode(l, table).wx).collect())
}

fn comparable(c: &ScriptedCorpus, tables: &TableSet, wx: bool) -> Vec<String> {
    if wx {
        to_wx(c, tables).unwrap_or_else(|| c.lines.clone())
    } else {
        c.lines.clone()
    }
}

pub fn entropy_comparison(
    c: &ScriptedCorpus,
    tables: &TableSet,
    max_lines: Option<usize>,
) -> Result<EntropyComparison> {
    let raw = entropy_report(&c.label, &c.lines, max_lines)?;
    let wx = to_wx(c, tables)
        .map(|lines| entropy_report(&c.label, &lines, max_lines))
        .transpose()?;
    let difference = wx.as_ref().map(|w| raw.corpus_char_entropy - w.corpus_char_entropy);
    Ok(EntropyComparison {
        language: c.label.clone(),
        script: resolve_script(c),
        raw,
        wx,
        difference,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

fn write_matrix(dir: &Path, stem: &str, m: &SimilarityMatrix, written: &mut Vec<PathBuf>) -> Result<()> {
    for (name, body) in [
        (format!("{stem}.json"), m.to_json() + "\n"),
        (format!("{stem}.tsv"), m.to_tsv(true)),
        (format!("{stem}.raw.tsv"), m.to_tsv(false)),
    ] {
        let path = dir.join(name);
        write_atomic(&path, body.as_bytes())?;
        written.push(path);
    }
    Ok(())
}

/// Runs the selected analyses and writes TSV/JSON reports into `out_dir`.
/// Returns the written paths.
pub fn analyze(
    input: &AnalyzeInput,
    which: &[Analysis],
    opts: &AnalyzeOptions,
    tables: &TableSet,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let has = |a: Analysis| which.contains(&a);

    if has(Analysis::Entropy) || has(Analysis::Redundancy) {
        let reports = input
            .corpora
            .iter()
            .map(|c| entropy_comparison(c, tables, opts.max_lines).map_err(|e| label_error(e, &c.label)))
            .collect::<Result<Vec<_>>>()?;
        if has(Analysis::Entropy) {
            let path = out_dir.join("entropy.json");
            let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
            write_atomic(&path, (json + "\n").as_bytes())?;
            written.push(path);
            let mut tsv =
                String::from("language\traw_entropy\twx_entropy\tdifference\tword_max\tword_median\tword_average\n");
            for r in &reports {
                let w = r.wx.as_ref().unwrap_or(&r.raw).per_word_entropy;
                let _ = writeln!(
                    tsv,
                    "{}\t{:.6}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
                    r.language,
                    r.raw.corpus_char_entropy,
                    fmt_opt(r.wx.as_ref().map(|w| w.corpus_char_entropy)),
                    fmt_opt(r.difference),
                    w.max,
                    w.median,
                    w.average
                );
            }
            let path = out_dir.join("entropy.tsv");
            write_atomic(&path, tsv.as_bytes())?;
            written.push(path);
        }
        if has(Analysis::Redundancy) {
            let mut tsv = String::from("language\traw_redundancy\twx_redundancy\traw_alphabet\twx_alphabet\n");
            for r in &reports {
                let _ = writeln!(
                    tsv,
                    "{}\t{}\t{}\t{}\t{}",
                    r.language,
                    fmt_opt(r.raw.redundancy),
                    fmt_opt(r.wx.as_ref().and_then(|w| w.redundancy)),
                    r.raw.alphabet_size,
                    r.wx.as_ref()
                        .map_or_else(|| "-".to_string(), |w| w.alphabet_size.to_string())
                );
            }
            let path = out_dir.join("redundancy.tsv");
            write_atomic(&path, tsv.as_bytes())?;
            written.push(path);
        }
    }

    if has(Analysis::Ssnglm) || has(Analysis::Perplexity) {
        let corpora: Vec<LanguageCorpus> = input
            .corpora
            .iter()
            .map(|c| LanguageCorpus::new(c.label.clone(), comparable(c, tables, opts.wx)))
            .collect();
        if has(Analysis::Ssnglm) {
            write_matrix(out_dir, "ssnglm", &ssnglm_matrix(&corpora, &opts.lm)?, &mut written)?;
        }
        if has(Analysis::Perplexity) {
            write_matrix(
                out_dir,
                "perplexity",
                &perplexity_matrix(&corpora, &opts.lm, false)?,
                &mut written,
            )?;
            write_matrix(
                out_dir,
                "perplexity_symmetric",
                &perplexity_matrix(&corpora, &opts.lm, true)?,
                &mut written,
            )?;
        }
    }

    if has(Analysis::Surface) {
        let metrics = [MetricKind::CharBleu, MetricKind::Chrf2, MetricKind::Ter];
        let reports = input
            .parallel
            .iter()
            .map(|p| {
                let s = comparable(&p.source, tables, opts.wx);
                let t = comparable(&p.target, tables, opts.wx);
                pairwise_surface_similarity((&p.source.label, &s), (&p.target.label, &t), &metrics)
            })
            .collect::<Result<Vec<MetricReport>>>()?;
        let path = out_dir.join("surface.json");
        let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
        write_atomic(&path, (json + "\n").as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

fn label_error(e: Error, label: &str) -> Error {
    match e {
        Error::EmptyCorpus => Error::Format {
            line: 0,
            message: format!("corpus for '{label}' has no characters"),
        },
        other => other,
    }
}

/// Scores a hypothesis file against a reference file.
pub fn evaluate(
    hyp_path: &Path,
    ref_path: &Path,
    metrics: &[MetricKind],
    bleu_mode: BleuMode,
) -> Result<Vec<EvalResult>> {
    let hyps = read_lines(hyp_path)?;
    let refs = read_lines(ref_path)?;
    if hyps.len() != refs.len() {
        return Err(Error::AlignmentMismatch {
            left: hyps.len(),
            right: refs.len(),
        }
        .in_file(hyp_path));
    }
    metrics
        .iter()
        .map(|&m| {
            match m {
                MetricKind::Bleu => bleu(&hyps, &refs, 4, bleu_mode),
                other => evaluate_metric(other, &hyps, &refs),
            }
            .map_err(|e| e.in_file(ref_path))
        })
        .collect()
}
