use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use wxbridge_core::bpe::BOUNDARY_MARKER;
use wxbridge_core::codec::decode_with_diagnostics;
use wxbridge_core::io::{read_lines, write_lines};
use wxbridge_core::pipeline::{
    analyze, evaluate, postprocess, prepare, Analysis, AnalyzeInput, AnalyzeOptions, ScriptedCorpus,
};
use wxbridge_core::{
    detect_script, encode, learn_bpe, perplexity, train_char_lm, undo_bpe, BleuMode, BpeConfig, BpeModel, CharNGramLM,
    CorpusManifest, Diagnostic, Error, LmConfig, MetricKind, ScriptId, Smoothing, TableSet,
};

/// WX projection of Indic text, BPE, character LMs and corpus metrics.
#[derive(Parser)]
#[command(name = "wxbridge", version)]
struct Cli {
    /// Directory of script tables overriding the bundled ones.
    #[arg(long, global = true, env = "WXBRIDGE_TABLES")]
    tables: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Input file (stdin when omitted).
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Native script to WX, one line at a time.
    Encode {
        /// Source script; detected from the input when omitted.
        #[arg(short, long)]
        script: Option<ScriptId>,
        /// Also write span annotations (JSON lines) for later restoration.
        #[arg(long)]
        spans: Option<PathBuf>,
        #[command(flatten)]
        io: Io,
    },
    /// WX back to a native script.
    Decode {
        #[arg(short, long)]
        script: ScriptId,
        #[command(flatten)]
        io: Io,
    },
    #[command(subcommand)]
    Bpe(BpeCommand),
    #[command(subcommand)]
    Lm(LmCommand),
    /// Entropy, redundancy, SSNGLM, perplexity and surface-similarity reports.
    Analyze {
        /// Read languages and pairs from a manifest.
        #[arg(long, conflicts_with = "corpus")]
        manifest: Option<PathBuf>,
        /// Monolingual corpus as LABEL=PATH; repeatable.
        #[arg(long, value_parser = parse_labelled)]
        corpus: Vec<(String, PathBuf)>,
        /// Comma-separated subset of entropy,redundancy,ssnglm,perplexity,surface.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "entropy,redundancy,ssnglm,perplexity,surface"
        )]
        which: Vec<Analysis>,
        #[arg(long, default_value_t = 6)]
        order: usize,
        #[arg(long, default_value = "kneser-ney:0.75")]
        smoothing: Smoothing,
        /// Keep corpora in their native script for the cross-lingual analyses.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        max_lines: Option<usize>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Score a hypothesis file against a reference; one JSON record per metric.
    Evaluate {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "bleu,char_bleu,chrf2,ter,wer")]
        metrics: Vec<MetricKind>,
        /// Use min(1, c/r) as the brevity penalty instead of the exponential one.
        #[arg(long)]
        literal_bleu: bool,
        /// Include the parameter signature in each record.
        #[arg(long)]
        signature: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Encode, learn BPE and write token files for every pair in a manifest.
    Prepare {
        manifest: PathBuf,
        /// Share one BPE model between both sides of each pair.
        #[arg(long)]
        joint: bool,
        /// Accept scripts that cannot be restored from WX.
        #[arg(long)]
        allow_lossy: bool,
    },
    /// Undo BPE on hypotheses and decode them to the target script.
    Postprocess {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(short, long)]
        script: ScriptId,
        /// Span file written by `prepare` for the same lines.
        #[arg(long)]
        spans: Option<PathBuf>,
        #[arg(long, default_value = BOUNDARY_MARKER)]
        marker: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum BpeCommand {
    /// Learn merges from one or more WX corpora.
    Learn {
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
        #[arg(long, default_value_t = 5000)]
        merges: usize,
        #[arg(long, default_value_t = 5000)]
        vocab_cap: usize,
        #[arg(long, default_value_t = 2)]
        min_frequency: u64,
        #[arg(short, long)]
        model: PathBuf,
    },
    /// Segment lines into subword tokens.
    Apply {
        #[arg(short, long)]
        model: PathBuf,
        #[command(flatten)]
        io: Io,
    },
    /// Join subword tokens back into words.
    Undo {
        #[arg(long, default_value = BOUNDARY_MARKER)]
        marker: String,
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Subcommand)]
enum LmCommand {
    /// Train a character n-gram model and write it as ARPA.
    Train {
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
        #[arg(long, default_value_t = 6)]
        order: usize,
        #[arg(long, default_value = "kneser-ney:0.75")]
        smoothing: Smoothing,
        /// Do not model the end of sentence.
        #[arg(long)]
        no_eos: bool,
        #[arg(short, long)]
        model: PathBuf,
    },
    /// Per-line log10 probability and scored-token count.
    Score {
        #[arg(short, long)]
        model: PathBuf,
        #[command(flatten)]
        io: Io,
    },
    /// Perplexity of a corpus.
    Ppl {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short, long)]
        input: Option<PathBuf>,
    },
}

fn parse_labelled(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((label, path)) if !label.is_empty() && !path.is_empty() => Ok((label.to_string(), path.into())),
        _ => Err(format!("expected LABEL=PATH, got '{s}'")),
    }
}

fn read_input(path: Option<&Path>) -> anyhow::Result<Vec<String>> {
    match path {
        Some(p) => Ok(read_lines(p)?),
        None => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text).context("reading stdin")?;
            Ok(text.lines().map(str::to_string).collect())
        }
    }
}

fn write_output<S: AsRef<str>>(path: Option<&Path>, lines: &[S]) -> anyhow::Result<()> {
    match path {
        Some(p) => Ok(write_lines(p, lines)?),
        None => {
            let mut out = io::stdout().lock();
            for l in lines {
                writeln!(out, "{}", l.as_ref())?;
            }
            Ok(out.flush()?)
        }
    }
}

fn warn_diagnostics(line: usize, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprintln!("warning: line {line}, byte {}: {:?} '{}'", d.offset, d.kind, d.symbol);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let tables = match &cli.tables {
        Some(dir) => TableSet::from_dir(dir)?,
        None => TableSet::bundled(),
    };
    match cli.command {
        Command::Encode { script, spans, io } => {
            let lines = read_input(io.input.as_deref())?;
            let script = match script {
                Some(s) => s,
                None => detect_script(&lines.join("\n"))?.0,
            };
            let table = tables.get(script);
            let encoded: Vec<_> = lines.iter().map(|l| encode(l, table)).collect();
            for (i, e) in encoded.iter().enumerate() {
                warn_diagnostics(i + 1, &e.diagnostics);
            }
            if let Some(path) = spans {
                let records = encoded
                    .iter()
                    .map(serde_json::to_string)
                    .collect::<Result<Vec<_>, _>>()?;
                write_lines(&path, &records)?;
            }
            let wx: Vec<&str> = encoded.iter().map(|e| e.wx.as_str()).collect();
            write_output(io.output.as_deref(), &wx)?;
        }
        Command::Decode { script, io } => {
            let table = tables.get(script);
            let lines = read_input(io.input.as_deref())?;
            let mut out = Vec::with_capacity(lines.len());
            for (i, l) in lines.iter().enumerate() {
                let decoded = decode_with_diagnostics(l, table)?;
                warn_diagnostics(i + 1, &decoded.diagnostics);
                out.push(decoded.text);
            }
            write_output(io.output.as_deref(), &out)?;
        }
        Command::Bpe(cmd) => run_bpe(cmd)?,
        Command::Lm(cmd) => run_lm(cmd)?,
        Command::Analyze {
            manifest,
            corpus,
            which,
            order,
            smoothing,
            raw,
            max_lines,
            out,
        } => {
            let input = if let Some(path) = manifest {
                AnalyzeInput::from_manifest(&CorpusManifest::load(&path)?)?
            } else {
                if corpus.is_empty() {
                    bail!("give --manifest or at least one --corpus LABEL=PATH");
                }
                let corpora = corpus
                    .into_iter()
                    .map(|(label, path)| {
                        Ok(ScriptedCorpus {
                            label,
                            script: None,
                            lines: read_lines(&path)?,
                        })
                    })
                    .collect::<anyhow::Result<_>>()?;
                AnalyzeInput {
                    corpora,
                    parallel: Vec::new(),
                }
            };
            let opts = AnalyzeOptions {
                lm: LmConfig {
                    order,
                    smoothing,
                    ..LmConfig::default()
                },
                wx: !raw,
                max_lines,
            };
            for path in analyze(&input, &which, &opts, &tables, &out)? {
                println!("{}", path.display());
            }
        }
        Command::Evaluate {
            hyp,
            reference,
            metrics,
            literal_bleu,
            signature,
            output,
        } => {
            let mode = if literal_bleu {
                BleuMode::Literal
            } else {
                BleuMode::Standard
            };
            let mut records = Vec::new();
            for r in evaluate(&hyp, &reference, &metrics, mode)? {
                let mut value = serde_json::to_value(&r)?;
                if !signature {
                    if let Some(obj) = value.as_object_mut() {
                        obj.remove("signature");
                    }
                }
                records.push(serde_json::to_string(&value)?);
            }
            write_output(output.as_deref(), &records)?;
        }
        Command::Prepare {
            manifest,
            joint,
            allow_lossy,
        } => {
            let text = std::fs::read_to_string(&manifest).with_context(|| manifest.display().to_string())?;
            let mut m = CorpusManifest::parse(&text, manifest.parent().unwrap_or(Path::new("")))?;
            m.options.joint_bpe |= joint;
            m.options.allow_lossy |= allow_lossy;
            let run = prepare(&m, &tables)?;
            eprintln!(
                "run {}: {} outputs, {} flagged lines",
                run.run_id,
                run.outputs.len(),
                run.flagged_lines
            );
            println!("{}", m.output_dir().join("run.json").display());
        }
        Command::Postprocess {
            hyp,
            script,
            spans,
            marker,
            output,
        } => {
            let report = postprocess(&hyp, tables.get(script), spans.as_deref(), &marker, &output)?;
            for f in &report.flags {
                warn_diagnostics(f.line, &f.diagnostics);
            }
            eprintln!(
                "{} lines, {} restored from spans, {} flagged",
                report.lines, report.restored_with_spans, report.flagged_lines
            );
        }
    }
    Ok(())
}

fn run_bpe(cmd: BpeCommand) -> anyhow::Result<()> {
    match cmd {
        BpeCommand::Learn {
            corpora,
            merges,
            vocab_cap,
            min_frequency,
            model,
        } => {
            let mut lines = Vec::new();
            for path in &corpora {
                lines.extend(read_lines(path)?);
            }
            let config = BpeConfig {
                merges,
                vocab_cap,
                min_frequency,
            };
            let learned = learn_bpe(&lines, &config)?;
            learned.save(&model)?;
            eprintln!(
                "{} merges, vocabulary {}",
                learned.merges().len(),
                learned.vocab().len()
            );
        }
        BpeCommand::Apply { model, io } => {
            let model = BpeModel::load(&model)?;
            let lines = read_input(io.input.as_deref())?;
            let out: Vec<String> = lines.iter().map(|l| model.apply(l).join(" ")).collect();
            write_output(io.output.as_deref(), &out)?;
        }
        BpeCommand::Undo { marker, io } => {
            let lines = read_input(io.input.as_deref())?;
            let out: Vec<String> = lines
                .iter()
                .map(|l| undo_bpe(&l.split_whitespace().collect::<Vec<_>>(), &marker))
                .collect();
            write_output(io.output.as_deref(), &out)?;
        }
    }
    Ok(())
}

fn run_lm(cmd: LmCommand) -> anyhow::Result<()> {
    match cmd {
        LmCommand::Train {
            corpora,
            order,
            smoothing,
            no_eos,
            model,
        } => {
            let mut lines = Vec::new();
            for path in &corpora {
                lines.extend(read_lines(path)?);
            }
            let config = LmConfig {
                order,
                smoothing,
                include_eos: !no_eos,
            };
            let lm = train_char_lm(&lines, &config)?;
            lm.save_arpa(&model)?;
            eprintln!("order {}, alphabet {}", lm.order(), lm.alphabet_size());
        }
        LmCommand::Score { model, io } => {
            let lm = CharNGramLM::load_arpa(&model)?;
            let lines = read_input(io.input.as_deref())?;
            let out: Vec<String> = lines
                .iter()
                .map(|l| {
                    let s = lm.sentence_logprob(l);
                    format!("{}\t{}", s.total_log10_prob, s.scored_tokens)
                })
                .collect();
            write_output(io.output.as_deref(), &out)?;
        }
        LmCommand::Ppl { model, input } => {
            let lm = CharNGramLM::load_arpa(&model)?;
            let lines = read_input(input.as_deref())?;
            let ppl = perplexity(&lm, &lines)?;
            println!("{ppl}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let data = e.downcast_ref::<Error>().is_some_and(Error::is_data_error);
            ExitCode::from(if data { 2 } else { 1 })
        }
    }
}
