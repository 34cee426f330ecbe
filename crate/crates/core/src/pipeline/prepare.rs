use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::manifest::{CorpusManifest, PairSpec, Split};
use super::{LineFlag, OutputKind, OutputRecord, PipelineRun};
use crate::bpe::{learn_bpe, BpeModel};
use crate::codec::{encode, EncodedText};
use crate::error::{Error, Result};
use crate::io::{read_lines, write_atomic, write_lines};
use crate::table::TableSet;

/// At most this many flagged lines are listed individually in run.json.
const MAX_LISTED_FLAGS: usize = 1000;

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct Settings<'a> {
    tool_version: &'static str,
    manifest: &'a CorpusManifest,
    tables: Vec<(String, u32)>,
    inputs: Vec<(String, String)>,
}

/// SHA-256 over the manifest, the script table versions in use and the
/// contents of every input file.
pub fn settings_hash(manifest: &CorpusManifest, tables: &TableSet) -> Result<String> {
    let mut scripts: Vec<_> = manifest
        .pairs
        .iter()
        .flat_map(|p| [p.source_script, p.target_script])
        .collect();
    scripts.sort();
    scripts.dedup();
    let mut inputs = Vec::new();
    for p in &manifest.pairs {
        for split in Split::ALL {
            if let Some(files) = p.split(split) {
                for f in [&files.source, &files.target] {
                    let path = manifest.resolve(f);
                    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
                    inputs.push((f.display().to_string(), sha256_hex(&bytes)));
                }
            }
        }
    }
    let settings = Settings {
        tool_version: env!("CARGO_PKG_VERSION"),
        manifest,
        tables: scripts
            .iter()
            .map(|&s| (s.slug().to_string(), tables.get(s).version()))
            .collect(),
        inputs,
    };
    let json = serde_json::to_vec(&settings).expect("settings serialize");
    Ok(sha256_hex(&json))
}

struct Side<'a> {
    lang: &'a str,
    encoded: Vec<(Split, Vec<EncodedText>)>,
}

impl Side<'_> {
    fn wx(&self, split: Split) -> Option<Vec<&str>> {
        self.encoded
            .iter()
            .find(|(s, _)| *s == split)
            .map(|(_, e)| e.iter().map(|t| t.wx.as_str()).collect())
    }

    /// Train text, or valid text when train is absent or empty.
    fn bpe_text(&self) -> Vec<&str> {
        [Split::Train, Split::Valid]
            .iter()
            .filter_map(|&s| self.wx(s))
            .find(|lines| lines.iter().any(|l| !l.trim().is_empty()))
            .unwrap_or_default()
    }
}

struct Recorder {
    run: PipelineRun,
}

impl Recorder {
    fn output(
        &mut self,
        path: PathBuf,
        kind: OutputKind,
        pair: &str,
        split: Option<Split>,
        lang: Option<&str>,
        lines: Option<usize>,
    ) {
        self.run.outputs.push(OutputRecord {
            path,
            kind,
            pair: pair.to_string(),
            split,
            lang: lang.map(str::to_string),
            lines,
        });
    }

    fn flag(&mut self, file: &Path, line: usize, text: &EncodedText) {
        self.run.flagged_lines += 1;
        if self.run.flags.len() < MAX_LISTED_FLAGS {
            self.run.flags.push(LineFlag {
                file: file.to_path_buf(),
                line,
                diagnostics: text.diagnostics.clone(),
            });
        }
    }
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("record serializes");
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

fn prepare_pair(manifest: &CorpusManifest, pair: &PairSpec, tables: &TableSet, rec: &mut Recorder) -> Result<()> {
    let dir = manifest.output_dir().join(pair.name());
    let name = pair.name();
    let mut source = Side {
        lang: &pair.source_lang,
        encoded: Vec::new(),
    };
    let mut target = Side {
        lang: &pair.target_lang,
        encoded: Vec::new(),
    };

    for split in Split::ALL {
        let Some(files) = pair.split(split) else { continue };
        let src_path = manifest.resolve(&files.source);
        let tgt_path = manifest.resolve(&files.target);
        let src_lines = read_lines(&src_path)?;
        let tgt_lines = read_lines(&tgt_path)?;
        if src_lines.len() != tgt_lines.len() {
            return Err(Error::AlignmentMismatch {
                left: src_lines.len(),
                right: tgt_lines.len(),
            }
            .in_file(&tgt_path));
        }
        for (side, script, lines, input) in [
            (&mut source, pair.source_script, src_lines, &src_path),
            (&mut target, pair.target_script, tgt_lines, &tgt_path),
        ] {
            let table = tables.get(script);
            let encoded: Vec<EncodedText> = lines.iter().map(|l| encode(l, table)).collect();
            for (i, e) in encoded.iter().enumerate() {
                if !e.diagnostics.is_empty() {
                    rec.flag(input, i + 1, e);
                }
            }
            let stem = format!("{}.{}", split.name(), side.lang);
            let wx_path = dir.join(format!("{stem}.wx"));
            let wx: Vec<&str> = encoded.iter().map(|e| e.wx.as_str()).collect();
            write_lines(&wx_path, &wx)?;
            rec.output(
                wx_path,
                OutputKind::Wx,
                &name,
                Some(split),
                Some(side.lang),
                Some(wx.len()),
            );
            let spans_path = dir.join(format!("{stem}.spans"));
            write_jsonl(&spans_path, &encoded)?;
            rec.output(
                spans_path,
                OutputKind::Spans,
                &name,
                Some(split),
                Some(side.lang),
                Some(encoded.len()),
            );
            side.encoded.push((split, encoded));
        }
    }

    let no_text = || Error::Manifest(format!("pair {name} has no train or valid text to learn BPE from"));
    let learn = |text: Vec<&str>| -> Result<BpeModel> {
        learn_bpe(text, &manifest.options.bpe).map_err(|e| match e {
            Error::EmptyCorpus => no_text(),
            other => other,
        })
    };
    let models: Vec<(&Side, BpeModel, PathBuf)> = if manifest.options.joint_bpe {
        let mut text = source.bpe_text();
        text.extend(target.bpe_text());
        let model = learn(text)?;
        let path = dir.join("bpe.joint.model");
        model.save(&path)?;
        rec.output(path.clone(), OutputKind::BpeModel, &name, None, None, None);
        vec![(&source, model.clone(), path.clone()), (&target, model, path)]
    } else {
        let mut out = Vec::new();
        for side in [&source, &target] {
            let model = learn(side.bpe_text())?;
            let path = dir.join(format!("bpe.{}.model", side.lang));
            model.save(&path)?;
            rec.output(path.clone(), OutputKind::BpeModel, &name, None, Some(side.lang), None);
            out.push((side, model, path));
        }
        out
    };

    for (side, model, _) in &models {
        for (split, encoded) in &side.encoded {
            let tokens: Vec<String> = encoded.iter().map(|e| model.apply(&e.wx).join(" ")).collect();
            let path = dir.join(format!("{}.{}.bpe", split.name(), side.lang));
            write_lines(&path, &tokens)?;
            rec.output(
                path,
                OutputKind::Tokens,
                &name,
                Some(*split),
                Some(side.lang),
                Some(tokens.len()),
            );
        }
    }
    Ok(())
}

/// Encodes every split of every pair to WX, learns BPE and writes token
/// files for an external trainer, plus `run.json` in the output directory.
pub fn prepare(manifest: &CorpusManifest, tables: &TableSet) -> Result<PipelineRun> {
    manifest.validate()?;
    let started_at = now();
    let settings_hash = settings_hash(manifest, tables)?;
    let mut rec = Recorder {
        run: PipelineRun {
            run_id: format!("{}-{started_at}", &settings_hash[..16]),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            settings_hash,
            started_at,
            finished_at: 0,
            outputs: Vec::new(),
            flagged_lines: 0,
            flags: Vec::new(),
        },
    };
    for pair in &manifest.pairs {
        prepare_pair(manifest, pair, tables, &mut rec)?;
    }
    let out = manifest.output_dir();
    let run_path = out.join("run.json");
    rec.output(run_path.clone(), OutputKind::RunRecord, "", None, None, None);
    rec.run.finished_at = now();
    let json = serde_json::to_string_pretty(&rec.run).expect("run serializes");
    write_atomic(&run_path, format!("{json}\n").as_bytes())?;
    Ok(rec.run)
}
