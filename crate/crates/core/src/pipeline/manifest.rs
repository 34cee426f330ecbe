use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bpe::BpeConfig;
use crate::error::{Error, Result};
use crate::script::ScriptId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFiles {
    pub source: PathBuf,
    pub target: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub source_lang: String,
    pub target_lang: String,
    pub source_script: ScriptId,
    pub target_script: ScriptId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<SplitFiles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid: Option<SplitFiles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<SplitFiles>,
}

impl PairSpec {
    pub fn split(&self, split: Split) -> Option<&SplitFiles> {
        match split {
            Split::Train => self.train.as_ref(),
            Split::Valid => self.valid.as_ref(),
            Split::Test => self.test.as_ref(),
        }
    }

    /// Output directory name, `<source>-<target>`.
    pub fn name(&self) -> String {
        format!("{}-{}", self.source_lang, self.target_lang)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineOptions {
    pub bpe: BpeConfig,
    pub lm_order: usize,
    /// One BPE model shared by both sides of a pair.
    pub joint_bpe: bool,
    /// Acknowledges that Perso-Arabic text cannot be restored from WX.
    pub allow_lossy: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            bpe: BpeConfig::default(),
            lm_order: 6,
            joint_bpe: false,
            allow_lossy: false,
        }
    }
}

/// Parallel corpora and settings for a pipeline run, read from TOML.
///
/// ```toml
/// output_dir = "out"
///
/// [options]
/// joint_bpe = false
/// [options.bpe]
/// merges = 5000
///
/// [[pairs]]
/// source_lang = "ne"
/// target_lang = "hi"
/// source_script = "devanagari"
/// target_script = "devanagari"
/// train = { source = "train.ne", target = "train.hi" }
/// test = { source = "test.ne", target = "test.hi" }
/// ```
///
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusManifest {
    pub output_dir: PathBuf,
    #[serde(default)]
    pub options: PipelineOptions,
    pub pairs: Vec<PairSpec>,
    #[serde(skip)]
    base_dir: PathBuf,
}

fn valid_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl CorpusManifest {
    pub fn parse(text: &str, base_dir: &Path) -> Result<CorpusManifest> {
        let mut m: CorpusManifest = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        m.base_dir = base_dir.to_path_buf();
        Ok(m)
    }

    /// Reads and validates a manifest, checking that every input exists.
    pub fn load(path: &Path) -> Result<CorpusManifest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let m = Self::parse(&text, base).map_err(|e| match e {
            Error::Manifest(msg) => Error::Manifest(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        m.validate()?;
        Ok(m)
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Manifest(msg));
        if self.pairs.is_empty() {
            return bad("manifest lists no pairs".into());
        }
        if self.options.lm_order == 0 {
            return bad("lm_order must be at least 1".into());
        }
        let mut seen = BTreeSet::new();
        for p in &self.pairs {
            for lang in [&p.source_lang, &p.target_lang] {
                if !valid_label(lang) {
                    return bad(format!("language label '{lang}' must be ASCII letters, digits or '_'"));
                }
            }
            if p.source_lang == p.target_lang {
                return bad(format!("pair {} uses the same label on both sides", p.name()));
            }
            if !seen.insert(p.name()) {
                return bad(format!("pair {} listed twice", p.name()));
            }
            let lossy = [p.source_script, p.target_script].iter().any(|s| !s.is_invertible());
            if lossy && !self.options.allow_lossy {
                return bad(format!(
                    "pair {} involves a script that cannot be restored from WX; set allow_lossy to proceed",
                    p.name()
                ));
            }
            if Split::ALL.iter().all(|&s| p.split(s).is_none()) {
                return bad(format!("pair {} has no splits", p.name()));
            }
            for split in Split::ALL {
                if let Some(files) = p.split(split) {
                    for f in [&files.source, &files.target] {
                        let path = self.resolve(f);
                        if !path.is_file() {
                            return bad(format!("{}: input file not found", path.display()));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
