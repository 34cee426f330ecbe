//! WX projection of Indic scripts with the surrounding corpus tooling:
//! subword BPE, character n-gram language models, similarity and
//! complexity analytics, MT evaluation metrics and a file-level pipeline.

pub mod analysis;
pub mod bpe;
pub mod codec;
pub mod error;
pub mod io;
pub mod lm;
pub mod metrics;
pub mod pipeline;
pub mod script;
pub mod table;

pub use analysis::{
    char_entropy, entropy_report, pairwise_surface_similarity, perplexity_matrix, redundancy, ssnglm_matrix,
    word_char_entropy_stats, EntropyReport, LanguageCorpus, MatrixKind, MetricReport, SimilarityMatrix,
};
pub use bpe::{learn_bpe, undo_bpe, BpeConfig, BpeModel, BOUNDARY_MARKER};
pub use codec::{decode, decode_spans, encode, validate_wx, Diagnostic, DiagnosticKind, EncodedText, Span, SpanKind};
pub use error::{Error, Result};
pub use lm::{corpus_score, perplexity, train_char_lm, CharNGramLM, Discount, LmConfig, SentenceScore, Smoothing};
pub use metrics::{bleu, char_bleu, chrf2, evaluate_metric, ter, wer, BleuMode, Details, EvalResult, MetricKind};
pub use pipeline::{CorpusManifest, PipelineRun};
pub use script::{detect_script, ScriptId};
pub use table::{ScriptTable, TableSet};
