//! Corpus complexity and cross-lingual similarity analytics.

mod entropy;
mod matrix;

pub use entropy::{
    char_distribution, char_entropy, entropy_report, redundancy, word_char_entropy_stats, EntropyReport,
    WordEntropyStats,
};
pub use matrix::{
    min_max_normalize, pairwise_surface_similarity, perplexity_matrix, ssnglm_matrix, LanguageCorpus, MatrixKind,
    MetricReport, SimilarityMatrix,
};
