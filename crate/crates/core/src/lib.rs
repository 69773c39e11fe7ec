//! Lexicon-driven sentiment analytics for social-media post corpora.
//!
//! The crate is organised as a straight pipeline:
//!
//! - [`corpus`]: record schema, CSV/JSONL ingestion and the filter chain
//!   (date range, keyword, country, bot and duplicate removal).
//! - [`textprep`]: cleaning, tokenisation, stopword removal and abusive-word
//!   masking.
//! - [`ngram`]: ranked n-gram tables (n = 1..4) and word-cloud weights.
//! - [`emotion`]: eight-class emotion counting plus positive/negative unit sums.
//! - [`polarity`]: signed sentence scoring with valence shifters.
//! - [`analytics`]: rankings, device groups, daily series, polarity split.
//! - [`scenario`]: the (trend x timing) scenario matrix.
//! - [`pipeline`] and [`synth`]: end-to-end runs with manifests, and the
//!   deterministic synthetic corpus used by the test suites.

pub mod analytics;
pub mod corpus;
pub mod emotion;
pub mod error;
pub mod export;
pub mod ngram;
pub mod pipeline;
pub mod polarity;
pub mod scenario;
pub mod synth;
pub mod textprep;

pub use error::{Error, ErrorClass, Result};

/// Bundled data files, compiled into the binary so runs need no external
/// resources.
pub mod data {
    /// 174-word English stopword list.
    pub const STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");
    /// Empty abusive-word placeholder; supply a real list with a path.
    pub const ABUSIVE_PLACEHOLDER: &str = include_str!("../data/abusive.txt");
    /// Small NRC-layout emotion lexicon (term, category, flag).
    pub const EMOTION_LEXICON: &str = include_str!("../data/emotion_lexicon.tsv");
    /// Polarity lexicon (term, score).
    pub const POLARITY_LEXICON: &str = include_str!("../data/polarity_lexicon.csv");
    /// Valence shifters (term, kind 1..4).
    pub const VALENCE_SHIFTERS: &str = include_str!("../data/valence_shifters.csv");
}
