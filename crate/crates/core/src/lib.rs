//! Search a plain-text corpus for quotations of, and allusions to, a source
//! passage, ranking candidate passages from literal quotation down to loose
//! verbal parallel.
//!
//! Each window of the corpus is scored on five criteria: how many source
//! words it matches, at what quality (exact form, same lemma, related stem
//! or synonym), how rare the matched words are, how densely they cluster and
//! how well they keep the source order.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod lexicon;
pub mod scoring;
pub mod search;

pub use corpus::{load_corpus, load_document, normalize_form, tokenize, Corpus, Document, DocumentMeta, NormalizationOptions, Token, UnicodeForm};
pub use error::{Error, Result};
pub use lexicon::{compute_frequencies, load_lexicon, rarity_score, FrequencyTable, Lexicon, LexiconPaths};
pub use scoring::{
    align_core, assign_matches, classify_match, combine, density_points, density_scores, find_candidates, order_scores, score_window,
    Assignment, CoreAlignment, MatchCandidate, QualityTier, Query, ScoreBreakdown,
};
pub use search::{search, suppress_overlaps, windows, RankedResult, SearchParams};
