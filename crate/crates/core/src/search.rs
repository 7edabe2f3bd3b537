//! Sliding-window scan of a corpus with global ranking of the hits.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, Document, Token};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::scoring::{MatchCandidate, QualityTier, Query, ScoreBreakdown};

pub const DEFAULT_TOP_K: usize = 50;
pub const MIN_DEFAULT_WINDOW: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    pub window_size: usize,
    pub stride: usize,
    pub top_k: usize,
    pub min_score: f64,
}

impl SearchParams {
    /// Defaults for a query of `query_len` tokens: a window three times the
    /// query (at least 30 tokens) advanced by half its length.
    pub fn for_query(query_len: usize) -> Self {
        let window_size = MIN_DEFAULT_WINDOW.max(3 * query_len);
        SearchParams {
            window_size,
            stride: (window_size / 2).max(1),
            top_k: DEFAULT_TOP_K,
            min_score: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_size == 0 {
            return Err(Error::Params("window size must be at least 1".into()));
        }
        if self.stride == 0 || self.stride > self.window_size {
            return Err(Error::Params(format!(
                "stride must be between 1 and the window size ({}), got {}",
                self.window_size, self.stride
            )));
        }
        if self.top_k == 0 {
            return Err(Error::Params("top_k must be at least 1".into()));
        }
        if self.min_score.is_nan() || self.min_score < 0.0 {
            return Err(Error::Params(format!("min_score must be >= 0, got {}", self.min_score)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedResult {
    pub document_id: String,
    pub author: String,
    pub work: String,
    pub window_start: usize,
    /// Exclusive.
    pub window_end: usize,
    pub first_line: usize,
    pub last_line: usize,
    pub breakdown: ScoreBreakdown,
    pub excerpt: String,
}

impl RankedResult {
    fn new(doc: &Document, start: usize, window: &[Token], breakdown: ScoreBreakdown) -> Self {
        RankedResult {
            document_id: doc.id.clone(),
            author: doc.author.clone(),
            work: doc.work.clone(),
            window_start: start,
            window_end: start + window.len(),
            first_line: window.first().map_or(0, |t| t.line),
            last_line: window.last().map_or(0, |t| t.line),
            breakdown,
            excerpt: window.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" "),
        }
    }

    /// Document positions of the matched window tokens, ascending.
    pub fn matched_positions(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .breakdown
            .matches
            .matches
            .iter()
            .map(|m| self.window_start + m.target_index)
            .collect();
        v.sort_unstable();
        v
    }
}

/// Window start positions and slices: every multiple of the stride below
/// the document length, each clipped at the document end.
pub fn windows<'a>(doc: &'a Document, params: &SearchParams) -> Vec<(usize, &'a [Token])> {
    window_starts(doc.len(), params)
        .map(|start| (start, &doc.tokens[start..(start + params.window_size).min(doc.len())]))
        .collect()
}

fn window_starts(len: usize, params: &SearchParams) -> impl Iterator<Item = usize> {
    (0..len).step_by(params.stride.max(1))
}

/// Greedy by score: a result survives unless an overlapping result from the
/// same document scores higher (or equal with an earlier start).
pub fn suppress_overlaps(mut results: Vec<RankedResult>) -> Vec<RankedResult> {
    results.sort_by(rank_order);
    // Kept ranges are pairwise disjoint, keyed by (document, start) -> end.
    let mut taken: BTreeMap<(String, usize), usize> = BTreeMap::new();
    let mut kept: Vec<RankedResult> = Vec::with_capacity(results.len());
    for r in results {
        let doc = r.document_id.clone();
        let left = taken
            .range((doc.clone(), 0)..=(doc.clone(), r.window_start))
            .next_back()
            .is_some_and(|(_, &end)| end > r.window_start);
        let right = r.window_end > r.window_start
            && taken
                .range((doc.clone(), r.window_start)..(doc.clone(), r.window_end))
                .next()
                .is_some();
        if !left && !right {
            taken.insert((doc, r.window_start), r.window_end);
            kept.push(r);
        }
    }
    kept
}

fn rank_order(a: &RankedResult, b: &RankedResult) -> Ordering {
    b.breakdown
        .combined
        .total_cmp(&a.breakdown.combined)
        .then_with(|| a.document_id.cmp(&b.document_id))
        .then_with(|| a.window_start.cmp(&b.window_start))
}

/// Per-source lookup data for tiering corpus tokens against the query.
struct SourceWord {
    norm: String,
    lemma: Option<String>,
    related: HashSet<String>,
}

/// Pre-digested query: tiers a corpus token against every source word with
/// the same result as `classify_forms`, without per-pair table lookups.
pub struct QueryMatcher {
    sources: Vec<SourceWord>,
}

impl QueryMatcher {
    pub fn new(query: &Query, lex: &Lexicon) -> Self {
        let sources = query
            .tokens()
            .iter()
            .map(|t| {
                let lemma = lex.lemma_of(&t.norm).map(str::to_string);
                let related = lemma
                    .as_deref()
                    .map(|l| lex.related_lemmas(l).into_iter().map(str::to_string).collect())
                    .unwrap_or_default();
                SourceWord {
                    norm: t.norm.clone(),
                    lemma,
                    related,
                }
            })
            .collect();
        QueryMatcher { sources }
    }

    /// `(source_index, tier)` for every source word that `norm` matches.
    pub fn tiers(&self, norm: &str, lex: &Lexicon) -> Vec<(usize, QualityTier)> {
        let lemma = lex.lemma_of(norm);
        let mut out = Vec::new();
        for (s, src) in self.sources.iter().enumerate() {
            let tier = if src.norm == norm {
                Some(QualityTier::Exact)
            } else {
                match (src.lemma.as_deref(), lemma) {
                    (Some(a), Some(b)) if a == b => Some(QualityTier::SameWord),
                    (Some(_), Some(b)) if src.related.contains(b) => Some(QualityTier::Related),
                    _ => None,
                }
            };
            if let Some(tier) = tier {
                out.push((s, tier));
            }
        }
        out
    }
}

fn search_document(
    doc: &Document,
    matcher: &QueryMatcher,
    lex: &Lexicon,
    params: &SearchParams,
) -> Vec<RankedResult> {
    let hits: Vec<Vec<(usize, QualityTier)>> = doc
        .tokens
        .par_iter()
        .map(|t| matcher.tiers(&t.norm, lex))
        .collect();
    let rarity: Vec<f64> = doc
        .tokens
        .par_iter()
        .zip(hits.par_iter())
        .map(|(t, h)| if h.is_empty() { 0.0 } else { lex.rarity_of(&t.norm) })
        .collect();

    let starts: Vec<usize> = window_starts(doc.len(), params).collect();
    let scored: Vec<RankedResult> = starts
        .into_par_iter()
        .filter_map(|start| {
            let end = (start + params.window_size).min(doc.len());
            let mut candidates: Vec<MatchCandidate> = Vec::new();
            for pos in start..end {
                for &(s, tier) in &hits[pos] {
                    candidates.push(MatchCandidate {
                        source_index: s,
                        target_index: pos - start,
                        tier,
                        rarity: rarity[pos],
                    });
                }
            }
            if candidates.is_empty() {
                return None;
            }
            let breakdown = ScoreBreakdown::from_candidates(&candidates);
            (breakdown.combined > 0.0 && breakdown.combined >= params.min_score)
                .then(|| RankedResult::new(doc, start, &doc.tokens[start..end], breakdown))
        })
        .collect();
    suppress_overlaps(scored)
}

/// Score every window of every document and return the best `top_k`
/// non-overlapping hits, highest combined score first.
pub fn search(corpus: &Corpus, query: &Query, lex: &Lexicon, params: &SearchParams) -> Result<Vec<RankedResult>> {
    if query.is_empty() {
        return Err(Error::EmptyQuery);
    }
    params.validate()?;
    let matcher = QueryMatcher::new(query, lex);
    let per_doc: Vec<Vec<RankedResult>> = corpus
        .documents
        .par_iter()
        .map(|doc| search_document(doc, &matcher, lex, params))
        .collect();
    let mut all: Vec<RankedResult> = per_doc.into_iter().flatten().collect();
    all.sort_by(rank_order);
    all.truncate(params.top_k);
    Ok(all)
}

/// Score the single window of `doc` starting at `start`, as `search` would.
/// `None` when `start` is not a window start under `params`.
pub fn score_document_window(
    doc: &Document,
    start: usize,
    query: &Query,
    lex: &Lexicon,
    params: &SearchParams,
) -> Option<RankedResult> {
    if start >= doc.len() || !start.is_multiple_of(params.stride.max(1)) {
        return None;
    }
    let window = &doc.tokens[start..(start + params.window_size).min(doc.len())];
    let breakdown = crate::scoring::score_window(query, window, lex).ok()?;
    Some(RankedResult::new(doc, start, window, breakdown))
}
