//! Five-criterion scoring of one candidate window against the query.
//!
//! Every counted match earns one quantity point, its quality tier points
//! (3 exact form, 2 same lemma, 1 related stem or synonym) and a rarity
//! weight. Density rewards matched words that stand close together in the
//! window; order rewards matches that keep their source position relative to
//! the core offset. The combined score is
//!
//! ```text
//! (quantity + quality + rarity) / 3 + 2 * density + order
//! ```

mod assign;
mod hungarian;

use std::collections::BTreeSet;

use serde::{Serialize, Serializer};

pub use assign::{assign_matches, RARITY_UNIT};
use assign::OrderScale;

use crate::corpus::{NormalizationOptions, Token};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QualityTier {
    Related = 1,
    SameWord = 2,
    Exact = 3,
}

impl QualityTier {
    pub fn points(self) -> u32 {
        self as u32
    }
}

impl Serialize for QualityTier {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.points())
    }
}

/// The tokenized source passage.
#[derive(Debug, Clone)]
pub struct Query {
    tokens: Vec<Token>,
}

impl Query {
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyQuery);
        }
        Ok(Query { tokens })
    }

    pub fn parse(text: &str, options: &NormalizationOptions) -> Result<Self> {
        Self::new(crate::corpus::tokenize(text, options))
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchCandidate {
    pub source_index: usize,
    /// Index into the window, not the document.
    pub target_index: usize,
    pub tier: QualityTier,
    pub rarity: f64,
}

/// A one-to-one set of matches, sorted by source index.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Assignment {
    pub matches: Vec<MatchCandidate>,
}

impl Assignment {
    pub fn from_matches(mut matches: Vec<MatchCandidate>) -> Self {
        matches.sort_by_key(|m| (m.source_index, m.target_index));
        Assignment { matches }
    }

    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoreAlignment {
    /// Target position minus source position of the core.
    pub offset: i64,
}

impl CoreAlignment {
    pub fn stray(&self, m: &MatchCandidate) -> u64 {
        (m.target_index as i64 - m.source_index as i64 - self.offset).unsigned_abs()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScoreBreakdown {
    pub quantity: usize,
    pub quality_sum: u32,
    pub rarity_sum: f64,
    pub density_total: f64,
    pub order_total: f64,
    pub combined: f64,
    pub matches: Assignment,
    pub core: Option<CoreAlignment>,
}

impl ScoreBreakdown {
    /// Score an already chosen assignment.
    pub fn from_assignment(matches: Assignment) -> Self {
        let Ok(core) = align_core(&matches) else {
            return ScoreBreakdown::default();
        };
        let quantity = matches.len();
        let quality_sum = matches.matches.iter().map(|m| m.tier.points()).sum();
        let rarity_sum = matches.matches.iter().map(|m| m.rarity).sum();
        let density_total = density_scores(&matches);
        let order_total = order_scores(&matches, &core);
        ScoreBreakdown {
            quantity,
            quality_sum,
            rarity_sum,
            density_total,
            order_total,
            combined: combine(quantity, quality_sum, rarity_sum, density_total, order_total),
            matches,
            core: Some(core),
        }
    }

    pub fn from_candidates(candidates: &[MatchCandidate]) -> Self {
        Self::from_assignment(assign_matches(candidates))
    }
}

/// The best tier at which `target` matches `source`, if any.
pub fn classify_match(source: &Token, target: &Token, lex: &Lexicon) -> Option<QualityTier> {
    classify_forms(&source.norm, &target.norm, lex)
}

pub fn classify_forms(source: &str, target: &str, lex: &Lexicon) -> Option<QualityTier> {
    if source == target {
        return Some(QualityTier::Exact);
    }
    let (a, b) = (lex.lemma_of(source)?, lex.lemma_of(target)?);
    if a == b {
        Some(QualityTier::SameWord)
    } else if lex.related_by_stem_or_synonym(a, b) {
        Some(QualityTier::Related)
    } else {
        None
    }
}

/// Every (source, target) pair that matches at some tier.
pub fn find_candidates(query: &Query, window: &[Token], lex: &Lexicon) -> Vec<MatchCandidate> {
    let rarities: Vec<f64> = window.iter().map(|t| lex.rarity_of(&t.norm)).collect();
    let mut out = Vec::new();
    for (s, source) in query.tokens.iter().enumerate() {
        for (t, target) in window.iter().enumerate() {
            if let Some(tier) = classify_match(source, target, lex) {
                out.push(MatchCandidate {
                    source_index: s,
                    target_index: t,
                    tier,
                    rarity: rarities[t],
                });
            }
        }
    }
    out
}

fn offset_sum(assignment: &Assignment, offset: i64, scale: &OrderScale) -> i128 {
    let core = CoreAlignment { offset };
    assignment.matches.iter().map(|m| scale.weight(core.stray(m))).sum()
}

/// The offset among the matches' own offsets that maximizes the order
/// total; ties go to the smallest offset.
pub fn align_core(assignment: &Assignment) -> Result<CoreAlignment> {
    let offsets: BTreeSet<i64> = assignment
        .matches
        .iter()
        .map(|m| m.target_index as i64 - m.source_index as i64)
        .collect();
    let (&lo, &hi) = match (offsets.first(), offsets.last()) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(Error::NoCore),
    };
    let scale = OrderScale::new((hi - lo) as u64, assignment.len());
    let mut best: Option<(i128, i64)> = None;
    for &o in &offsets {
        let total = offset_sum(assignment, o, &scale);
        if best.is_none_or(|(b, _)| total > b) {
            best = Some((total, o));
        }
    }
    Ok(CoreAlignment {
        offset: best.expect("non-empty").1,
    })
}

/// Density points keyed by target index, in window order: the first match
/// scores 1, each later one `1 / (gap + 1)` where `gap` counts the window
/// tokens strictly between it and the previous match.
fn density_by_target(assignment: &Assignment) -> Vec<(usize, f64)> {
    let mut targets: Vec<usize> = assignment.matches.iter().map(|m| m.target_index).collect();
    targets.sort_unstable();
    let mut prev: Option<usize> = None;
    targets
        .into_iter()
        .map(|t| {
            let points = match prev {
                None => 1.0,
                Some(p) => 1.0 / ((t - p - 1) as f64 + 1.0),
            };
            prev = Some(t);
            (t, points)
        })
        .collect()
}

/// Density points per match, aligned with `assignment.matches`.
pub fn density_points(assignment: &Assignment) -> Vec<f64> {
    let by_target = density_by_target(assignment);
    assignment
        .matches
        .iter()
        .map(|m| {
            let i = by_target.binary_search_by_key(&m.target_index, |&(t, _)| t).expect("matched target");
            by_target[i].1
        })
        .collect()
}

pub fn density_scores(assignment: &Assignment) -> f64 {
    density_by_target(assignment).into_iter().map(|(_, p)| p).sum()
}

/// Sum of `1 / (stray + 1)` over matches, with stray measured from `core`.
pub fn order_scores(assignment: &Assignment, core: &CoreAlignment) -> f64 {
    assignment
        .matches
        .iter()
        .map(|m| 1.0 / (core.stray(m) as f64 + 1.0))
        .sum()
}

pub fn combine(quantity: usize, quality_sum: u32, rarity_sum: f64, density_total: f64, order_total: f64) -> f64 {
    (quantity as f64 + quality_sum as f64 + rarity_sum) / 3.0 + 2.0 * density_total + order_total
}

pub fn score_window(query: &Query, window: &[Token], lex: &Lexicon) -> Result<ScoreBreakdown> {
    if query.is_empty() {
        return Err(Error::EmptyQuery);
    }
    Ok(ScoreBreakdown::from_candidates(&find_candidates(query, window, lex)))
}
