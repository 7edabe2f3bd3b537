//! One-to-one assignment of target tokens to source tokens.
//!
//! The assignment maximizes, in this priority order:
//!
//! 1. the sum of quality tier points,
//! 2. the sum of rarity weights,
//! 3. the order total under the best core offset for the chosen matches,
//! 4. the negated sum of target indices,
//!
//! and finally picks the lexicographically smallest vector of target indices
//! read by ascending source index (an unmatched source counts as +inf).
//!
//! Criteria 1-4 are additive once a core offset is fixed, and the best core
//! of any match set is one of the candidate offsets, so the optimum is found
//! by solving one weighted bipartite assignment per candidate offset. Rarity
//! is compared in fixed point (`RARITY_UNIT`) and order weights as exact
//! multiples of `1 / lcm(1..=k)`, so ties are detected exactly.

use std::collections::BTreeSet;
use std::ops::{Add, Sub};

use super::hungarian::{self, Cost};
use super::{Assignment, MatchCandidate};

/// Fixed-point resolution for comparing rarity sums.
pub const RARITY_UNIT: f64 = (1u64 << 32) as f64;

pub(crate) fn quantize_rarity(r: f64) -> i64 {
    (r * RARITY_UNIT).round() as i64
}

/// Integer weights proportional to `1 / (stray + 1)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OrderScale {
    unit: i128,
}

impl OrderScale {
    const FALLBACK_UNIT: i128 = 1 << 90;

    /// A scale exact for strays up to `max_stray` when `lcm(1..=max_stray+1)`
    /// leaves enough headroom for sums of `terms` weights; otherwise a fixed
    /// 2^90 unit with truncated weights.
    pub(crate) fn new(max_stray: u64, terms: usize) -> Self {
        let headroom = 64 * (terms as i128 + 1) * (terms as i128 + 1);
        let limit = i128::MAX / headroom;
        let mut unit: i128 = 1;
        for k in 2..=(max_stray as i128 + 1) {
            let g = gcd(unit, k);
            match unit.checked_mul(k / g) {
                Some(u) if u <= limit => unit = u,
                _ => {
                    return OrderScale {
                        unit: Self::FALLBACK_UNIT,
                    }
                }
            }
        }
        OrderScale { unit }
    }

    pub(crate) fn weight(&self, stray: u64) -> i128 {
        self.unit / (stray as i128 + 1)
    }
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Objective value of a match set at a fixed offset; larger is better.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Objective {
    quality: i64,
    rarity: i64,
    order: i128,
    neg_target_sum: i64,
}

impl Add for Objective {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Objective {
            quality: self.quality + o.quality,
            rarity: self.rarity + o.rarity,
            order: self.order + o.order,
            neg_target_sum: self.neg_target_sum + o.neg_target_sum,
        }
    }
}

impl Sub for Objective {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Objective {
            quality: self.quality - o.quality,
            rarity: self.rarity - o.rarity,
            order: self.order - o.order,
            neg_target_sum: self.neg_target_sum - o.neg_target_sum,
        }
    }
}

impl Cost for Objective {
    fn zero() -> Self {
        Objective::default()
    }
}

impl std::ops::Neg for Objective {
    type Output = Self;
    fn neg(self) -> Self {
        Objective::zero() - self
    }
}

/// Cost of an edge the solver must never pick; any real assignment beats it.
const FORBIDDEN: Objective = Objective {
    quality: 1 << 40,
    rarity: 0,
    order: 0,
    neg_target_sum: 0,
};

/// The candidate graph restricted to sources and targets that have edges.
struct Problem<'a> {
    candidates: &'a [MatchCandidate],
    sources: Vec<usize>,
    targets: Vec<usize>,
    /// Per candidate: (row, column) in the compact matrix.
    cells: Vec<(usize, usize)>,
    rarity: Vec<i64>,
    scale: OrderScale,
}

impl<'a> Problem<'a> {
    fn new(candidates: &'a [MatchCandidate]) -> Self {
        let sources: Vec<usize> = candidates
            .iter()
            .map(|c| c.source_index)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let targets: Vec<usize> = candidates
            .iter()
            .map(|c| c.target_index)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let cells = candidates
            .iter()
            .map(|c| {
                (
                    sources.binary_search(&c.source_index).unwrap(),
                    targets.binary_search(&c.target_index).unwrap(),
                )
            })
            .collect();
        let (lo, hi) = candidates.iter().map(diff).fold((i64::MAX, i64::MIN), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        });
        let scale = OrderScale::new((hi - lo) as u64, sources.len());
        Problem {
            candidates,
            sources,
            targets,
            cells,
            rarity: candidates.iter().map(|c| quantize_rarity(c.rarity)).collect(),
            scale,
        }
    }

    fn gain(&self, idx: usize, offset: i64) -> Objective {
        let c = &self.candidates[idx];
        Objective {
            quality: c.tier.points() as i64,
            rarity: self.rarity[idx],
            order: self.scale.weight((diff(c) - offset).unsigned_abs()),
            neg_target_sum: -(c.target_index as i64),
        }
    }

    /// Best match set at `offset` using only candidates with `allowed[i]`.
    /// Returns the objective value and the chosen candidate indices.
    fn solve(&self, allowed: &[bool], offset: i64) -> (Objective, Vec<usize>) {
        let rows = self.sources.len();
        let cols = self.targets.len() + rows;
        let mut matrix = vec![vec![FORBIDDEN; cols]; rows];
        let mut which = vec![vec![usize::MAX; self.targets.len()]; rows];
        for (r, row) in matrix.iter_mut().enumerate() {
            row[self.targets.len() + r] = Objective::zero();
        }
        for (idx, &(r, c)) in self.cells.iter().enumerate() {
            if allowed[idx] {
                matrix[r][c] = -self.gain(idx, offset);
                which[r][c] = idx;
            }
        }
        let cols_of = hungarian::solve(&matrix);
        let mut value = Objective::zero();
        let mut chosen = Vec::new();
        for (r, &c) in cols_of.iter().enumerate() {
            if c < self.targets.len() && which[r][c] != usize::MAX {
                value = value + self.gain(which[r][c], offset);
                chosen.push(which[r][c]);
            }
        }
        (value, chosen)
    }

    fn has_conflicts(&self) -> bool {
        let mut row_seen = vec![false; self.sources.len()];
        let mut col_seen = vec![false; self.targets.len()];
        for &(r, c) in &self.cells {
            if row_seen[r] || col_seen[c] {
                return true;
            }
            row_seen[r] = true;
            col_seen[c] = true;
        }
        false
    }
}

fn diff(c: &MatchCandidate) -> i64 {
    c.target_index as i64 - c.source_index as i64
}

/// Choose the one-to-one subset of `candidates` that scores best; see the
/// module docs for the exact objective.
pub fn assign_matches(candidates: &[MatchCandidate]) -> Assignment {
    if candidates.is_empty() {
        return Assignment::default();
    }
    let problem = Problem::new(candidates);

    // Without shared sources or targets every candidate can be kept, and
    // keeping one more always raises the quality sum.
    if !problem.has_conflicts() {
        return Assignment::from_matches(candidates.to_vec());
    }

    let offsets: BTreeSet<i64> = candidates.iter().map(diff).collect();
    let everything = vec![true; candidates.len()];
    let mut best: Option<Objective> = None;
    let mut optimal_offsets = Vec::new();
    let mut witness = Vec::new();
    for &offset in &offsets {
        let (value, chosen) = problem.solve(&everything, offset);
        match best {
            Some(b) if value < b => {}
            Some(b) if value == b => optimal_offsets.push(offset),
            _ => {
                best = Some(value);
                optimal_offsets = vec![offset];
                witness = chosen;
            }
        }
    }
    let best = best.expect("at least one offset");

    let canonical = canonicalize(&problem, best, &optimal_offsets, witness);
    Assignment::from_matches(canonical.into_iter().map(|i| candidates[i]).collect())
}

/// Among all optimal match sets, select the one whose target vector (by
/// ascending source) is lexicographically smallest, fixing one source at a
/// time and checking that the optimum stays reachable.
fn canonicalize(problem: &Problem, best: Objective, offsets: &[i64], mut witness: Vec<usize>) -> Vec<usize> {
    let mut allowed = vec![true; problem.candidates.len()];
    let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); problem.sources.len()];
    for (idx, &(r, _)) in problem.cells.iter().enumerate() {
        by_row[r].push(idx);
    }
    for row in &mut by_row {
        row.sort_by_key(|&idx| problem.candidates[idx].target_index);
    }

    for (r, options) in by_row.iter().enumerate() {
        let current = witness.iter().copied().find(|&idx| problem.cells[idx].0 == r);
        // Options that sort before the witness's choice: smaller targets
        // first, "unmatched" last.
        let earlier: Vec<usize> = options
            .iter()
            .copied()
            .filter(|&idx| allowed[idx])
            .take_while(|&idx| Some(idx) != current)
            .collect();

        let mut decided = current;
        for idx in earlier {
            let trial = fix(problem, &allowed, r, Some(idx));
            if let Some(found) = offsets.iter().find_map(|&o| {
                let (value, chosen) = problem.solve(&trial, o);
                (value == best).then_some(chosen)
            }) {
                witness = found;
                decided = Some(idx);
                break;
            }
        }
        allowed = fix(problem, &allowed, r, decided);
    }
    witness
}

/// Restrict `allowed` so that row `r` takes exactly `choice` (or nothing).
fn fix(problem: &Problem, allowed: &[bool], r: usize, choice: Option<usize>) -> Vec<bool> {
    let col = choice.map(|idx| problem.cells[idx].1);
    allowed
        .iter()
        .enumerate()
        .map(|(idx, &ok)| {
            let (row, c) = problem.cells[idx];
            ok && if row == r {
                Some(idx) == choice
            } else {
                Some(c) != col
            }
        })
        .collect()
}
