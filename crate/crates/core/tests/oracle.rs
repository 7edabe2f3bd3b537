//! Brute-force cross-checks of `score_window` on tie-heavy inputs.

mod common;

use allusio::{score_window, tokenize, NormalizationOptions, Query};
use common::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn check(q: &[String], w: &[String], plain: &PlainLexicon) {
    let o = NormalizationOptions::default();
    let lex = plain.to_lexicon();
    let query = Query::parse(&q.join(" "), &o).unwrap();
    let got = score_window(&query, &tokenize(&w.join(" "), &o), &lex).unwrap();
    let want = oracle_score(q, w, plain);
    let pairs: Vec<(usize, usize)> = got.matches.matches.iter().map(|m| (m.source_index, m.target_index)).collect();
    assert_eq!(pairs, want.pairs, "query {q:?} window {w:?}");
    assert_eq!(got.core.map(|c| c.offset), want.offset, "query {q:?} window {w:?}");
    assert!((got.combined - want.combined).abs() <= 1e-9, "query {q:?} window {w:?}: {got:?} vs {want:?}");
}

#[test]
fn repeated_words_and_tiny_vocabulary() {
    let mut rng = rng(99);
    for _ in 0..std::env::var("ORACLE_CASES").ok().and_then(|v| v.parse().ok()).unwrap_or(400) {
        let (plain, vocab) = random_lexicon(&mut rng);
        let small: Vec<String> = vocab.choose_multiple(&mut rng, 3).cloned().collect();
        let qlen = rng.gen_range(1..=6);
        let wlen = rng.gen_range(0..=12);
        let q = random_words(&mut rng, &small, qlen);
        let w = random_words(&mut rng, &small, wlen);
        check(&q, &w, &plain);
    }
}

#[test]
fn single_word_everywhere() {
    let plain = PlainLexicon::default();
    for qlen in 1..=5 {
        for wlen in 0..=9 {
            let q = vec!["et".to_string(); qlen];
            let w = vec!["et".to_string(); wlen];
            check(&q, &w, &plain);
        }
    }
}

#[test]
fn tiers_and_rarity_compete() {
    // Equal quality from different tier mixes; rarity decides.
    let mut plain = PlainLexicon::default();
    for (f, l) in [("ab", "la"), ("ac", "la"), ("ba", "lb"), ("bb", "lb")] {
        plain.lemma_of.insert(f.into(), l.into());
    }
    plain.synsets.push(["la", "lb"].iter().map(|s| s.to_string()).collect());
    plain.freq.insert("la".into(), 10);
    plain.freq.insert("lb".into(), 100);
    let words = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
    for (q, w) in [
        ("ab ba", "ac bb ab ba"),
        ("ab ab", "ba ac bb"),
        ("ab ba ab", "bb bb ac ab ba"),
        ("ba ab", "ab ba ab ba"),
    ] {
        check(&words(q), &words(w), &plain);
    }
}
