//! Shared test support: a brute-force reference scorer and the planted
//! ranking fixture.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use allusio::Lexicon;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lexicon tables as plain maps, classified and weighted independently of
/// the library.
#[derive(Debug, Clone, Default)]
pub struct PlainLexicon {
    pub lemma_of: BTreeMap<String, String>,
    pub stem_of: BTreeMap<String, String>,
    pub synsets: Vec<BTreeSet<String>>,
    pub freq: BTreeMap<String, u64>,
}

impl PlainLexicon {
    pub fn to_lexicon(&self) -> Lexicon {
        let mut lex = Lexicon::new();
        for (f, l) in &self.lemma_of {
            lex.insert_lemma(f, l).unwrap();
        }
        for (l, g) in &self.stem_of {
            lex.insert_stem(l, g).unwrap();
        }
        for set in &self.synsets {
            let v: Vec<&str> = set.iter().map(String::as_str).collect();
            lex.insert_synonym_set(&v).unwrap();
        }
        for (l, &c) in &self.freq {
            lex.insert_frequency(l, c).unwrap();
        }
        lex
    }

    pub fn tier(&self, source: &str, target: &str) -> Option<u32> {
        if source == target {
            return Some(3);
        }
        let a = self.lemma_of.get(source)?;
        let b = self.lemma_of.get(target)?;
        if a == b {
            return Some(2);
        }
        let same_stem = matches!((self.stem_of.get(a), self.stem_of.get(b)), (Some(x), Some(y)) if x == y);
        let synonyms = self.synsets.iter().any(|s| s.contains(a) && s.contains(b));
        (same_stem || synonyms).then_some(1)
    }

    pub fn rarity(&self, target: &str) -> f64 {
        let key = self.lemma_of.get(target).map(String::as_str).unwrap_or(target);
        match self.freq.get(key) {
            Some(&f) => 1.0 / (1.0 + (f as f64).log10()),
            None => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleScore {
    pub quantity: usize,
    pub quality: u32,
    pub rarity: f64,
    pub density: f64,
    pub order: f64,
    pub combined: f64,
    /// (source, target) pairs sorted by source.
    pub pairs: Vec<(usize, usize)>,
    pub offset: Option<i64>,
}

#[derive(Clone, Copy)]
struct Pick {
    s: usize,
    t: usize,
    tier: u32,
    rarity: f64,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn order_at(picks: &[Pick], o: i64) -> BigRational {
    picks.iter().fold(ratio(0, 1), |acc, p| {
        let stray = (p.t as i64 - p.s as i64 - o).abs();
        acc + ratio(1, stray + 1)
    })
}

/// Best offset over the picks' own offsets, ties to the smallest.
fn best_offset(picks: &[Pick]) -> Option<(i64, BigRational)> {
    let offsets: BTreeSet<i64> = picks.iter().map(|p| p.t as i64 - p.s as i64).collect();
    let mut best: Option<(i64, BigRational)> = None;
    for o in offsets {
        let v = order_at(picks, o);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((o, v));
        }
    }
    best
}

struct Key {
    quality: u32,
    rarity: i64,
    order: BigRational,
    target_sum: usize,
    vector: Vec<usize>,
}

fn key(picks: &[Pick], n: usize) -> Key {
    let mut vector = vec![usize::MAX; n];
    for p in picks {
        vector[p.s] = p.t;
    }
    Key {
        quality: picks.iter().map(|p| p.tier).sum(),
        rarity: picks.iter().map(|p| (p.rarity * 4294967296.0).round() as i64).sum(),
        order: best_offset(picks).map(|(_, v)| v).unwrap_or_else(|| ratio(0, 1)),
        target_sum: picks.iter().map(|p| p.t).sum(),
        vector,
    }
}

fn better(a: &Key, b: &Key) -> bool {
    a.quality
        .cmp(&b.quality)
        .then(a.rarity.cmp(&b.rarity))
        .then_with(|| a.order.cmp(&b.order))
        .then(b.target_sum.cmp(&a.target_sum))
        .then_with(|| b.vector.cmp(&a.vector))
        == Ordering::Greater
}

/// Enumerate every one-to-one assignment and every core offset.
pub fn oracle_score(query: &[String], window: &[String], lex: &PlainLexicon) -> OracleScore {
    let n = query.len();
    let options: Vec<Vec<Pick>> = query
        .iter()
        .enumerate()
        .map(|(s, q)| {
            window
                .iter()
                .enumerate()
                .filter_map(|(t, w)| {
                    lex.tier(q, w).map(|tier| Pick {
                        s,
                        t,
                        tier,
                        rarity: lex.rarity(w),
                    })
                })
                .collect()
        })
        .collect();

    let mut best: Option<(Key, Vec<Pick>)> = None;
    let mut current = Vec::new();
    let mut used = vec![false; window.len()];
    enumerate(&options, 0, &mut current, &mut used, &mut |picks| {
        let k = key(picks, n);
        if best.as_ref().is_none_or(|(b, _)| better(&k, b)) {
            best = Some((k, picks.to_vec()));
        }
    });
    let picks = best.map(|(_, p)| p).unwrap_or_default();
    score_picks(&picks)
}

fn enumerate(
    options: &[Vec<Pick>],
    s: usize,
    current: &mut Vec<Pick>,
    used: &mut Vec<bool>,
    visit: &mut dyn FnMut(&[Pick]),
) {
    if s == options.len() {
        visit(current);
        return;
    }
    enumerate(options, s + 1, current, used, visit);
    for p in &options[s] {
        if !used[p.t] {
            used[p.t] = true;
            current.push(*p);
            enumerate(options, s + 1, current, used, visit);
            current.pop();
            used[p.t] = false;
        }
    }
}

fn score_picks(picks: &[Pick]) -> OracleScore {
    if picks.is_empty() {
        return OracleScore {
            quantity: 0,
            quality: 0,
            rarity: 0.0,
            density: 0.0,
            order: 0.0,
            combined: 0.0,
            pairs: Vec::new(),
            offset: None,
        };
    }
    let (offset, _) = best_offset(picks).unwrap();
    let mut targets: Vec<usize> = picks.iter().map(|p| p.t).collect();
    targets.sort_unstable();
    let density = 1.0
        + targets
            .windows(2)
            .map(|w| 1.0 / ((w[1] - w[0] - 1) as f64 + 1.0))
            .sum::<f64>();
    let order: f64 = picks
        .iter()
        .map(|p| 1.0 / ((p.t as i64 - p.s as i64 - offset).abs() as f64 + 1.0))
        .sum();
    let quantity = picks.len();
    let quality: u32 = picks.iter().map(|p| p.tier).sum();
    let rarity: f64 = picks.iter().map(|p| p.rarity).sum();
    let mut pairs: Vec<(usize, usize)> = picks.iter().map(|p| (p.s, p.t)).collect();
    pairs.sort_unstable();
    OracleScore {
        quantity,
        quality,
        rarity,
        density,
        order,
        combined: (quantity as f64 + quality as f64 + rarity) / 3.0 + 2.0 * density + order,
        pairs,
        offset: Some(offset),
    }
}

/// A random small lexicon over a fixed vocabulary, plus the vocabulary.
pub fn random_lexicon(rng: &mut ChaCha8Rng) -> (PlainLexicon, Vec<String>) {
    const FORMS: [&str; 10] = ["ab", "ac", "ad", "ba", "bb", "ca", "cb", "cc", "da", "ea"];
    const LEMMAS: [&str; 5] = ["la", "lb", "lc", "ld", "le"];
    let mut lex = PlainLexicon::default();
    for f in FORMS {
        if rng.gen_bool(0.7) {
            lex.lemma_of.insert(f.into(), LEMMAS.choose(rng).unwrap().to_string());
        }
    }
    for l in LEMMAS {
        if rng.gen_bool(0.5) {
            lex.stem_of.insert(l.into(), ["g1", "g2"].choose(rng).unwrap().to_string());
        }
        if rng.gen_bool(0.6) {
            lex.freq.insert(l.into(), rng.gen_range(1..=200));
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        let set: BTreeSet<String> = LEMMAS.choose_multiple(rng, 2).map(|s| s.to_string()).collect();
        lex.synsets.push(set);
    }
    // A few unlemmatized forms carry their own frequency.
    for f in ["ea", "da"] {
        if !lex.lemma_of.contains_key(f) && rng.gen_bool(0.5) {
            lex.freq.insert(f.into(), rng.gen_range(1..=50));
        }
    }
    (lex, FORMS.iter().map(|s| s.to_string()).chain(["zz".to_string()]).collect())
}

pub fn random_words(rng: &mut ChaCha8Rng, vocab: &[String], len: usize) -> Vec<String> {
    (0..len).map(|_| vocab.choose(rng).unwrap().clone()).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const FIXTURE_SOURCE: &str = "arma virumque cano troiae qui primus";

/// The six planted variants of the fixture source, by label.
pub const FIXTURE_VARIANTS: [(&str, &str); 6] = [
    ("a_verbatim", "arma virumque cano troiae qui primus"),
    ("b_inflected", "armis viro canit troiam quem primo"),
    ("c_reversed", "primus qui troiae cano virumque arma"),
    (
        "d_gapped",
        "arma lux alta nox virumque flumen dulce silva cano mons terra ignis troiae unda ventus aqua qui pons nubes saxum primus",
    ),
    ("e_synonyms", "tela heroa canto ilii is princeps"),
    ("f_single", "cano"),
];

const FILLER: [&str; 24] = [
    "lux", "alta", "nox", "flumen", "dulce", "silva", "mons", "terra", "ignis", "unda", "ventus", "aqua", "pons",
    "nubes", "saxum", "rosa", "puella", "agricola", "via", "porta", "insula", "stella", "nauta", "silex",
];

fn filler(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| *FILLER.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// Write the ranking fixture: one document per variant (15 filler tokens,
/// the variant, 30 filler tokens) plus filler-only documents, and a lexicon
/// with uniform frequencies. Returns the corpus and lexicon directories.
pub fn write_fixture(root: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let corpus = root.join("corpus");
    let lexdir = root.join("lexicon");
    fs::create_dir_all(&corpus).unwrap();
    fs::create_dir_all(&lexdir).unwrap();
    let mut rng = rng(7);

    for (label, text) in FIXTURE_VARIANTS {
        let body = format!(
            "#! author: Planted\n#! work: {label}\n{}\n{}\n{}\n",
            filler(&mut rng, 15),
            text,
            filler(&mut rng, 30)
        );
        fs::write(corpus.join(format!("{label}.txt")), body).unwrap();
    }
    for i in 0..8 {
        let body = (0..10).map(|_| filler(&mut rng, 40)).collect::<Vec<_>>().join("\n");
        fs::write(corpus.join(format!("z_filler_{i}.txt")), body).unwrap();
    }

    let lemmas = [
        ("arma", "arma"),
        ("armis", "arma"),
        ("virumque", "vir"),
        ("viro", "vir"),
        ("cano", "cano"),
        ("canit", "cano"),
        ("troiae", "troia"),
        ("troiam", "troia"),
        ("qui", "qui"),
        ("quem", "qui"),
        ("primus", "primus"),
        ("primo", "primus"),
        ("tela", "telum"),
        ("heroa", "heros"),
        ("canto", "canto"),
        ("ilii", "ilium"),
        ("is", "is"),
        ("princeps", "princeps"),
    ];
    let mut lemma_tsv = String::from("# form\tlemma\n");
    for (f, l) in lemmas {
        lemma_tsv.push_str(&format!("{f}\t{l}\n"));
    }
    fs::write(lexdir.join("lemmas.tsv"), lemma_tsv).unwrap();
    fs::write(lexdir.join("stems.tsv"), "cano\tcan\ncantus\tcan\n").unwrap();
    fs::write(
        lexdir.join("synonyms.tsv"),
        "arma\ttelum\nvir\theros\ncano\tcanto\ntroia\tilium\nqui\tis\nprimus\tprinceps\n",
    )
    .unwrap();
    let distinct: BTreeSet<&str> = lemmas.iter().map(|(_, l)| *l).collect();
    let freq: String = distinct.iter().map(|l| format!("{l}\t10\n")).collect();
    fs::write(lexdir.join("freq.tsv"), freq).unwrap();
    (corpus, lexdir)
}
