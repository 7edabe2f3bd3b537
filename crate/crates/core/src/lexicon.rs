//! User-supplied linguistic knowledge: lemma table, stem groups, synonym
//! sets and word frequencies, plus the rarity weight derived from them.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use crate::corpus::{normalize_form, read_utf8, Corpus, NormalizationOptions};
use crate::error::{Error, Result};

pub const LEMMAS_FILE: &str = "lemmas.tsv";
pub const STEMS_FILE: &str = "stems.tsv";
pub const SYNONYMS_FILE: &str = "synonyms.tsv";
pub const FREQ_FILE: &str = "freq.tsv";

/// Lemma, stem, synonym and frequency tables. All keys are normalized forms.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    lemma_of: HashMap<String, String>,
    stem_group_of: HashMap<String, String>,
    stem_members: BTreeMap<String, Vec<String>>,
    synonym_sets: Vec<Vec<String>>,
    synonym_index: HashMap<String, Vec<usize>>,
    freq_of: HashMap<String, u64>,
    total_lemma_tokens: u64,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Map `form` to `lemma`. Re-adding the same pair is a no-op; a form
    /// already mapped to a different lemma is rejected.
    pub fn insert_lemma(&mut self, form: &str, lemma: &str) -> Result<(), String> {
        if form.is_empty() || lemma.is_empty() {
            return Err("empty form or lemma".into());
        }
        match self.lemma_of.get(form) {
            Some(existing) if existing != lemma => Err(format!(
                "form {form:?} already maps to lemma {existing:?}, not {lemma:?}"
            )),
            Some(_) => Ok(()),
            None => {
                self.lemma_of.insert(form.to_string(), lemma.to_string());
                Ok(())
            }
        }
    }

    /// Put `lemma` into stem group `group`. A lemma may belong to one group only.
    pub fn insert_stem(&mut self, lemma: &str, group: &str) -> Result<(), String> {
        if lemma.is_empty() || group.is_empty() {
            return Err("empty lemma or group id".into());
        }
        match self.stem_group_of.get(lemma) {
            Some(existing) if existing != group => Err(format!(
                "lemma {lemma:?} already belongs to stem group {existing:?}, not {group:?}"
            )),
            Some(_) => Ok(()),
            None => {
                self.stem_group_of.insert(lemma.to_string(), group.to_string());
                let members = self.stem_members.entry(group.to_string()).or_default();
                members.push(lemma.to_string());
                members.sort();
                Ok(())
            }
        }
    }

    pub fn insert_synonym_set<S: AsRef<str>>(&mut self, lemmas: &[S]) -> Result<(), String> {
        if lemmas.len() < 2 {
            return Err(format!("a synonym set needs at least 2 lemmas, got {}", lemmas.len()));
        }
        let mut set: Vec<String> = lemmas.iter().map(|l| l.as_ref().to_string()).collect();
        if set.iter().any(String::is_empty) {
            return Err("empty lemma in synonym set".into());
        }
        set.sort();
        set.dedup();
        let id = self.synonym_sets.len();
        for lemma in &set {
            self.synonym_index.entry(lemma.clone()).or_default().push(id);
        }
        self.synonym_sets.push(set);
        Ok(())
    }

    pub fn insert_frequency(&mut self, lemma: &str, count: u64) -> Result<(), String> {
        if lemma.is_empty() {
            return Err("empty lemma".into());
        }
        if count == 0 {
            return Err(format!("frequency of {lemma:?} must be a positive integer"));
        }
        match self.freq_of.get(lemma) {
            Some(&existing) if existing != count => Err(format!(
                "lemma {lemma:?} already has frequency {existing}, not {count}"
            )),
            Some(_) => Ok(()),
            None => {
                self.freq_of.insert(lemma.to_string(), count);
                self.total_lemma_tokens += count;
                Ok(())
            }
        }
    }

    /// Replace the frequency table wholesale.
    pub fn set_frequencies(&mut self, table: FrequencyTable) {
        self.freq_of = table.counts.into_iter().collect();
        self.total_lemma_tokens = table.total;
    }

    pub fn lemma_of(&self, form: &str) -> Option<&str> {
        self.lemma_of.get(form).map(String::as_str)
    }

    /// The key under which a normalized form is counted: its lemma, or the
    /// form itself when the lemma table does not know it.
    pub fn frequency_key<'a>(&'a self, form: &'a str) -> &'a str {
        self.lemma_of(form).unwrap_or(form)
    }

    pub fn stem_group_of(&self, lemma: &str) -> Option<&str> {
        self.stem_group_of.get(lemma).map(String::as_str)
    }

    pub fn synonym_sets(&self) -> &[Vec<String>] {
        &self.synonym_sets
    }

    /// Synonyms of `lemma` across every set containing it, excluding itself.
    pub fn synonyms_of(&self, lemma: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .synonym_index
            .get(lemma)
            .into_iter()
            .flatten()
            .flat_map(|&id| self.synonym_sets[id].iter().map(String::as_str))
            .filter(|&l| l != lemma)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Same stem group, or together in some synonym set.
    pub fn related_by_stem_or_synonym(&self, a: &str, b: &str) -> bool {
        if let (Some(ga), Some(gb)) = (self.stem_group_of(a), self.stem_group_of(b)) {
            if ga == gb {
                return true;
            }
        }
        match (self.synonym_index.get(a), self.synonym_index.get(b)) {
            (Some(sa), Some(sb)) => sa.iter().any(|id| sb.contains(id)),
            _ => false,
        }
    }

    /// Every lemma related to `lemma` through its stem group or a synonym set,
    /// `lemma` itself included when it appears in either.
    pub fn related_lemmas(&self, lemma: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        if let Some(group) = self.stem_group_of(lemma) {
            out.extend(self.stem_members[group].iter().map(String::as_str));
        }
        for &id in self.synonym_index.get(lemma).into_iter().flatten() {
            out.extend(self.synonym_sets[id].iter().map(String::as_str));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn freq_of(&self, lemma: &str) -> Option<u64> {
        self.freq_of.get(lemma).copied()
    }

    pub fn total_lemma_tokens(&self) -> u64 {
        self.total_lemma_tokens
    }

    /// Rarity weight of a normalized target form, looked up via its lemma.
    pub fn rarity_of(&self, form: &str) -> f64 {
        rarity_score(self.freq_of(self.frequency_key(form)))
    }

    pub fn lemma_count(&self) -> usize {
        self.lemma_of.len()
    }

    pub fn stem_count(&self) -> usize {
        self.stem_group_of.len()
    }

    pub fn synonym_set_count(&self) -> usize {
        self.synonym_sets.len()
    }

    pub fn frequency_count(&self) -> usize {
        self.freq_of.len()
    }

    /// Frequency entries by descending count, ties by lemma.
    pub fn most_frequent(&self, n: usize) -> Vec<(&str, u64)> {
        let mut all: Vec<(&str, u64)> = self.freq_of.iter().map(|(l, &c)| (l.as_str(), c)).collect();
        all.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        all.truncate(n);
        all
    }
}

/// Weight in (0, 1] for a word seen `freq` times: `1 / (1 + log10 freq)`.
/// Words absent from the frequency table count as maximally rare.
pub fn rarity_score(freq: Option<u64>) -> f64 {
    match freq {
        None | Some(0) => 1.0,
        Some(f) => 1.0 / (1.0 + (f as f64).log10()),
    }
}

/// Per-lemma token counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
}

/// Count corpus tokens by lemma (or by normalized form when unlemmatized).
pub fn compute_frequencies(corpus: &Corpus, lex: &Lexicon) -> FrequencyTable {
    let mut counts = BTreeMap::new();
    for token in corpus.documents.iter().flat_map(|d| &d.tokens) {
        *counts.entry(lex.frequency_key(&token.norm).to_string()).or_insert(0) += 1;
    }
    FrequencyTable {
        counts,
        total: corpus.total_tokens as u64,
    }
}

/// Locations of the four lexicon tables. Only the lemma table is required.
#[derive(Debug, Clone, Default)]
pub struct LexiconPaths {
    pub lemmas: PathBuf,
    pub stems: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
    pub frequencies: Option<PathBuf>,
}

impl LexiconPaths {
    /// The conventional file names inside `dir`; optional tables are picked
    /// up only if present.
    pub fn in_dir(dir: &Path) -> Self {
        let optional = |name: &str| {
            let p = dir.join(name);
            p.is_file().then_some(p)
        };
        LexiconPaths {
            lemmas: dir.join(LEMMAS_FILE),
            stems: optional(STEMS_FILE),
            synonyms: optional(SYNONYMS_FILE),
            frequencies: optional(FREQ_FILE),
        }
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers, split on tabs.
fn tsv_rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.split('\n').enumerate().filter_map(|(idx, line)| {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            return None;
        }
        Some((idx + 1, line.split('\t').map(str::trim).collect()))
    })
}

fn expect_columns(path: &Path, line: usize, fields: &[&str], n: usize) -> Result<()> {
    if fields.len() != n {
        return Err(Error::table(
            path,
            line,
            format!("expected {n} tab-separated columns, found {}", fields.len()),
        ));
    }
    Ok(())
}

/// Load the lexicon tables. Forms and lemmas are normalized with `options`
/// so they compare equal to corpus tokens normalized the same way.
pub fn load_lexicon(paths: &LexiconPaths, options: &NormalizationOptions) -> Result<Lexicon> {
    let norm = |s: &str| normalize_form(s, options);
    let mut lex = Lexicon::new();

    let path = &paths.lemmas;
    for (line, fields) in tsv_rows(&read_utf8(path)?) {
        expect_columns(path, line, &fields, 2)?;
        lex.insert_lemma(&norm(fields[0]), &norm(fields[1]))
            .map_err(|m| Error::table(path, line, m))?;
    }

    if let Some(path) = &paths.stems {
        for (line, fields) in tsv_rows(&read_utf8(path)?) {
            expect_columns(path, line, &fields, 2)?;
            lex.insert_stem(&norm(fields[0]), fields[1])
                .map_err(|m| Error::table(path, line, m))?;
        }
    }

    if let Some(path) = &paths.synonyms {
        for (line, fields) in tsv_rows(&read_utf8(path)?) {
            let lemmas: Vec<String> = fields.iter().map(|f| norm(f)).collect();
            lex.insert_synonym_set(&lemmas)
                .map_err(|m| Error::table(path, line, m))?;
        }
    }

    if let Some(path) = &paths.frequencies {
        for (line, fields) in tsv_rows(&read_utf8(path)?) {
            expect_columns(path, line, &fields, 2)?;
            let count: u64 = fields[1].parse().map_err(|_| {
                Error::table(path, line, format!("count {:?} is not a positive integer", fields[1]))
            })?;
            lex.insert_frequency(&norm(fields[0]), count)
                .map_err(|m| Error::table(path, line, m))?;
        }
    }

    Ok(lex)
}
