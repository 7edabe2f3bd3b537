//! Plain-text corpus loading, Unicode normalization and tokenization.
//!
//! A corpus is a directory tree of UTF-8 `*.txt` files, one document per
//! file. Leading lines of the form `#! author: ...` or `#! work: ...` carry
//! citation metadata and are not tokenized. Line numbers always refer to the
//! physical file lines, header lines included.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;
use walkdir::WalkDir;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnicodeForm {
    /// NFC
    Composed,
    /// NFD
    Decomposed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalizationOptions {
    pub fold_case: bool,
    pub strip_diacritics: bool,
    pub unicode_form: UnicodeForm,
}

impl Default for NormalizationOptions {
    fn default() -> Self {
        NormalizationOptions {
            fold_case: true,
            strip_diacritics: false,
            unicode_form: UnicodeForm::Decomposed,
        }
    }
}

/// Normalize a single word (or any string) for matching.
///
/// The input is decomposed first so that case folding and mark removal see
/// base letters and combining marks separately; the result is then brought
/// into the requested Unicode form. Greek final sigma folds to medial sigma.
pub fn normalize_form(raw: &str, options: &NormalizationOptions) -> String {
    let mut folded = String::with_capacity(raw.len());
    for c in raw.nfd() {
        if options.strip_diacritics && is_combining_mark(c) {
            continue;
        }
        if options.fold_case {
            for lc in c.to_lowercase() {
                folded.push(if lc == 'ς' { 'σ' } else { lc });
            }
        } else {
            folded.push(c);
        }
    }
    // Lowercasing can itself introduce combining marks (e.g. U+0130).
    if options.strip_diacritics {
        folded.retain(|c| !is_combining_mark(c));
    }
    match options.unicode_form {
        UnicodeForm::Composed => folded.nfc().collect(),
        UnicodeForm::Decomposed => folded.nfd().collect(),
    }
}

/// One word occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Raw text as it appears in the source.
    pub surface: String,
    /// Normalized form used for matching; never empty.
    pub norm: String,
    /// 0-based ordinal within the document.
    pub position: usize,
    /// 1-based line number.
    pub line: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || is_combining_mark(c)
}

/// Split `text` into word tokens. Words are maximal runs of letters and
/// combining marks; everything else (punctuation, digits, apostrophes,
/// whitespace) separates them.
pub fn tokenize(text: &str, options: &NormalizationOptions) -> Vec<Token> {
    let mut tokens = Vec::new();
    for (idx, line) in text.split('\n').enumerate() {
        tokenize_line(line, idx + 1, options, &mut tokens);
    }
    tokens
}

fn tokenize_line(line: &str, line_no: usize, options: &NormalizationOptions, out: &mut Vec<Token>) {
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                push_token(&line[s..i], line_no, options, out);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        push_token(&line[s..], line_no, options, out);
    }
}

fn push_token(surface: &str, line: usize, options: &NormalizationOptions, out: &mut Vec<Token>) {
    let norm = normalize_form(surface, options);
    // A lone combining mark vanishes under diacritic stripping.
    if norm.is_empty() {
        return;
    }
    out.push(Token {
        surface: surface.to_string(),
        norm,
        position: out.len(),
        line,
    });
}

/// Caller-supplied identity of a document. `author` and `work` left as
/// `None` are taken from the file's `#!` header lines, if any.
#[derive(Debug, Clone, Default)]
pub struct DocumentMeta {
    pub id: String,
    pub author: Option<String>,
    pub work: Option<String>,
}

impl DocumentMeta {
    pub fn new(id: impl Into<String>) -> Self {
        DocumentMeta {
            id: id.into(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub author: String,
    pub work: String,
    pub path: PathBuf,
    pub tokens: Vec<Token>,
}

impl Document {
    /// Build a document directly from text, without header processing.
    pub fn from_text(id: impl Into<String>, text: &str, options: &NormalizationOptions) -> Self {
        Document {
            id: id.into(),
            author: String::new(),
            work: String::new(),
            path: PathBuf::new(),
            tokens: tokenize(text, options),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub total_tokens: usize,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Self {
        let total_tokens = documents.iter().map(Document::len).sum();
        Corpus {
            documents,
            total_tokens,
        }
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }
}

/// Read a file as UTF-8, reporting the byte offset of the first bad sequence.
pub(crate) fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| Error::Encoding {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })
}

fn parse_header(line: &str) -> Option<(&str, &str)> {
    let rest = line.strip_prefix("#!")?;
    let (key, value) = rest.split_once(':')?;
    Some((key.trim(), value.trim()))
}

pub fn load_document(path: &Path, meta: DocumentMeta, options: &NormalizationOptions) -> Result<Document> {
    let text = read_utf8(path)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(&text);

    let mut author = None;
    let mut work = None;
    let mut in_header = true;
    let mut tokens = Vec::new();
    for (idx, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if in_header && line.starts_with("#!") {
            match parse_header(line) {
                Some(("author", v)) => author = Some(v.to_string()),
                Some(("work", v)) => work = Some(v.to_string()),
                _ => {}
            }
            continue;
        }
        in_header = false;
        tokenize_line(line, idx + 1, options, &mut tokens);
    }

    Ok(Document {
        id: meta.id,
        author: meta.author.or(author).unwrap_or_default(),
        work: meta.work.or(work).unwrap_or_default(),
        path: path.to_path_buf(),
        tokens,
    })
}

/// Load every `*.txt` file under `root`, ordered by relative path.
///
/// Document ids are the `/`-separated paths relative to `root`. Any
/// unreadable file fails the whole load.
pub fn load_corpus(root: &Path, options: &NormalizationOptions) -> Result<Corpus> {
    let mut files = Vec::new();
    for entry in WalkDir::new(root) {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into())
        })?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|ext| ext != "txt") {
            continue;
        }
        let rel = path.strip_prefix(root).unwrap_or(path);
        let id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        files.push((id, path.to_path_buf()));
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));

    let loaded: Vec<Result<Document>> = files
        .into_par_iter()
        .map(|(id, path)| load_document(&path, DocumentMeta::new(id), options))
        .collect();
    let documents = loaded.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Corpus::new(documents))
}
