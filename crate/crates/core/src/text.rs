//! Tokenization and clause segmentation shared by all taggers.
//!
//! The tokenizer splits on whitespace and peels sentence-internal
//! punctuation into separate tokens, with one exception: apostrophes
//! flanked by letters stay inside the word, so contractions such as
//! "ain't" and "hadn't" survive as single tokens. Clause boundaries are
//! punctuation marks from a configurable set plus a flat conjunction
//! lexicon; a conjunction belongs to the clause it opens.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("failed to read boundary config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse boundary config {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
}

/// Word vs punctuation token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Casefolded surface form.
    pub lower: String,
    /// 0-based position in the sentence.
    pub index: usize,
    /// Byte offsets `[start, end)` into the raw sentence.
    pub span: (usize, usize),
    pub kind: TokenKind,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub raw: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(id: impl Into<String>, raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let tokens = tokenize(&raw);
        Sentence {
            id: id.into(),
            raw,
            tokens,
        }
    }

    /// Indices of word tokens, in order.
    pub fn word_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.tokens
            .iter()
            .filter(|t| t.is_word())
            .map(|t| t.index)
    }
}

/// What opened a clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCause {
    SentenceStart,
    Punctuation,
    Conjunction,
}

/// Half-open token-index range `[first, last)` covering one clause.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub token_range: (usize, usize),
    pub boundary_cause: BoundaryCause,
}

impl Clause {
    pub fn contains(&self, token_index: usize) -> bool {
        token_index >= self.token_range.0 && token_index < self.token_range.1
    }
}

/// Clause boundary configuration: boundary punctuation marks and the
/// conjunction lexicon. Loadable from JSON:
/// `{"punctuation": [...], "conjunctions": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryConfig {
    pub punctuation: BTreeSet<String>,
    pub conjunctions: BTreeSet<String>,
}

const DEFAULT_BOUNDARIES: &str = include_str!("../data/boundaries.json");

impl Default for BoundaryConfig {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_BOUNDARIES).expect("bundled boundaries.json is valid")
    }
}

impl BoundaryConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TextError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| TextError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| TextError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn is_boundary_punct(&self, surface: &str) -> bool {
        self.punctuation.contains(surface)
    }

    pub fn is_conjunction(&self, lower: &str) -> bool {
        self.conjunctions.contains(lower)
    }
}

fn is_punct_char(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Punctuation that stays inside a word: apostrophes between
/// alphanumerics (contractions) and colons between digits (clock times
/// like "7:30", which would otherwise split into bogus clauses).
fn is_word_internal(prev: char, c: char, next: char) -> bool {
    (is_apostrophe(c) && prev.is_alphanumeric() && next.is_alphanumeric())
        || (c == ':' && prev.is_ascii_digit() && next.is_ascii_digit())
}

/// Split raw text into word and punctuation tokens.
///
/// Words split on whitespace; punctuation characters become their own
/// tokens except apostrophes with alphanumerics on both sides, which
/// stay word-internal ("ain't", "I'm"). Deterministic; empty input
/// yields an empty list.
pub fn tokenize(raw: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = raw.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_punct_char(c) {
            let keep_in_word = i > 0
                && i + 1 < chars.len()
                && is_word_internal(chars[i - 1].1, c, chars[i + 1].1);
            if !keep_in_word {
                let end = start + c.len_utf8();
                push_token(&mut tokens, raw, start, end);
                i += 1;
                continue;
            }
            // word-internal apostrophe: fall through into word scan below
        }
        // scan a word run
        let word_start = start;
        let mut end = start;
        while i < chars.len() {
            let (pos, ch) = chars[i];
            if ch.is_whitespace() {
                break;
            }
            if is_punct_char(ch) {
                let internal = pos > word_start
                    && i + 1 < chars.len()
                    && is_word_internal(chars[i - 1].1, ch, chars[i + 1].1);
                if !internal {
                    break;
                }
            }
            end = pos + ch.len_utf8();
            i += 1;
        }
        push_token(&mut tokens, raw, word_start, end);
    }
    tokens
}

fn push_token(tokens: &mut Vec<Token>, raw: &str, start: usize, end: usize) {
    let surface = raw[start..end].to_string();
    let kind = if surface.chars().all(is_punct_char) {
        TokenKind::Punctuation
    } else {
        TokenKind::Word
    };
    let index = tokens.len();
    tokens.push(Token {
        lower: surface.to_lowercase(),
        surface,
        index,
        span: (start, end),
        kind,
    });
}

/// Partition the word tokens of a sentence into clauses.
///
/// A new clause starts after every boundary punctuation token and at
/// every conjunction token; the conjunction belongs to the clause it
/// opens. Empty fragments between consecutive boundaries produce no
/// clause.
pub fn segment_clauses(sentence: &Sentence, config: &BoundaryConfig) -> Vec<Clause> {
    let mut clauses = Vec::new();
    let mut open: Option<(usize, usize, BoundaryCause)> = None; // (first, last_word, cause)
    let mut next_cause = BoundaryCause::SentenceStart;
    for token in &sentence.tokens {
        match token.kind {
            TokenKind::Punctuation => {
                if config.is_boundary_punct(&token.surface) {
                    if let Some((first, last_word, cause)) = open.take() {
                        clauses.push(Clause {
                            token_range: (first, last_word + 1),
                            boundary_cause: cause,
                        });
                    }
                    next_cause = BoundaryCause::Punctuation;
                }
            }
            TokenKind::Word => {
                if config.is_conjunction(&token.lower) {
                    if let Some((first, last_word, cause)) = open.take() {
                        clauses.push(Clause {
                            token_range: (first, last_word + 1),
                            boundary_cause: cause,
                        });
                        next_cause = BoundaryCause::Conjunction;
                    }
                    open = Some((token.index, token.index, next_cause));
                } else {
                    match &mut open {
                        Some((_, last_word, _)) => *last_word = token.index,
                        None => open = Some((token.index, token.index, next_cause)),
                    }
                }
            }
        }
    }
    if let Some((first, last_word, cause)) = open {
        clauses.push(Clause {
            token_range: (first, last_word + 1),
            boundary_cause: cause,
        });
    }
    clauses
}
