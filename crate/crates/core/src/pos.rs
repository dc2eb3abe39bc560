//! Deterministic POS tagging from a closed-class lexicon plus suffix
//! heuristics. Supplies the POS windows consumed by the Habitual Be
//! classifier; auditable rather than accurate on open text.

use crate::text::{Sentence, TokenKind};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PosError {
    #[error("failed to read POS tables {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse POS tables {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("unknown POS category in tables: {0}")]
    UnknownCategory(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Conj,
    Num,
    Part,
    Punct,
    X,
}

impl PosTag {
    pub fn parse(name: &str) -> Option<PosTag> {
        Some(match name {
            "NOUN" => PosTag::Noun,
            "VERB" => PosTag::Verb,
            "ADJ" => PosTag::Adj,
            "ADV" => PosTag::Adv,
            "PRON" => PosTag::Pron,
            "DET" => PosTag::Det,
            "ADP" => PosTag::Adp,
            "CONJ" => PosTag::Conj,
            "NUM" => PosTag::Num,
            "PART" => PosTag::Part,
            "PUNCT" => PosTag::Punct,
            "X" => PosTag::X,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Pron => "PRON",
            PosTag::Det => "DET",
            PosTag::Adp => "ADP",
            PosTag::Conj => "CONJ",
            PosTag::Num => "NUM",
            PosTag::Part => "PART",
            PosTag::Punct => "PUNCT",
            PosTag::X => "X",
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Deserialize)]
struct PosTablesFile {
    lexicon: BTreeMap<String, Vec<String>>,
    suffixes: Vec<(String, String)>,
}

/// Word lexicon and suffix table. When one word appears in several
/// categories the earlier category in `CATEGORY_PRECEDENCE` wins.
#[derive(Debug, Clone)]
pub struct PosTables {
    words: HashMap<String, PosTag>,
    suffixes: Vec<(String, PosTag)>,
}

const CATEGORY_PRECEDENCE: &[&str] = &[
    "PRON", "DET", "ADP", "CONJ", "PART", "VERB", "ADV", "ADJ", "NUM", "NOUN", "X",
];

const DEFAULT_TABLES: &str = include_str!("../data/pos_tags.json");

impl Default for PosTables {
    fn default() -> Self {
        Self::from_json(DEFAULT_TABLES).expect("bundled pos_tags.json is valid")
    }
}

impl PosTables {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, PosError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PosError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            PosError::Parse { source, .. } => PosError::Parse {
                path: path.display().to_string(),
                source,
            },
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, PosError> {
        let file: PosTablesFile = serde_json::from_str(text).map_err(|source| PosError::Parse {
            path: "<inline>".to_string(),
            source,
        })?;
        let mut words = HashMap::new();
        for category in CATEGORY_PRECEDENCE {
            if let Some(entries) = file.lexicon.get(*category) {
                let tag = PosTag::parse(category)
                    .ok_or_else(|| PosError::UnknownCategory(category.to_string()))?;
                for word in entries {
                    words.entry(word.to_lowercase()).or_insert(tag);
                }
            }
        }
        for category in file.lexicon.keys() {
            if !CATEGORY_PRECEDENCE.contains(&category.as_str()) {
                return Err(PosError::UnknownCategory(category.clone()));
            }
        }
        let mut suffixes = Vec::new();
        for (suffix, name) in file.suffixes {
            let tag =
                PosTag::parse(&name).ok_or_else(|| PosError::UnknownCategory(name.clone()))?;
            suffixes.push((suffix, tag));
        }
        Ok(PosTables { words, suffixes })
    }

    fn lookup_word(&self, lower: &str) -> Option<PosTag> {
        self.words.get(lower).copied()
    }

    fn suffix_tag(&self, lower: &str) -> Option<PosTag> {
        if lower.chars().any(|c| c.is_ascii_digit()) {
            return Some(PosTag::Num);
        }
        if lower.ends_with("n't") {
            return Some(PosTag::Verb);
        }
        for (suffix, tag) in &self.suffixes {
            // require at least one extra character before the suffix
            if lower.len() > suffix.len() && lower.ends_with(suffix.as_str()) {
                return Some(*tag);
            }
        }
        None
    }
}

/// Tag every token of a sentence. Lookup order: punctuation kind, word
/// lexicon, suffix heuristics (digits -> NUM, n't -> VERB, then the
/// suffix table), fallback NOUN.
pub fn tag_pos(sentence: &Sentence, tables: &PosTables) -> Vec<PosTag> {
    sentence
        .tokens
        .iter()
        .map(|t| {
            if t.kind == TokenKind::Punctuation {
                PosTag::Punct
            } else if let Some(tag) = tables.lookup_word(&t.lower) {
                tag
            } else if let Some(tag) = tables.suffix_tag(&t.lower) {
                tag
            } else {
                PosTag::Noun
            }
        })
        .collect()
}
