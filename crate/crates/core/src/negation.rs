//! Rule-based Multiple Negation tagger.
//!
//! A sentence is tagged positive when any single clause contains two or
//! more negators. Known divergence from the linguistic gold standard:
//! "I didn't ask you not to come" has no boundary token between its two
//! negators, so the rule tags it positive even though each negator
//! belongs to a different clausal constituent. This false positive is
//! pinned in the test suite.

use crate::text::{segment_clauses, BoundaryConfig, Sentence};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NegationError {
    #[error("failed to read negator lexicon {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse negator lexicon {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("negator lexicon has no entries")]
    EmptyLexicon,
}

/// Binary presence label for a named grammatical feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureLabel {
    Positive,
    Negative,
}

impl FeatureLabel {
    pub fn from_bit(bit: u8) -> Self {
        if bit == 1 {
            FeatureLabel::Positive
        } else {
            FeatureLabel::Negative
        }
    }

    pub fn as_bit(self) -> u8 {
        match self {
            FeatureLabel::Positive => 1,
            FeatureLabel::Negative => 0,
        }
    }
}

/// Lowercase negator word forms plus an optional rule treating any word
/// ending in "n't" as a negator. JSON: `{"negators": [...], "nt_suffix": true}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NegatorLexicon {
    #[serde(rename = "negators")]
    pub entries: BTreeSet<String>,
    #[serde(rename = "nt_suffix")]
    pub contraction_suffix_rule: bool,
}

const DEFAULT_NEGATORS: &str = include_str!("../data/negators.json");

impl Default for NegatorLexicon {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_NEGATORS).expect("bundled negators.json is valid")
    }
}

impl NegatorLexicon {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, NegationError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| NegationError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let lexicon: NegatorLexicon =
            serde_json::from_str(&text).map_err(|source| NegationError::Parse {
                path: path.display().to_string(),
                source,
            })?;
        if lexicon.entries.is_empty() {
            return Err(NegationError::EmptyLexicon);
        }
        Ok(lexicon)
    }

    pub fn is_negator(&self, lower: &str) -> bool {
        self.entries.contains(lower)
            || (self.contraction_suffix_rule && lower.ends_with("n't"))
    }
}

/// Indices of word tokens that are negators, in ascending order.
pub fn find_negators(sentence: &Sentence, lexicon: &NegatorLexicon) -> Vec<usize> {
    sentence
        .tokens
        .iter()
        .filter(|t| t.is_word() && lexicon.is_negator(&t.lower))
        .map(|t| t.index)
        .collect()
}

/// Positive iff some clause contains two or more negator tokens.
pub fn tag_multiple_negation(
    sentence: &Sentence,
    lexicon: &NegatorLexicon,
    config: &BoundaryConfig,
) -> FeatureLabel {
    let negators = find_negators(sentence, lexicon);
    if negators.len() < 2 {
        return FeatureLabel::Negative;
    }
    for clause in segment_clauses(sentence, config) {
        let in_clause = negators.iter().filter(|&&i| clause.contains(i)).count();
        if in_clause >= 2 {
            return FeatureLabel::Positive;
        }
    }
    FeatureLabel::Negative
}
