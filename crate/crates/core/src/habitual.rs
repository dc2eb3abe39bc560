//! Habitual Be classifier: indicator features from token and POS
//! windows around the single "be" token, trained fold-by-fold with the
//! logistic regression in [`crate::glm`].
//!
//! This is a linear stand-in for the transformer baseline it replaces;
//! it consumes the same declared inputs (token n-gram window and POS
//! window) with contextual structure reduced to POS bigrams.

use crate::dataset::{kfold, split_fold, Dataset, DatasetError};
use crate::glm::{self, DesignMatrix, FitConfig, GlmError, INTERCEPT};
use crate::metrics::{self, ClassificationReport, MetricsError};
use crate::negation::FeatureLabel;
use crate::pos::{tag_pos, PosTables};
use crate::text::Sentence;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use thiserror::Error;

pub const PAD: &str = "<pad>";

#[derive(Debug, Error)]
pub enum HabitualError {
    #[error("sentence {id} has no \"be\" token")]
    ZeroBe { id: String },
    #[error("sentence {id} has {count} \"be\" tokens; exactly one is required")]
    MultipleBe { id: String, count: usize },
    #[error("record {id} is missing the {feature} label")]
    MissingLabel { id: String, feature: String },
    #[error("fold {fold}: training split contains a single label class")]
    SingleClassFold { fold: usize },
    #[error("fold {fold}: {source}")]
    Fit { fold: usize, source: GlmError },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("failed to read model {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse model {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
}

/// Token and POS windows of size `2k` around the unique "be" token,
/// padded at sentence edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeContext {
    pub be_index: usize,
    /// k lowercased tokens left then k right, `<pad>` beyond the edges.
    pub token_window: Vec<String>,
    /// Same geometry over POS tag names.
    pub pos_window: Vec<String>,
    pub k: usize,
}

/// Named binary indicator features; the intercept is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub names: BTreeSet<String>,
}

/// Extract the window context around the single "be" token.
pub fn extract_be_context(
    sentence: &Sentence,
    k: usize,
    tables: &PosTables,
) -> Result<BeContext, HabitualError> {
    let be_indices: Vec<usize> = sentence
        .tokens
        .iter()
        .filter(|t| t.is_word() && t.lower == "be")
        .map(|t| t.index)
        .collect();
    let be_index = match be_indices.len() {
        0 => {
            return Err(HabitualError::ZeroBe {
                id: sentence.id.clone(),
            })
        }
        1 => be_indices[0],
        count => {
            return Err(HabitualError::MultipleBe {
                id: sentence.id.clone(),
                count,
            })
        }
    };
    let tags = tag_pos(sentence, tables);
    let n = sentence.tokens.len();
    let mut token_window = Vec::with_capacity(2 * k);
    let mut pos_window = Vec::with_capacity(2 * k);
    let mut push_slot = |idx: Option<usize>| match idx {
        Some(i) if i < n => {
            token_window.push(sentence.tokens[i].lower.clone());
            pos_window.push(tags[i].name().to_string());
        }
        _ => {
            token_window.push(PAD.to_string());
            pos_window.push(PAD.to_string());
        }
    };
    for offset in (1..=k).rev() {
        push_slot(be_index.checked_sub(offset));
    }
    for offset in 1..=k {
        push_slot(Some(be_index + offset));
    }
    Ok(BeContext {
        be_index,
        token_window,
        pos_window,
        k,
    })
}

fn slot_offsets(k: usize) -> Vec<i64> {
    let mut offsets = Vec::with_capacity(2 * k);
    for o in (1..=k as i64).rev() {
        offsets.push(-o);
    }
    for o in 1..=k as i64 {
        offsets.push(o);
    }
    offsets
}

/// Unigram indicators per slot for token and POS, plus POS bigrams over
/// adjacent slots. Deterministic given (sentence, k).
pub fn vectorize(ctx: &BeContext) -> FeatureVector {
    let offsets = slot_offsets(ctx.k);
    let mut names = BTreeSet::new();
    for (slot, offset) in offsets.iter().enumerate() {
        names.insert(format!("t[{offset:+}]={}", ctx.token_window[slot]));
        names.insert(format!("p[{offset:+}]={}", ctx.pos_window[slot]));
    }
    for slot in 0..offsets.len().saturating_sub(1) {
        let (a, b) = (offsets[slot], offsets[slot + 1]);
        names.insert(format!(
            "p[{a:+},{b:+}]={}+{}",
            ctx.pos_window[slot],
            ctx.pos_window[slot + 1]
        ));
    }
    FeatureVector { names }
}

/// Trained fold model: weights per feature name plus the geometry and
/// decision threshold. JSON-serializable, stable across platforms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HabitualModel {
    pub weights: BTreeMap<String, f64>,
    pub k: usize,
    pub threshold: f64,
    pub fold: Option<usize>,
    pub feature: String,
}

impl HabitualModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HabitualError> {
        let path_str = path.as_ref().display().to_string();
        let text = serde_json::to_string_pretty(self).expect("model serializes");
        std::fs::write(path.as_ref(), text).map_err(|source| HabitualError::Io {
            path: path_str,
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HabitualError> {
        let path_str = path.as_ref().display().to_string();
        let text = std::fs::read_to_string(path.as_ref()).map_err(|source| HabitualError::Io {
            path: path_str.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| HabitualError::Parse {
            path: path_str,
            source,
        })
    }

    fn decision_value(&self, fv: &FeatureVector) -> f64 {
        let mut eta = self.weights.get(INTERCEPT).copied().unwrap_or(0.0);
        for name in &fv.names {
            if let Some(w) = self.weights.get(name) {
                eta += w;
            }
        }
        eta
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub k: usize,
    pub folds: usize,
    pub seed: u64,
    pub threshold: f64,
    /// Ridge penalty guarding against separation on sparse indicators.
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k: 3,
            folds: 10,
            seed: 42,
            threshold: 0.5,
            l2: 1e-4,
        }
    }
}

#[derive(Debug)]
pub struct FoldOutcome {
    pub model: HabitualModel,
    pub report: ClassificationReport,
}

/// Cross-validated training: one model and held-out report per fold.
pub fn train_habitual(
    dataset: &Dataset,
    feature: &str,
    config: &TrainConfig,
    tables: &PosTables,
) -> Result<Vec<FoldOutcome>, HabitualError> {
    let contexts = contexts_for(dataset, feature, config.k, tables)?;
    let plan = kfold(dataset, feature, config.folds, config.seed)?;
    let mut outcomes = Vec::with_capacity(config.folds);
    for fold in 0..config.folds {
        let (train, test) = split_fold(dataset, &plan, fold);
        let model = fit_on(
            &train
                .iter()
                .map(|r| (contexts[&r.id].clone(), r.label(feature).unwrap()))
                .collect::<Vec<_>>(),
            feature,
            Some(fold),
            config,
        )?;
        let mut preds = Vec::with_capacity(test.len());
        let mut golds = Vec::with_capacity(test.len());
        for r in &test {
            let (label, _) = classify(&model, &contexts[&r.id]);
            preds.push(label.as_bit());
            golds.push(r.label(feature).unwrap());
        }
        let report = metrics::score(&preds, &golds)?;
        outcomes.push(FoldOutcome { model, report });
    }
    Ok(outcomes)
}

/// Fit one model on the full dataset (used for `--model-out`).
pub fn train_full(
    dataset: &Dataset,
    feature: &str,
    config: &TrainConfig,
    tables: &PosTables,
) -> Result<HabitualModel, HabitualError> {
    let contexts = contexts_for(dataset, feature, config.k, tables)?;
    let pairs: Vec<(FeatureVector, u8)> = dataset
        .records
        .iter()
        .map(|r| (contexts[&r.id].clone(), r.label(feature).unwrap()))
        .collect();
    fit_on(&pairs, feature, None, config)
}

fn contexts_for(
    dataset: &Dataset,
    feature: &str,
    k: usize,
    tables: &PosTables,
) -> Result<BTreeMap<String, FeatureVector>, HabitualError> {
    let mut contexts = BTreeMap::new();
    for r in &dataset.records {
        if r.label(feature).is_none() {
            return Err(HabitualError::MissingLabel {
                id: r.id.clone(),
                feature: feature.to_string(),
            });
        }
        let sentence = Sentence::new(r.id.clone(), r.text.clone());
        let ctx = extract_be_context(&sentence, k, tables)?;
        contexts.insert(r.id.clone(), vectorize(&ctx));
    }
    Ok(contexts)
}

fn fit_on(
    pairs: &[(FeatureVector, u8)],
    feature: &str,
    fold: Option<usize>,
    config: &TrainConfig,
) -> Result<HabitualModel, HabitualError> {
    let fold_id = fold.unwrap_or(0);
    let labels: BTreeSet<u8> = pairs.iter().map(|(_, y)| *y).collect();
    if labels.len() < 2 {
        return Err(HabitualError::SingleClassFold { fold: fold_id });
    }
    // feature vocabulary from the training split only
    let mut vocab = BTreeSet::new();
    for (fv, _) in pairs {
        vocab.extend(fv.names.iter().cloned());
    }
    let columns: Vec<String> = vocab.into_iter().collect();
    let index: BTreeMap<&str, usize> = columns
        .iter()
        .enumerate()
        .map(|(i, name)| (name.as_str(), i))
        .collect();

    let mut names = vec![INTERCEPT.to_string()];
    names.extend(columns.iter().cloned());
    let mut rows = Vec::with_capacity(pairs.len());
    let mut y = Vec::with_capacity(pairs.len());
    for (fv, label) in pairs {
        let mut row = vec![0.0f64; names.len()];
        row[0] = 1.0;
        for name in &fv.names {
            row[index[name.as_str()] + 1] = 1.0;
        }
        rows.push(row);
        y.push(*label);
    }
    let x = DesignMatrix::from_rows(names.clone(), rows)
        .map_err(|source| HabitualError::Fit { fold: fold_id, source })?;
    let fit = glm::fit_logistic(
        &x,
        &y,
        &FitConfig {
            l2: config.l2,
            ..FitConfig::default()
        },
    )
    .map_err(|source| HabitualError::Fit { fold: fold_id, source })?;

    let weights: BTreeMap<String, f64> = names.into_iter().zip(fit.coef).collect();
    Ok(HabitualModel {
        weights,
        k: config.k,
        threshold: config.threshold,
        fold,
        feature: feature.to_string(),
    })
}

fn classify(model: &HabitualModel, fv: &FeatureVector) -> (FeatureLabel, f64) {
    let prob = glm::sigmoid(model.decision_value(fv));
    let label = if prob >= model.threshold {
        FeatureLabel::Positive
    } else {
        FeatureLabel::Negative
    };
    (label, prob)
}

/// Classify one sentence; probability is `logistic(w . x)`.
pub fn predict_habitual(
    model: &HabitualModel,
    sentence: &Sentence,
    tables: &PosTables,
) -> Result<(FeatureLabel, f64), HabitualError> {
    let ctx = extract_be_context(sentence, model.k, tables)?;
    Ok(classify(model, &vectorize(&ctx)))
}
