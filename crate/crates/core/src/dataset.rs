//! Labeled sentence corpora: TSV ingestion, class balancing, stratified
//! k-fold splitting, and template-based augmentation.
//!
//! The on-disk format is tab-separated with a header of `id`, `text`,
//! one column per feature, and optional `formality` and `source`
//! columns. Tabs are the default separator because the sentences
//! themselves contain commas.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: missing required column {column}")]
    MissingColumn { path: String, column: String },
    #[error("{path}: unknown feature column {column}")]
    UnknownColumn { path: String, column: String },
    #[error("{path} row {row}: label for {feature} must be 0 or 1, found {value:?}")]
    BadLabel {
        path: String,
        row: usize,
        feature: String,
        value: String,
    },
    #[error("{path} row {row}: malformed row ({reason})")]
    BadRow {
        path: String,
        row: usize,
        reason: String,
    },
    #[error("duplicate record id {0}")]
    DuplicateId(String),
    #[error("feature {0} not in dataset schema")]
    UnknownFeature(String),
    #[error("both classes must be present to balance (found {pos} positive / {neg} negative)")]
    SingleClassBalance { pos: usize, neg: usize },
    #[error(
        "ratio {want_pos}:{want_neg} unattainable from {pos} positive / {neg} negative; \
         at most {max_pos}:{max_neg} attainable by subsampling the majority class"
    )]
    RatioUnattainable {
        want_pos: u32,
        want_neg: u32,
        pos: usize,
        neg: usize,
        max_pos: usize,
        max_neg: usize,
    },
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("class with {count} records is too small for {folds} folds")]
    ClassTooSmall { count: usize, folds: usize },
    #[error("failed to parse templates {path}: {source}")]
    TemplateParse {
        path: String,
        source: serde_json::Error,
    },
    #[error("no usable augmentation templates (all skipped)")]
    NoUsableTemplates,
}

/// One labeled sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub text: String,
    /// feature name -> 0/1
    pub labels: BTreeMap<String, u8>,
    pub formality: Option<u8>,
    pub source: String,
}

impl Record {
    pub fn label(&self, feature: &str) -> Option<u8> {
        self.labels.get(feature).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<Record>,
    pub schema: Vec<String>,
    pub provenance: String,
}

impl Dataset {
    pub fn new(
        records: Vec<Record>,
        schema: Vec<String>,
        provenance: impl Into<String>,
    ) -> Result<Self, DatasetError> {
        let mut seen = BTreeSet::new();
        for r in &records {
            if !seen.insert(r.id.clone()) {
                return Err(DatasetError::DuplicateId(r.id.clone()));
            }
        }
        Ok(Dataset {
            records,
            schema,
            provenance: provenance.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn class_counts(&self, feature: &str) -> Result<(usize, usize), DatasetError> {
        if !self.schema.iter().any(|f| f == feature) {
            return Err(DatasetError::UnknownFeature(feature.to_string()));
        }
        let pos = self
            .records
            .iter()
            .filter(|r| r.label(feature) == Some(1))
            .count();
        Ok((pos, self.records.len() - pos))
    }
}

/// Load a TSV dataset. `schema` names the expected feature columns.
pub fn load_dataset(path: impl AsRef<Path>, schema: &[String]) -> Result<Dataset, DatasetError> {
    let path_str = path.as_ref().display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .flexible(false)
        .from_path(path.as_ref())
        .map_err(|source| csv_err(&path_str, source))?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|source| csv_err(&path_str, source))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("id").ok_or_else(|| missing(&path_str, "id"))?;
    let text_col = col("text").ok_or_else(|| missing(&path_str, "text"))?;
    let formality_col = col("formality");
    let source_col = col("source");

    let mut feature_cols = Vec::new();
    for feature in schema {
        let idx = col(feature).ok_or_else(|| missing(&path_str, feature))?;
        feature_cols.push((feature.clone(), idx));
    }
    for (i, h) in headers.iter().enumerate() {
        let known = i == id_col
            || i == text_col
            || Some(i) == formality_col
            || Some(i) == source_col
            || feature_cols.iter().any(|(_, idx)| *idx == i);
        if !known {
            return Err(DatasetError::UnknownColumn {
                path: path_str,
                column: h.clone(),
            });
        }
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 2; // 1-based, after the header
        let row = row.map_err(|source| csv_err(&path_str, source))?;
        let get = |idx: usize| -> Result<&str, DatasetError> {
            row.get(idx).ok_or_else(|| DatasetError::BadRow {
                path: path_str.clone(),
                row: row_no,
                reason: format!("missing column {idx}"),
            })
        };
        let mut labels = BTreeMap::new();
        for (feature, idx) in &feature_cols {
            let cell = get(*idx)?;
            let value = parse_bit(cell).ok_or_else(|| DatasetError::BadLabel {
                path: path_str.clone(),
                row: row_no,
                feature: feature.clone(),
                value: cell.to_string(),
            })?;
            labels.insert(feature.clone(), value);
        }
        let formality = match formality_col {
            Some(idx) => {
                let cell = get(idx)?;
                if cell.is_empty() {
                    None
                } else {
                    Some(parse_bit(cell).ok_or_else(|| DatasetError::BadLabel {
                        path: path_str.clone(),
                        row: row_no,
                        feature: "formality".to_string(),
                        value: cell.to_string(),
                    })?)
                }
            }
            None => None,
        };
        let source = source_col
            .map(|idx| row.get(idx).unwrap_or("").to_string())
            .unwrap_or_default();
        records.push(Record {
            id: get(id_col)?.to_string(),
            text: get(text_col)?.to_string(),
            labels,
            formality,
            source,
        });
    }

    Dataset::new(records, schema.to_vec(), path_str)
}

fn parse_bit(cell: &str) -> Option<u8> {
    match cell.trim() {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    }
}

fn csv_err(path: &str, source: csv::Error) -> DatasetError {
    DatasetError::Csv {
        path: path.to_string(),
        source,
    }
}

fn missing(path: &str, column: &str) -> DatasetError {
    DatasetError::MissingColumn {
        path: path.to_string(),
        column: column.to_string(),
    }
}

/// Write a dataset as TSV with the same column layout the loader reads.
pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path_str = path.as_ref().display().to_string();
    let io_err = |source| DatasetError::Io {
        path: path_str.clone(),
        source,
    };
    let mut file = std::fs::File::create(path.as_ref()).map_err(io_err)?;
    let has_formality = dataset.records.iter().any(|r| r.formality.is_some());
    let mut header = vec!["id".to_string(), "text".to_string()];
    header.extend(dataset.schema.iter().cloned());
    if has_formality {
        header.push("formality".to_string());
    }
    header.push("source".to_string());
    writeln!(file, "{}", header.join("\t")).map_err(io_err)?;
    for r in &dataset.records {
        let mut cells = vec![r.id.clone(), r.text.clone()];
        for feature in &dataset.schema {
            cells.push(r.label(feature).unwrap_or(0).to_string());
        }
        if has_formality {
            cells.push(r.formality.map(|f| f.to_string()).unwrap_or_default());
        }
        cells.push(r.source.clone());
        writeln!(file, "{}", cells.join("\t")).map_err(io_err)?;
    }
    Ok(())
}

/// Subsample the majority class to reach a `positive:negative` ratio.
/// Survivor order is preserved; the subsample is seed-deterministic.
/// Ratios that would invert which class is the majority are rejected.
pub fn balance(
    dataset: &Dataset,
    feature: &str,
    ratio: (u32, u32),
    seed: u64,
) -> Result<Dataset, DatasetError> {
    let (pos, neg) = dataset.class_counts(feature)?;
    if pos == 0 || neg == 0 {
        return Err(DatasetError::SingleClassBalance { pos, neg });
    }
    let (want_pos, want_neg) = ratio;
    let unattainable = || DatasetError::RatioUnattainable {
        want_pos,
        want_neg,
        pos,
        neg,
        max_pos: pos.min(neg),
        max_neg: pos.min(neg),
    };

    // which class shrinks, and to what size
    let (keep_pos, keep_neg) = if neg >= pos {
        // negatives are the majority: keep all positives
        let target_neg = (pos as u64 * want_neg as u64 / want_pos as u64) as usize;
        if target_neg > neg || target_neg < pos {
            return Err(unattainable());
        }
        (pos, target_neg)
    } else {
        let target_pos = (neg as u64 * want_pos as u64 / want_neg as u64) as usize;
        if target_pos > pos || target_pos < neg {
            return Err(unattainable());
        }
        (target_pos, neg)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |indices: Vec<usize>, keep: usize, rng: &mut ChaCha8Rng| -> BTreeSet<usize> {
        if keep >= indices.len() {
            indices.into_iter().collect()
        } else {
            let mut shuffled = indices;
            shuffled.shuffle(rng);
            shuffled.into_iter().take(keep).collect()
        }
    };
    let pos_idx: Vec<usize> = dataset
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.label(feature) == Some(1))
        .map(|(i, _)| i)
        .collect();
    let neg_idx: Vec<usize> = dataset
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.label(feature) == Some(0))
        .map(|(i, _)| i)
        .collect();
    let keep: BTreeSet<usize> = pick(pos_idx, keep_pos, &mut rng)
        .into_iter()
        .chain(pick(neg_idx, keep_neg, &mut rng))
        .collect();

    let records: Vec<Record> = dataset
        .records
        .iter()
        .enumerate()
        .filter(|(i, _)| keep.contains(i))
        .map(|(_, r)| r.clone())
        .collect();
    Dataset::new(
        records,
        dataset.schema.clone(),
        format!("{} (balanced {}:{})", dataset.provenance, want_pos, want_neg),
    )
}

/// Stratified fold assignment for one feature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: usize,
    /// record id -> fold index
    pub assignment: BTreeMap<String, usize>,
    /// per fold: (positive count, negative count)
    pub class_counts: Vec<(usize, usize)>,
}

impl FoldPlan {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }
}

/// Stratified k-fold split: shuffle each class with the seeded RNG and
/// deal round-robin, so per-fold class shares stay within the stated
/// tolerance of the global share.
pub fn kfold(
    dataset: &Dataset,
    feature: &str,
    folds: usize,
    seed: u64,
) -> Result<FoldPlan, DatasetError> {
    if folds < 2 {
        return Err(DatasetError::TooFewFolds(folds));
    }
    let (pos, neg) = dataset.class_counts(feature)?;
    for count in [pos, neg] {
        if count < folds {
            return Err(DatasetError::ClassTooSmall { count, folds });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = BTreeMap::new();
    let mut class_counts = vec![(0usize, 0usize); folds];
    // one round-robin counter across both classes, so remainder items
    // of the second class fill the folds the first class left short
    let mut next = 0usize;
    for class in [1u8, 0u8] {
        let mut ids: Vec<&str> = dataset
            .records
            .iter()
            .filter(|r| r.label(feature) == Some(class))
            .map(|r| r.id.as_str())
            .collect();
        ids.shuffle(&mut rng);
        for id in &ids {
            let fold = next % folds;
            next += 1;
            assignment.insert(id.to_string(), fold);
            if class == 1 {
                class_counts[fold].0 += 1;
            } else {
                class_counts[fold].1 += 1;
            }
        }
    }
    Ok(FoldPlan {
        folds,
        assignment,
        class_counts,
    })
}

/// Split records into (train, test) for one fold of a plan.
pub fn split_fold<'a>(
    dataset: &'a Dataset,
    plan: &FoldPlan,
    fold: usize,
) -> (Vec<&'a Record>, Vec<&'a Record>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for r in &dataset.records {
        match plan.fold_of(&r.id) {
            Some(f) if f == fold => test.push(r),
            Some(_) => train.push(r),
            None => {}
        }
    }
    (train, test)
}

/// A sentence skeleton: uppercase slots are POS placeholders filled
/// from the augmentation lexicon, lowercase words are literals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Template {
    pub pattern: String,
    pub label: u8,
}

pub type AugmentLexicon = BTreeMap<String, Vec<String>>;

const DEFAULT_TEMPLATES: &str = include_str!("../data/habitual_templates.json");
const DEFAULT_AUGMENT_LEXICON: &str = include_str!("../data/augment_lexicon.json");

pub fn default_templates() -> Vec<Template> {
    serde_json::from_str(DEFAULT_TEMPLATES).expect("bundled habitual_templates.json is valid")
}

pub fn default_augment_lexicon() -> AugmentLexicon {
    serde_json::from_str(DEFAULT_AUGMENT_LEXICON).expect("bundled augment_lexicon.json is valid")
}

pub fn load_templates(path: impl AsRef<Path>) -> Result<Vec<Template>, DatasetError> {
    let path_str = path.as_ref().display().to_string();
    let text = std::fs::read_to_string(path.as_ref()).map_err(|source| DatasetError::Io {
        path: path_str.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| DatasetError::TemplateParse {
        path: path_str,
        source,
    })
}

pub fn load_augment_lexicon(path: impl AsRef<Path>) -> Result<AugmentLexicon, DatasetError> {
    let path_str = path.as_ref().display().to_string();
    let text = std::fs::read_to_string(path.as_ref()).map_err(|source| DatasetError::Io {
        path: path_str.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| DatasetError::TemplateParse {
        path: path_str,
        source,
    })
}

fn instantiate(
    template: &Template,
    lexicon: &AugmentLexicon,
    rng: &mut ChaCha8Rng,
) -> Option<String> {
    let mut words = Vec::new();
    for slot in template.pattern.split_whitespace() {
        if slot.chars().all(|c| c.is_ascii_uppercase()) {
            let choices = lexicon.get(slot)?;
            let word = choices.choose(rng)?;
            words.push(word.as_str());
        } else {
            words.push(slot);
        }
    }
    // sentence-final punctuation attaches to the previous word
    let mut text = String::new();
    for w in &words {
        if w.chars().all(|c| !c.is_alphanumeric()) && !text.is_empty() {
            text.push_str(w);
        } else {
            if !text.is_empty() {
                text.push(' ');
            }
            let capitalize = text.is_empty();
            if capitalize {
                let mut chars = w.chars();
                if let Some(first) = chars.next() {
                    text.extend(first.to_uppercase());
                    text.push_str(chars.as_str());
                }
            } else {
                text.push_str(w);
            }
        }
    }
    Some(text)
}

/// Generate labeled sentences by substituting same-POS words into the
/// template skeletons. Templates referencing a POS class missing from
/// the lexicon are skipped with a warning.
pub fn augment_habitual(
    templates: &[Template],
    lexicon: &AugmentLexicon,
    target_count: usize,
    seed: u64,
) -> Result<Vec<Record>, DatasetError> {
    if target_count == 0 {
        return Ok(Vec::new());
    }
    let mut usable = Vec::new();
    for t in templates {
        let missing: Vec<&str> = t
            .pattern
            .split_whitespace()
            .filter(|s| s.chars().all(|c| c.is_ascii_uppercase()) && !lexicon.contains_key(*s))
            .collect();
        if missing.is_empty() {
            usable.push(t);
        } else {
            log::warn!(
                "skipping template {:?}: no lexicon entries for {:?}",
                t.pattern,
                missing
            );
        }
    }
    if usable.is_empty() {
        return Err(DatasetError::NoUsableTemplates);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(target_count);
    for i in 0..target_count {
        let template = usable[i % usable.len()];
        let text = instantiate(template, lexicon, &mut rng)
            .expect("usable templates have all slots covered");
        let mut labels = BTreeMap::new();
        labels.insert("habitual_be".to_string(), template.label);
        records.push(Record {
            id: format!("aug-{i:05}"),
            text,
            labels,
            formality: None,
            source: "augmented".to_string(),
        });
    }
    Ok(records)
}

/// Synthetic corpus generators used by tests and the `synth-corpus`
/// subcommand. Labels are fixed by construction, not by any tagger.
pub mod synth {
    use super::*;

    /// Habitual Be corpus: single-"be" sentences, labels from the
    /// template class, roughly balanced.
    pub fn habitual_corpus(n: usize, seed: u64) -> Dataset {
        let templates = default_templates();
        let lexicon = default_augment_lexicon();
        let mut records = augment_habitual(&templates, &lexicon, n, seed)
            .expect("bundled templates are usable");
        for (i, r) in records.iter_mut().enumerate() {
            r.id = format!("synth-hb-{i:05}");
            r.source = "synthetic".to_string();
        }
        Dataset::new(
            records,
            vec!["habitual_be".to_string()],
            format!("synthetic habitual corpus (n={n}, seed={seed})"),
        )
        .expect("generated ids are unique")
    }

    const FILLER: &[&str] = &[
        "people", "time", "day", "house", "kind", "hand", "thing", "way", "word", "school",
        "man", "woman", "child", "street", "told", "came", "went", "said", "saw", "looked",
        "talked", "walked", "stayed", "kept", "left", "right", "there", "here", "them", "us",
    ];
    // negators that are not conjunctions and carry no clause boundary
    const NEGATORS: &[&str] = &[
        "not", "no", "never", "nothing", "nobody", "none", "nowhere", "ain't", "didn't",
        "wasn't", "don't", "can't", "won't", "couldn't",
    ];
    const CONJUNCTIONS: &[&str] = &["and", "but", "or", "because", "so", "when", "if"];

    /// Multiple Negation corpus built clause by clause: the gold label
    /// is positive iff some clause received two or more negators.
    pub fn negation_corpus(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut records = Vec::with_capacity(n);
        for i in 0..n {
            let clause_count = rng.gen_range(1..=4);
            let mut clauses: Vec<Vec<&str>> = Vec::new();
            let mut gold = 0u8;
            for _ in 0..clause_count {
                let word_count = rng.gen_range(2..=6);
                let mut words: Vec<&str> = (0..word_count)
                    .map(|_| *FILLER.choose(&mut rng).unwrap())
                    .collect();
                let negator_count = match rng.gen_range(0..10) {
                    0..=4 => 0,
                    5..=7 => 1,
                    _ => rng.gen_range(2..=3),
                };
                for _ in 0..negator_count {
                    let pos = rng.gen_range(0..=words.len());
                    words.insert(pos, NEGATORS.choose(&mut rng).unwrap());
                }
                if negator_count >= 2 {
                    gold = 1;
                }
                clauses.push(words);
            }
            let mut text = String::new();
            for (ci, clause) in clauses.iter().enumerate() {
                if ci > 0 {
                    if rng.gen_bool(0.5) {
                        text.push_str(if rng.gen_bool(0.5) { ", " } else { "; " });
                    } else {
                        text.push(' ');
                        text.push_str(CONJUNCTIONS.choose(&mut rng).unwrap());
                        text.push(' ');
                    }
                }
                text.push_str(&clause.join(" "));
            }
            text.push('.');
            let mut labels = BTreeMap::new();
            labels.insert("multiple_negation".to_string(), gold);
            records.push(Record {
                id: format!("synth-mn-{i:05}"),
                text,
                labels,
                formality: None,
                source: "synthetic".to_string(),
            });
        }
        Dataset::new(
            records,
            vec!["multiple_negation".to_string()],
            format!("synthetic negation corpus (n={n}, seed={seed})"),
        )
        .expect("generated ids are unique")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tsv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn schema(features: &[&str]) -> Vec<String> {
        features.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn loads_valid_file() {
        let f = write_tsv("id\ttext\tmultiple_negation\na\tI ain't step on no dog.\t1\nb\tHello there.\t0\n");
        let d = load_dataset(f.path(), &schema(&["multiple_negation"])).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.records[0].label("multiple_negation"), Some(1));
    }

    #[test]
    fn bad_label_names_the_row() {
        let f = write_tsv("id\ttext\tmultiple_negation\na\tx\t1\nb\ty\t2\n");
        match load_dataset(f.path(), &schema(&["multiple_negation"])) {
            Err(DatasetError::BadLabel { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected BadLabel, got {other:?}"),
        }
    }

    #[test]
    fn unknown_column_is_error() {
        let f = write_tsv("id\ttext\tmystery\na\tx\t1\n");
        assert!(matches!(
            load_dataset(f.path(), &schema(&[])),
            Err(DatasetError::UnknownColumn { .. })
        ));
    }

    #[test]
    fn formality_column_is_optional_per_row() {
        let f = write_tsv("id\ttext\tf1\tformality\na\tx\t1\t1\nb\ty\t0\t\n");
        let d = load_dataset(f.path(), &schema(&["f1"])).unwrap();
        assert_eq!(d.records[0].formality, Some(1));
        assert_eq!(d.records[1].formality, None);
    }

    #[test]
    fn save_load_round_trip() {
        let d = synth::negation_corpus(25, 3);
        let f = tempfile::NamedTempFile::new().unwrap();
        save_dataset(&d, f.path()).unwrap();
        let d2 = load_dataset(f.path(), &d.schema).unwrap();
        assert_eq!(d.records, d2.records);
    }

    fn toy_dataset(pos: usize, neg: usize) -> Dataset {
        let mut records = Vec::new();
        for i in 0..pos + neg {
            let mut labels = BTreeMap::new();
            labels.insert("f".to_string(), u8::from(i < pos));
            records.push(Record {
                id: format!("r{i}"),
                text: format!("sentence {i}"),
                labels,
                formality: None,
                source: String::new(),
            });
        }
        Dataset::new(records, vec!["f".to_string()], "toy").unwrap()
    }

    #[test]
    fn balance_one_to_one() {
        let d = toy_dataset(100, 300);
        let b = balance(&d, "f", (1, 1), 42).unwrap();
        assert_eq!(b.class_counts("f").unwrap(), (100, 100));
        // survivor order preserved
        let ids: Vec<&str> = b.records.iter().map(|r| r.id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort_by_key(|id| {
            d.records.iter().position(|r| r.id == *id).unwrap()
        });
        assert_eq!(ids, sorted);
    }

    #[test]
    fn balance_inverting_ratio_is_error() {
        let d = toy_dataset(100, 300);
        match balance(&d, "f", (2, 1), 42) {
            Err(DatasetError::RatioUnattainable { max_pos, max_neg, .. }) => {
                assert_eq!((max_pos, max_neg), (100, 100));
            }
            other => panic!("expected RatioUnattainable, got {other:?}"),
        }
    }

    #[test]
    fn balance_is_seed_deterministic() {
        let d = toy_dataset(50, 200);
        let a = balance(&d, "f", (1, 2), 7).unwrap();
        let b = balance(&d, "f", (1, 2), 7).unwrap();
        assert_eq!(a.records, b.records);
        let c = balance(&d, "f", (1, 2), 8).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn kfold_paper_shaped_counts() {
        let d = toy_dataset(4010, 3730);
        let plan = kfold(&d, "f", 10, 1).unwrap();
        for (pos, neg) in &plan.class_counts {
            assert_eq!(pos + neg, 774);
            assert_eq!(*pos, 401);
            assert_eq!(*neg, 373);
        }
    }

    #[test]
    fn kfold_small_balanced() {
        let d = toy_dataset(5, 5);
        let plan = kfold(&d, "f", 2, 1).unwrap();
        let sizes: Vec<usize> = plan.class_counts.iter().map(|(p, n)| p + n).collect();
        assert_eq!(sizes.iter().sum::<usize>(), 10);
        assert!(sizes.iter().all(|&s| s == 5));
    }

    #[test]
    fn kfold_class_too_small() {
        let d = toy_dataset(3, 50);
        assert!(matches!(
            kfold(&d, "f", 10, 1),
            Err(DatasetError::ClassTooSmall { .. })
        ));
    }

    #[test]
    fn kfold_partitions_without_loss() {
        let d = toy_dataset(37, 61);
        let plan = kfold(&d, "f", 5, 9).unwrap();
        let mut seen = BTreeSet::new();
        for fold in 0..5 {
            let (train, test) = split_fold(&d, &plan, fold);
            assert_eq!(train.len() + test.len(), d.len());
            for r in test {
                assert!(seen.insert(r.id.clone()), "{} in two folds", r.id);
            }
        }
        assert_eq!(seen.len(), d.len());
    }

    #[test]
    fn kfold_stratification_tolerance() {
        let d = toy_dataset(83, 217);
        let plan = kfold(&d, "f", 7, 3).unwrap();
        let global_share = 83.0 / 300.0;
        for (pos, neg) in &plan.class_counts {
            let size = (pos + neg) as f64;
            let expected = global_share * size;
            assert!(
                (*pos as f64 - expected).abs() <= 2.0,
                "fold has {pos} positives, expected about {expected}"
            );
        }
    }

    #[test]
    fn augment_zero_target_is_empty() {
        let out = augment_habitual(&default_templates(), &default_augment_lexicon(), 0, 1)
            .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn augment_is_seed_deterministic() {
        let t = default_templates();
        let l = default_augment_lexicon();
        let a = augment_habitual(&t, &l, 50, 11).unwrap();
        let b = augment_habitual(&t, &l, 50, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn augment_inherits_template_label() {
        let templates = vec![Template {
            pattern: "PRON be ADJ .".to_string(),
            label: 1,
        }];
        let out =
            augment_habitual(&templates, &default_augment_lexicon(), 5, 2).unwrap();
        assert!(out.iter().all(|r| r.label("habitual_be") == Some(1)));
        assert!(out.iter().all(|r| r.source == "augmented"));
    }

    #[test]
    fn augment_skips_template_with_missing_pos() {
        let templates = vec![
            Template {
                pattern: "XYZQ be ADJ .".to_string(),
                label: 1,
            },
            Template {
                pattern: "PRON be ADJ .".to_string(),
                label: 0,
            },
        ];
        let out =
            augment_habitual(&templates, &default_augment_lexicon(), 4, 2).unwrap();
        assert_eq!(out.len(), 4);
        assert!(out.iter().all(|r| r.label("habitual_be") == Some(0)));
    }

    #[test]
    fn synthetic_habitual_sentences_have_single_be() {
        use crate::text::Sentence;
        let d = synth::habitual_corpus(200, 5);
        for r in &d.records {
            let s = Sentence::new(r.id.clone(), r.text.clone());
            let be_count = s
                .tokens
                .iter()
                .filter(|t| t.is_word() && t.lower == "be")
                .count();
            assert_eq!(be_count, 1, "{}", r.text);
        }
    }
}
