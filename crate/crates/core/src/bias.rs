//! Bias analyses over prediction traces: the recency covariate and
//! regression, the formality regression, and the ordering-experiment
//! run plans. A trace is the ordered record of (prediction, gold)
//! pairs in processing order; order is semantic.

use crate::glm::{self, design_with_intercept, FitConfig, FitResult, GlmError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BiasError {
    #[error("trace positions must be strictly increasing (entry {index})")]
    UnorderedTrace { index: usize },
    #[error("trace of length {len} is shorter than window + 1 = {needed}")]
    TraceTooShort { len: usize, needed: usize },
    #[error("all included rows have the same predicted label; regression undefined")]
    ConstantPrediction,
    #[error("formality flags missing for ids: {0:?}")]
    MissingFlags(Vec<String>),
    #[error("formality flags all equal; regression undefined")]
    ConstantFlags,
    #[error("ordering probes must be exactly 5 gold-1 and 5 gold-0, got {ones} / {zeros}")]
    BadProbeCounts { ones: usize, zeros: usize },
    #[error(transparent)]
    Glm(#[from] GlmError),
    #[error("failed to read trace {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse trace {path} line {line}: {source}")]
    Parse {
        path: String,
        line: usize,
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub id: String,
    pub predicted: u8,
    pub gold: u8,
    pub batch: usize,
    pub position: usize,
}

/// Ordered predictions in processing order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictionTrace {
    pub entries: Vec<TraceEntry>,
}

impl PredictionTrace {
    pub fn new(entries: Vec<TraceEntry>) -> Result<Self, BiasError> {
        for (i, pair) in entries.windows(2).enumerate() {
            if pair[1].position <= pair[0].position {
                return Err(BiasError::UnorderedTrace { index: i + 1 });
            }
        }
        Ok(PredictionTrace { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// JSON-lines persistence, one entry per line.
    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<(), BiasError> {
        let path_str = path.as_ref().display().to_string();
        let mut file = std::fs::File::create(path.as_ref()).map_err(|source| BiasError::Io {
            path: path_str.clone(),
            source,
        })?;
        for entry in &self.entries {
            let line = serde_json::to_string(entry).expect("trace entry serializes");
            writeln!(file, "{line}").map_err(|source| BiasError::Io {
                path: path_str.clone(),
                source,
            })?;
        }
        Ok(())
    }

    pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Self, BiasError> {
        let path_str = path.as_ref().display().to_string();
        let file = std::fs::File::open(path.as_ref()).map_err(|source| BiasError::Io {
            path: path_str.clone(),
            source,
        })?;
        let mut entries = Vec::new();
        for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| BiasError::Io {
                path: path_str.clone(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            entries.push(serde_json::from_str(&line).map_err(|source| BiasError::Parse {
                path: path_str.clone(),
                line: i + 1,
                source,
            })?);
        }
        PredictionTrace::new(entries)
    }
}

pub const DEFAULT_WINDOW: usize = 5;

/// Per-position recency covariate: the proportion of the previous
/// `window` predictions that equal the current prediction. Positions
/// with fewer than `window` predecessors are excluded. With
/// `reset_per_batch`, predecessors only count within the same batch.
pub fn recency_feature(
    trace: &PredictionTrace,
    window: usize,
    reset_per_batch: bool,
) -> Result<Vec<(String, f64)>, BiasError> {
    if trace.len() < window + 1 {
        return Err(BiasError::TraceTooShort {
            len: trace.len(),
            needed: window + 1,
        });
    }
    let mut out = Vec::new();
    for i in 0..trace.entries.len() {
        if i < window {
            continue;
        }
        let current = &trace.entries[i];
        let predecessors = &trace.entries[i - window..i];
        if reset_per_batch && predecessors.iter().any(|p| p.batch != current.batch) {
            continue;
        }
        let matches = predecessors
            .iter()
            .filter(|p| p.predicted == current.predicted)
            .count();
        out.push((current.id.clone(), matches as f64 / window as f64));
    }
    Ok(out)
}

/// Per-position share of the previous `window` predictions that are 1,
/// under the same inclusion rules as [`recency_feature`]. This is the
/// regression covariate: unlike the matching proportion it does not
/// contain the current prediction, so Wald inference stays valid (the
/// matching proportion's circularity inflates null rejection rates
/// severalfold in simulation).
pub fn prior_positive_share(
    trace: &PredictionTrace,
    window: usize,
    reset_per_batch: bool,
) -> Result<Vec<(String, f64)>, BiasError> {
    if trace.len() < window + 1 {
        return Err(BiasError::TraceTooShort {
            len: trace.len(),
            needed: window + 1,
        });
    }
    let mut out = Vec::new();
    for i in window..trace.entries.len() {
        let current = &trace.entries[i];
        let predecessors = &trace.entries[i - window..i];
        if reset_per_batch && predecessors.iter().any(|p| p.batch != current.batch) {
            continue;
        }
        let ones = predecessors.iter().filter(|p| p.predicted == 1).count();
        out.push((current.id.clone(), ones as f64 / window as f64));
    }
    Ok(out)
}

/// Recency regression output plus the confound diagnostic: the
/// correlation between the recency covariate and the gold label (long
/// all-correct streaks inflate the covariate).
#[derive(Debug, Serialize)]
pub struct RecencyAnalysis {
    pub fit: FitResult<f64>,
    pub recency_gold_correlation: f64,
    pub rows_used: usize,
    pub rows_dropped: usize,
}

/// Logistic regression of the predicted label on
/// [intercept, recency, gold label], where recency is the share of 1s
/// among the previous `window` predictions (see
/// [`prior_positive_share`] for why the matching proportion is not
/// used here). A negative coefficient means the model avoids repeating
/// recent positive predictions.
pub fn run_recency_regression(
    trace: &PredictionTrace,
    window: usize,
    reset_per_batch: bool,
) -> Result<RecencyAnalysis, BiasError> {
    if trace.len() < window + 2 {
        return Err(BiasError::TraceTooShort {
            len: trace.len(),
            needed: window + 2,
        });
    }
    let recency = prior_positive_share(trace, window, reset_per_batch)?;
    let by_id: BTreeMap<&str, f64> = recency.iter().map(|(id, r)| (id.as_str(), *r)).collect();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut golds = Vec::new();
    for e in &trace.entries {
        if let Some(&r) = by_id.get(e.id.as_str()) {
            rows.push(vec![r, e.gold as f64]);
            y.push(e.predicted);
            golds.push(e.gold as f64);
        }
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(BiasError::ConstantPrediction);
    }
    let x = design_with_intercept(&["recency", "gold"], &rows)?;
    let fit = glm::fit_logistic(&x, &y, &FitConfig::default())?;
    let recency_vals: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let correlation = pearson(&recency_vals, &golds);
    Ok(RecencyAnalysis {
        fit,
        recency_gold_correlation: correlation,
        rows_used: y.len(),
        rows_dropped: trace.len() - y.len(),
    })
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

/// Logistic regression of the predicted label on
/// [intercept, formality flag, gold label].
pub fn run_formality_regression(
    trace: &PredictionTrace,
    flags: &BTreeMap<String, u8>,
) -> Result<FitResult<f64>, BiasError> {
    let missing: Vec<String> = trace
        .entries
        .iter()
        .filter(|e| !flags.contains_key(&e.id))
        .map(|e| e.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(BiasError::MissingFlags(missing));
    }
    let first = flags[&trace.entries[0].id];
    if trace.entries.iter().all(|e| flags[&e.id] == first) {
        return Err(BiasError::ConstantFlags);
    }
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for e in &trace.entries {
        rows.push(vec![flags[&e.id] as f64, e.gold as f64]);
        y.push(e.predicted);
    }
    let x = design_with_intercept(&["formality", "gold"], &rows)?;
    Ok(glm::fit_logistic(&x, &y, &FitConfig::default())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingPattern {
    Alternating,
    OnesThenZeros,
    ZerosThenOnes,
}

/// One ordering-experiment configuration: a probe ordering pattern, a
/// batch size, and seeded repetitions with the probes reordered
/// within their gold class.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OrderingPlan {
    pub pattern: OrderingPattern,
    pub batch_size: usize,
    pub repetitions: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderingRun {
    pub pattern: OrderingPattern,
    pub batch_size: usize,
    pub repetition: usize,
    pub shuffle_seed: u64,
    /// Probe ids in presentation order.
    pub probe_order: Vec<String>,
}

/// Build the deterministic run specs for one plan. Probes are (id,
/// gold label) pairs: exactly five 1s and five 0s.
pub fn build_ordering_runs(
    probes: &[(String, u8)],
    plan: &OrderingPlan,
) -> Result<Vec<OrderingRun>, BiasError> {
    let ones: Vec<&String> = probes.iter().filter(|(_, g)| *g == 1).map(|(id, _)| id).collect();
    let zeros: Vec<&String> = probes.iter().filter(|(_, g)| *g == 0).map(|(id, _)| id).collect();
    if ones.len() != 5 || zeros.len() != 5 {
        return Err(BiasError::BadProbeCounts {
            ones: ones.len(),
            zeros: zeros.len(),
        });
    }
    let mut runs = Vec::with_capacity(plan.repetitions);
    for rep in 0..plan.repetitions {
        let shuffle_seed = plan.base_seed.wrapping_add(rep as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
        let mut ones: Vec<String> = ones.iter().map(|s| s.to_string()).collect();
        let mut zeros: Vec<String> = zeros.iter().map(|s| s.to_string()).collect();
        ones.shuffle(&mut rng);
        zeros.shuffle(&mut rng);
        let probe_order: Vec<String> = match plan.pattern {
            OrderingPattern::Alternating => ones
                .iter()
                .zip(&zeros)
                .flat_map(|(a, b)| [a.clone(), b.clone()])
                .collect(),
            OrderingPattern::OnesThenZeros => ones.iter().chain(&zeros).cloned().collect(),
            OrderingPattern::ZerosThenOnes => zeros.iter().chain(&ones).cloned().collect(),
        };
        runs.push(OrderingRun {
            pattern: plan.pattern,
            batch_size: plan.batch_size,
            repetition: rep,
            shuffle_seed,
            probe_order,
        });
    }
    Ok(runs)
}

/// The four standard configurations (grouped orderings at batch sizes
/// 10 and 30), six repetitions each.
pub fn standard_plans(base_seed: u64) -> [OrderingPlan; 4] {
    let plan = |pattern, batch_size| OrderingPlan {
        pattern,
        batch_size,
        repetitions: 6,
        base_seed,
    };
    [
        plan(OrderingPattern::OnesThenZeros, 10),
        plan(OrderingPattern::ZerosThenOnes, 10),
        plan(OrderingPattern::OnesThenZeros, 30),
        plan(OrderingPattern::ZerosThenOnes, 30),
    ]
}

/// Seeded generators with a known injected bias, used to validate that
/// the regressions recover the truth.
pub mod simulate {
    use super::*;

    /// Sequential predictor with log-odds of predicting 1 equal to
    /// `beta0 + beta_recency * (share of 1s among the last
    /// DEFAULT_WINDOW predictions) + beta_gold * gold`. Negative
    /// `beta_recency` makes the model avoid repeating recent positive
    /// predictions. Before the window fills, the share is taken as 0.5.
    pub fn recency_trace(
        n: usize,
        beta0: f64,
        beta_recency: f64,
        beta_gold: f64,
        seed: u64,
    ) -> PredictionTrace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::with_capacity(n);
        let mut preds: Vec<u8> = Vec::with_capacity(n);
        for i in 0..n {
            let gold = u8::from(rng.gen_bool(0.5));
            let share_ones = if i >= DEFAULT_WINDOW {
                let ones = preds[i - DEFAULT_WINDOW..i]
                    .iter()
                    .filter(|&&p| p == 1)
                    .count();
                ones as f64 / DEFAULT_WINDOW as f64
            } else {
                0.5
            };
            let eta = beta0 + beta_recency * share_ones + beta_gold * gold as f64;
            let p1 = 1.0 / (1.0 + (-eta).exp());
            let predicted = u8::from(rng.gen_bool(p1));
            preds.push(predicted);
            entries.push(TraceEntry {
                id: format!("sim-{i:05}"),
                predicted,
                gold,
                batch: i / 10,
                position: i,
            });
        }
        PredictionTrace { entries }
    }

    /// Predictor whose log-odds shift by `beta_formality` for flagged
    /// sentences; returns the trace and the flag map.
    pub fn formality_trace(
        n: usize,
        beta0: f64,
        beta_formality: f64,
        beta_gold: f64,
        seed: u64,
    ) -> (PredictionTrace, BTreeMap<String, u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::with_capacity(n);
        let mut flags = BTreeMap::new();
        for i in 0..n {
            let gold = u8::from(rng.gen_bool(0.5));
            let flag = u8::from(rng.gen_bool(0.4));
            let eta = beta0 + beta_formality * flag as f64 + beta_gold * gold as f64;
            let p1 = 1.0 / (1.0 + (-eta).exp());
            let id = format!("sim-{i:05}");
            flags.insert(id.clone(), flag);
            entries.push(TraceEntry {
                id,
                predicted: u8::from(rng.gen_bool(p1)),
                gold,
                batch: i / 10,
                position: i,
            });
        }
        (PredictionTrace { entries }, flags)
    }
}
