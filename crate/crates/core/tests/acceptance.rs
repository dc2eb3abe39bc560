//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).

#![allow(clippy::needless_range_loop)]

use aae_tagger::bias::{self, simulate, PredictionTrace};
use aae_tagger::dataset::synth;
use aae_tagger::glm::{self, design_with_intercept, DesignMatrix, FitConfig, GlmError, Scalar};
use aae_tagger::habitual::{self, TrainConfig};
use aae_tagger::llm::{self, ParseStatus, PromptSpec};
use aae_tagger::metrics::{ClassificationReport, ConfusionCounts};
use aae_tagger::negation::{tag_multiple_negation, FeatureLabel, NegatorLexicon};
use aae_tagger::pos::PosTables;
use aae_tagger::text::{BoundaryConfig, Sentence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::Command;
use std::time::Instant;

fn report(criterion: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("{verdict}: {criterion} — {detail}");
    assert!(ok, "{criterion}: {detail}");
}

#[test]
fn criterion_1_golden_sentences() {
    let lexicon = NegatorLexicon::default();
    let boundaries = BoundaryConfig::default();
    let cases: [(&str, FeatureLabel); 5] = [
        ("I ain't step on no dog.", FeatureLabel::Positive),
        ("I am usually in my office by 7:30.", FeatureLabel::Negative),
        ("Because he ain't been back to finish yet.", FeatureLabel::Negative),
        (
            "We was in Pentecost holiness and I wasn't allowed to smoke.",
            FeatureLabel::Negative,
        ),
        // documented rule false positive: no boundary token between negators
        ("I didn't ask you not to come", FeatureLabel::Positive),
    ];
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for (raw, want) in cases {
        let got = tag_multiple_negation(&Sentence::new("g", raw), &lexicon, &boundaries);
        if got != want {
            mismatches.push(raw);
        }
    }
    let elapsed = start.elapsed();
    let ok = mismatches.is_empty() && elapsed.as_secs_f64() < 1.0;
    report(
        "criterion 1 (golden sentences)",
        ok,
        &format!("{} mismatches, {:.3}s", mismatches.len(), elapsed.as_secs_f64()),
    );
}

/// Independent recount: whitespace tokens, trailing boundary punctuation
/// closes a clause, conjunction words close a clause; positive iff some
/// clause holds two or more negators.
fn oracle_tag(text: &str) -> u8 {
    const NEGATORS: [&str; 11] = [
        "not", "no", "never", "nothing", "nobody", "none", "nowhere", "neither", "nor", "ain't",
        "cannot",
    ];
    const CONJUNCTIONS: [&str; 7] = ["and", "but", "or", "because", "so", "when", "if"];
    let mut current = 0usize;
    let mut positive = false;
    for raw_word in text.split_whitespace() {
        let trimmed = raw_word.trim_end_matches(['.', ',', ';']);
        let closes_after = trimmed.len() != raw_word.len();
        let lower = trimmed.to_lowercase();
        if CONJUNCTIONS.contains(&lower.as_str()) {
            current = 0;
        } else {
            if NEGATORS.contains(&lower.as_str()) || lower.ends_with("n't") {
                current += 1;
            }
            if current >= 2 {
                positive = true;
            }
        }
        if closes_after {
            current = 0;
        }
    }
    u8::from(positive)
}

#[test]
fn criterion_2_rule_tagger_oracle() {
    let corpus = synth::negation_corpus(1000, 20260824);
    let lexicon = NegatorLexicon::default();
    let boundaries = BoundaryConfig::default();
    let mut mismatches = 0usize;
    let mut positives = 0usize;
    let mut recalled = 0usize;
    for r in &corpus.records {
        let predicted =
            tag_multiple_negation(&Sentence::new(r.id.clone(), r.text.clone()), &lexicon, &boundaries)
                .as_bit();
        if predicted != oracle_tag(&r.text) {
            mismatches += 1;
        }
        let gold = r.label("multiple_negation").unwrap();
        if gold == 1 {
            positives += 1;
            if predicted == 1 {
                recalled += 1;
            }
        }
    }
    let ok = mismatches == 0 && positives > 0 && recalled == positives;
    report(
        "criterion 2 (rule-tagger oracle equivalence)",
        ok,
        &format!(
            "{mismatches} oracle mismatches on 1000 sentences, recall {recalled}/{positives}"
        ),
    );
}

#[test]
fn criterion_3_metrics_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let counts = ConfusionCounts {
            tp: rng.gen_range(0..200),
            fp: rng.gen_range(0..200),
            tn: rng.gen_range(0..200),
            fn_: rng.gen_range(0..200),
        };
        if counts.total() == 0 {
            continue;
        }
        let r = ClassificationReport::from_counts(counts);
        // direct recomputation
        let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let pp = div(counts.tp, counts.tp + counts.fp);
        let pn = div(counts.tn, counts.tn + counts.fn_);
        let rp = div(counts.tp, counts.tp + counts.fn_);
        let rn = div(counts.tn, counts.tn + counts.fp);
        let f1 = |p: f64, r: f64| if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        let (f1p, f1n) = (f1(pp, rp), f1(pn, rn));
        let sp = (counts.tp + counts.fn_) as f64;
        let sn = (counts.tn + counts.fp) as f64;
        let f1w = (sp * f1p + sn * f1n) / (sp + sn);
        for (a, b) in [
            (r.precision_pos, pp),
            (r.precision_neg, pn),
            (r.recall_pos, rp),
            (r.recall_neg, rn),
            (r.f1_weighted, f1w),
        ] {
            worst = worst.max((a - b).abs());
        }
    }
    let ok = worst < 1e-12;
    report(
        "criterion 3 (metrics oracle)",
        ok,
        &format!("max deviation {worst:e} over 1000 random confusion matrices"),
    );
}

fn simulate_glm(n: usize, beta: &[f64], seed: u64) -> (DesignMatrix<f64>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = rng.gen_range(-2.0..2.0);
        let x2 = rng.gen_range(-2.0..2.0);
        let eta = beta[0] + beta[1] * x1 + beta[2] * x2;
        let p = 1.0 / (1.0 + (-eta).exp());
        y.push(u8::from(rng.gen_bool(p)));
        rows.push(vec![x1, x2]);
    }
    (design_with_intercept(&["x1", "x2"], &rows).unwrap(), y)
}

#[test]
fn criterion_4_glm_recovery() {
    let truth = [0.4, 0.9, -1.3];
    // coefficient recovery across 20 seeds at n = 5000
    let mut worst_err: f64 = 0.0;
    for seed in 0..20 {
        let (x, y) = simulate_glm(5000, &truth, 100 + seed);
        let fit = glm::fit_logistic(&x, &y, &FitConfig::default()).unwrap();
        for (b, t) in fit.coef.iter().zip(truth) {
            worst_err = worst_err.max((b - t).abs());
        }
    }
    let recovery_ok = worst_err < 0.15;

    // analytic score vs central finite differences of the log-likelihood
    let (x, y) = simulate_glm(300, &truth, 7);
    let ll = |beta: &[f64]| -> f64 {
        (0..x.n_rows())
            .map(|i| {
                let eta: f64 = beta.iter().zip(x.row(i)).map(|(b, v)| b * v).sum();
                y[i] as f64 * eta - (1.0f64 + eta.exp()).ln()
            })
            .sum()
    };
    let beta = [0.2, -0.4, 0.6];
    let mut grad_ok = true;
    for j in 0..3 {
        let mut analytic = 0.0;
        for i in 0..x.n_rows() {
            let eta: f64 = beta.iter().zip(x.row(i)).map(|(b, v)| b * v).sum();
            let mu = 1.0 / (1.0 + (-eta).exp());
            analytic += (y[i] as f64 - mu) * x.row(i)[j];
        }
        let h = 1e-6;
        let mut up = beta;
        up[j] += h;
        let mut down = beta;
        down[j] -= h;
        let fd = (ll(&up) - ll(&down)) / (2.0 * h);
        if ((analytic - fd) / fd.abs().max(1.0)).abs() > 1e-5 {
            grad_ok = false;
        }
    }

    // null calibration: p < 0.05 rate over 1000 simulations
    let mut sig = 0usize;
    for seed in 0..1000 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let mut rows = Vec::with_capacity(200);
        let mut y = Vec::with_capacity(200);
        for _ in 0..200 {
            rows.push(vec![rng.gen_range(-2.0f64..2.0)]);
            y.push(u8::from(rng.gen_bool(0.5)));
        }
        let x = design_with_intercept(&["x1"], &rows).unwrap();
        if let Ok(fit) = glm::fit_logistic(&x, &y, &FitConfig::default()) {
            if fit.p_value_named("x1").unwrap() < 0.05 {
                sig += 1;
            }
        }
    }
    let rate = sig as f64 / 1000.0;
    let calibration_ok = (rate - 0.05).abs() <= 0.02;

    // separation detection on a perfectly separable set
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|i| vec![if i < 10 { -1.0 - i as f64 } else { 1.0 + i as f64 }])
        .collect();
    let ys: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
    let x = design_with_intercept(&["x1"], &rows).unwrap();
    let separation_ok = matches!(
        glm::fit_logistic(&x, &ys, &FitConfig::default()),
        Err(GlmError::Separation { .. })
    );

    let ok = recovery_ok && grad_ok && calibration_ok && separation_ok;
    report(
        "criterion 4 (GLM recovery)",
        ok,
        &format!(
            "max |beta err| {worst_err:.3}, gradients {}, null rate {rate:.3}, separation {}",
            if grad_ok { "match" } else { "mismatch" },
            if separation_ok { "detected" } else { "missed" }
        ),
    );
}

#[test]
fn criterion_5_recency_covariate() {
    let trace = |preds: &[u8]| PredictionTrace {
        entries: preds
            .iter()
            .enumerate()
            .map(|(i, &p)| bias::TraceEntry {
                id: format!("t{i}"),
                predicted: p,
                gold: 0,
                batch: 0,
                position: i,
            })
            .collect(),
    };
    let fixed = bias::recency_feature(&trace(&[1, 0, 1, 1, 0, 1]), 5, false).unwrap();
    let exact_ok = fixed.len() == 1 && fixed[0].1 == 0.6;

    let sim = simulate::recency_trace(400, 0.0, -1.0, 1.0, 55);
    let grid_ok = bias::recency_feature(&sim, 5, false)
        .unwrap()
        .iter()
        .all(|(_, r)| {
            let fifths = r * 5.0;
            (fifths - fifths.round()).abs() < 1e-12 && (0.0..=1.0).contains(r)
        });

    let ok = exact_ok && grid_ok;
    report(
        "criterion 5 (recency covariate)",
        ok,
        &format!(
            "fixed sequence -> {:?}, grid membership {}",
            fixed.first().map(|f| f.1),
            grid_ok
        ),
    );
}

#[test]
fn criterion_6_bias_detection_power() {
    let start = Instant::now();
    // injected avoidance: beta_recency = -4 at n = 500
    let mut detected = 0usize;
    for seed in 0..100 {
        let trace = simulate::recency_trace(500, 0.0, -4.0, 2.0, 1000 + seed);
        if let Ok(a) = bias::run_recency_regression(&trace, 5, false) {
            let beta = a.fit.coef_named("recency").unwrap();
            let p = a.fit.p_value_named("recency").unwrap();
            if beta < 0.0 && p < 0.01 {
                detected += 1;
            }
        }
    }
    let power_ok = detected >= 95;

    // unbiased predictor: beta_recency = 0
    let mut sig = 0usize;
    let mut total = 0usize;
    for seed in 0..400 {
        let trace = simulate::recency_trace(500, 0.0, 0.0, 2.0, 2000 + seed);
        if let Ok(a) = bias::run_recency_regression(&trace, 5, false) {
            total += 1;
            if a.fit.p_value_named("recency").unwrap() < 0.05 {
                sig += 1;
            }
        }
    }
    let null_rate = sig as f64 / total as f64;
    let null_ok = (null_rate - 0.05).abs() <= 0.03;

    // formality: beta_f = +1 at n = 500, same harness
    let mut f_detected = 0usize;
    for seed in 0..100 {
        let (trace, flags) = simulate::formality_trace(500, -0.5, 1.0, 1.0, 3000 + seed);
        if let Ok(fit) = bias::run_formality_regression(&trace, &flags) {
            if fit.coef_named("formality").unwrap() > 0.0
                && fit.p_value_named("formality").unwrap() < 0.01
            {
                f_detected += 1;
            }
        }
    }
    let f_power_ok = f_detected >= 95;

    let mut f_sig = 0usize;
    let mut f_total = 0usize;
    for seed in 0..400 {
        let (trace, flags) = simulate::formality_trace(500, 0.0, 0.0, 1.0, 4000 + seed);
        if let Ok(fit) = bias::run_formality_regression(&trace, &flags) {
            f_total += 1;
            if fit.p_value_named("formality").unwrap() < 0.05 {
                f_sig += 1;
            }
        }
    }
    let f_null_rate = f_sig as f64 / f_total as f64;
    let f_null_ok = (f_null_rate - 0.05).abs() <= 0.03;

    let elapsed = start.elapsed().as_secs_f64();
    let ok = power_ok && null_ok && f_power_ok && f_null_ok && elapsed < 300.0;
    report(
        "criterion 6 (bias-detection power)",
        ok,
        &format!(
            "recency {detected}/100 detected, null rate {null_rate:.3}; formality \
             {f_detected}/100 detected, null rate {f_null_rate:.3}; {elapsed:.1}s"
        ),
    );
}

#[test]
fn criterion_7_prompt_goldens_and_parser() {
    let spec = PromptSpec::zero_shot("habitual be", "non-habitual be");
    let zero = llm::build_zero_shot_prompt(&["I be happy."], &spec).unwrap();
    let zero_ok = zero == include_str!("golden/zero_shot.txt");

    let few_spec = PromptSpec::few_shot(
        "habitual be",
        "non-habitual be",
        vec![("They be working.".to_string(), "habitual be".to_string())],
    );
    let few = llm::build_few_shot_prompt(&["I be happy."], &few_spec).unwrap();
    let few_ok = few == include_str!("golden/few_shot.txt");

    // longest-match-first and the verbose response styles
    let b = ParseStatus::Parsed("non-habitual be".to_string());
    let a = ParseStatus::Parsed("habitual be".to_string());
    let precedence_ok = llm::parse_response("1. non-habitual be", 1, &spec) == vec![b];
    let verbose_ok = llm::parse_response(
        "This sentence uses 'be' in a habitual sense because it describes a repeated action",
        1,
        &spec,
    ) == vec![a.clone()]
        && llm::parse_response(
            "This is a habitual use because the context suggests a repeated action,",
            1,
            &spec,
        ) == vec![a];

    let ok = zero_ok && few_ok && precedence_ok && verbose_ok;
    report(
        "criterion 7 (prompt goldens and parser)",
        ok,
        &format!(
            "zero-shot {zero_ok}, few-shot {few_ok}, precedence {precedence_ok}, verbose {verbose_ok} \
             (full 20-fixture suite runs in the llm module tests)"
        ),
    );
}

#[test]
fn criterion_8_end_to_end_mock() {
    let bin = env!("CARGO_BIN_EXE_aae-tagger");
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("corpus.tsv");
    let trace_path = dir.path().join("trace.jsonl");
    let trace2_path = dir.path().join("trace2.jsonl");
    let cache_path = dir.path().join("cache.jsonl");

    let corpus = synth::habitual_corpus(1000, 99);
    aae_tagger::dataset::save_dataset(&corpus, &corpus_path).unwrap();

    let run = |trace: &std::path::Path| {
        Command::new(bin)
            .args([
                "llm-run",
                "--input",
                corpus_path.to_str().unwrap(),
                "--feature",
                "habitual_be",
                "--mock",
                "--batch-size",
                "100",
                "--cache",
                cache_path.to_str().unwrap(),
                "--trace-out",
                trace.to_str().unwrap(),
            ])
            .output()
            .unwrap()
    };

    let cold = run(&trace_path);
    let cold_out = String::from_utf8_lossy(&cold.stdout).to_string();
    let trace_rows = std::fs::read_to_string(&trace_path)
        .unwrap()
        .lines()
        .count();
    let report_shaped = cold_out.contains("P+") && cold_out.contains("F1w");

    let bias_run = Command::new(bin)
        .args(["bias", "recency", "--trace", trace_path.to_str().unwrap()])
        .output()
        .unwrap();
    let bias_ok = bias_run.status.success()
        && String::from_utf8_lossy(&bias_run.stdout).contains("recency");

    let warm = run(&trace2_path);
    let warm_out = String::from_utf8_lossy(&warm.stdout).to_string();
    let zero_network = warm_out.contains("0 completions from network");
    let byte_identical = std::fs::read(&trace_path).unwrap() == std::fs::read(&trace2_path).unwrap();

    let ok = cold.status.success()
        && trace_rows == 1000
        && report_shaped
        && bias_ok
        && warm.status.success()
        && zero_network
        && byte_identical;
    report(
        "criterion 8 (end-to-end mock run)",
        ok,
        &format!(
            "trace rows {trace_rows}, report {report_shaped}, bias exit {bias_ok}, \
             warm zero-network {zero_network}, byte-identical {byte_identical}"
        ),
    );
}

#[test]
fn criterion_9_habitual_desk_scale() {
    let corpus = synth::habitual_corpus(2000, 42);
    let outcomes = habitual::train_habitual(
        &corpus,
        "habitual_be",
        &TrainConfig::default(),
        &PosTables::default(),
    )
    .unwrap();
    let reports: Vec<_> = outcomes.iter().map(|o| o.report.clone()).collect();
    let avg = aae_tagger::metrics::average_reports(&reports).unwrap();
    let ok = outcomes.len() == 10 && avg.f1_weighted >= 0.85;
    report(
        "criterion 9 (habitual 10-fold)",
        ok,
        &format!("average held-out F1w {:.3} over {} folds", avg.f1_weighted, outcomes.len()),
    );
}

// keep Scalar in scope for the f64 design matrix helper above
#[allow(dead_code)]
fn _scalar_witness<F: Scalar>(v: F) -> f64 {
    Scalar::to_f64(v)
}
