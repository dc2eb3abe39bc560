//! Command-line entry point binding the library modules into
//! reproducible runs. Exit codes: 0 success, 1 analysis error
//! (e.g. non-convergence), 2 usage or input error.

use aae_tagger::bias::{self, BiasError, PredictionTrace};
use aae_tagger::dataset::{self, Dataset, DatasetError};
use aae_tagger::glm::GlmError;
use aae_tagger::habitual::{self, HabitualError, TrainConfig};
use aae_tagger::llm::{
    self, ChatClient, HttpChatClient, LlmConfig, LlmError, MockClient, PromptSpec, ResponseCache,
};
use aae_tagger::metrics::{self, MetricsError};
use aae_tagger::negation::{tag_multiple_negation, NegationError, NegatorLexicon};
use aae_tagger::pos::PosTables;
use aae_tagger::text::{BoundaryConfig, Sentence, TextError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "aae-tagger", version, about = "Sentence-level AAE feature tagging and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Rendering of primary results on stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    output_format: OutputFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Rule-based Multiple Negation tagging over a TSV dataset.
    TagNegation(TagNegationArgs),
    /// Cross-validated Habitual Be training on a labeled corpus.
    TrainHabitual(TrainHabitualArgs),
    /// Prompt a chat model (or the offline mock) over a dataset.
    LlmRun(LlmRunArgs),
    /// Bias analyses over a prediction trace.
    Bias(BiasArgs),
    /// Template-based augmentation of Habitual Be sentences.
    Augment(AugmentArgs),
    /// Generate a labeled synthetic corpus.
    SynthCorpus(SynthCorpusArgs),
}

#[derive(Args, Serialize)]
struct TagNegationArgs {
    /// TSV with id/text columns; a multiple_negation column adds a report.
    #[arg(long)]
    input: PathBuf,
    /// Negator lexicon JSON (defaults to the bundled lexicon).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Clause boundary configuration JSON (defaults bundled).
    #[arg(long)]
    boundaries: Option<PathBuf>,
    /// Per-sentence labels TSV; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct TrainHabitualArgs {
    /// Labeled TSV corpus; omit to train on the synthetic corpus.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "habitual_be")]
    feature: String,
    /// Window radius around "be".
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(2..))]
    folds: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Size of the synthetic corpus when --input is omitted.
    #[arg(long, default_value_t = 2000)]
    synth_size: usize,
    /// Write a model trained on the full corpus here.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct LlmRunArgs {
    #[arg(long)]
    input: PathBuf,
    /// Feature column holding gold labels.
    #[arg(long, default_value = "habitual_be")]
    feature: String,
    #[arg(long, value_enum, default_value_t = Mode::Zero)]
    mode: Mode,
    /// Positive-class label string (defaults per feature).
    #[arg(long)]
    label_a: Option<String>,
    /// Negative-class label string (defaults per feature).
    #[arg(long)]
    label_b: Option<String>,
    /// Few-shot examples per class, drawn from the head of the input.
    #[arg(long, default_value_t = 5)]
    shots: usize,
    #[arg(long, default_value_t = 100)]
    batch_size: usize,
    /// Chat-completion endpoint URL.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value = "default")]
    model: String,
    #[arg(long, default_value_t = 0.7)]
    temperature: f64,
    #[arg(long, default_value_t = 0.9)]
    top_p: f64,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "AAE_TAGGER_API_KEY")]
    api_key_env: String,
    /// Append-only response cache (JSON lines).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Use the deterministic offline provider instead of the network.
    #[arg(long)]
    mock: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Prediction trace output (JSON lines).
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Batch transcripts output (JSON).
    #[arg(long)]
    transcripts_out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Mode {
    Zero,
    Few,
}

#[derive(Args, Serialize)]
struct BiasArgs {
    #[command(subcommand)]
    analysis: BiasCommand,
}

#[derive(Subcommand, Serialize)]
enum BiasCommand {
    /// Regress predictions on the recency covariate and gold labels.
    Recency {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 5)]
        window: usize,
        /// Exclude windows that cross a batch boundary.
        #[arg(long)]
        reset_per_batch: bool,
    },
    /// Regress predictions on a formality flag and gold labels.
    Formality {
        #[arg(long)]
        trace: PathBuf,
        /// TSV with id and formality columns.
        #[arg(long)]
        flags: PathBuf,
    },
    /// Emit the probe-ordering experiment run plans.
    Ordering {
        /// TSV with id/text and the probe feature column.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "habitual_be")]
        feature: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Run-plan output (JSON).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Serialize)]
struct AugmentArgs {
    #[arg(long)]
    count: usize,
    /// Template JSON (defaults bundled).
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Substitution lexicon JSON (defaults bundled).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output TSV; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SynthCorpusArgs {
    #[arg(long, value_enum)]
    feature: SynthFeature,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SynthFeature {
    HabitualBe,
    MultipleNegation,
}

/// Errors split by exit code.
enum AppError {
    /// Exit 2: bad flags, unreadable or malformed inputs.
    Usage(String),
    /// Exit 1: the computation itself failed (non-convergence, etc.).
    Analysis(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(m) | AppError::Analysis(m) => write!(f, "{m}"),
        }
    }
}

impl From<DatasetError> for AppError {
    fn from(e: DatasetError) -> Self {
        AppError::Usage(e.to_string())
    }
}

impl From<NegationError> for AppError {
    fn from(e: NegationError) -> Self {
        AppError::Usage(e.to_string())
    }
}

impl From<TextError> for AppError {
    fn from(e: TextError) -> Self {
        AppError::Usage(e.to_string())
    }
}

impl From<MetricsError> for AppError {
    fn from(e: MetricsError) -> Self {
        AppError::Analysis(e.to_string())
    }
}

impl From<GlmError> for AppError {
    fn from(e: GlmError) -> Self {
        AppError::Analysis(e.to_string())
    }
}

impl From<HabitualError> for AppError {
    fn from(e: HabitualError) -> Self {
        match e {
            HabitualError::Dataset(_)
            | HabitualError::Io { .. }
            | HabitualError::Parse { .. }
            | HabitualError::MissingLabel { .. }
            | HabitualError::ZeroBe { .. }
            | HabitualError::MultipleBe { .. } => AppError::Usage(e.to_string()),
            _ => AppError::Analysis(e.to_string()),
        }
    }
}

impl From<BiasError> for AppError {
    fn from(e: BiasError) -> Self {
        match e {
            BiasError::Glm(inner) => AppError::Analysis(inner.to_string()),
            BiasError::ConstantPrediction => AppError::Analysis(e.to_string()),
            _ => AppError::Usage(e.to_string()),
        }
    }
}

impl From<LlmError> for AppError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::RetriesExhausted { .. } => AppError::Analysis(e.to_string()),
            _ => AppError::Usage(e.to_string()),
        }
    }
}

fn io_usage(path: &Path, e: std::io::Error) -> AppError {
    AppError::Usage(format!("{}: {e}", path.display()))
}

/// One manifest per run, written alongside the primary output.
#[derive(Serialize)]
struct RunManifest {
    subcommand: String,
    config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    version: String,
    started: String,
    wall_clock_secs: f64,
}

struct ManifestBuilder {
    subcommand: String,
    config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    started: chrono::DateTime<chrono::Utc>,
    clock: Instant,
}

impl ManifestBuilder {
    fn new(subcommand: &str, config: serde_json::Value) -> Self {
        ManifestBuilder {
            subcommand: subcommand.to_string(),
            config,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: chrono::Utc::now(),
            clock: Instant::now(),
        }
    }

    fn seed(&mut self, seed: u64) -> &mut Self {
        self.seeds.push(seed);
        self
    }

    fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    /// Write `<first output>.manifest.json`; stdout-only runs carry
    /// their configuration in their own output and skip the file.
    fn write(&self) -> Result<(), AppError> {
        let Some(primary) = self.outputs.first() else {
            return Ok(());
        };
        let manifest = RunManifest {
            subcommand: self.subcommand.clone(),
            config: self.config.clone(),
            seeds: self.seeds.clone(),
            inputs: self.inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started: self.started.to_rfc3339(),
            wall_clock_secs: self.clock.elapsed().as_secs_f64(),
        };
        let path = PathBuf::from(format!("{}.manifest.json", primary.display()));
        std::fs::write(
            &path,
            serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
        )
        .map_err(|e| io_usage(&path, e))
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let format = cli.output_format;
    let result = match cli.command {
        Command::TagNegation(args) => tag_negation(args, format),
        Command::TrainHabitual(args) => train_habitual_cmd(args, format),
        Command::LlmRun(args) => llm_run(args, format),
        Command::Bias(args) => bias_cmd(args, format),
        Command::Augment(args) => augment_cmd(args),
        Command::SynthCorpus(args) => synth_corpus(args),
    };
    match result {
        Ok(()) => ExitCode::from(0),
        Err(AppError::Analysis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn config_json<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

const NEGATION_FEATURE: &str = "multiple_negation";

fn tag_negation(args: TagNegationArgs, format: OutputFormat) -> Result<(), AppError> {
    let mut manifest = ManifestBuilder::new("tag-negation", config_json(&args));
    manifest.input(&args.input);

    let raw = std::fs::read_to_string(&args.input).map_err(|e| io_usage(&args.input, e))?;
    if raw.trim().is_empty() {
        if let Some(output) = &args.output {
            std::fs::write(output, "").map_err(|e| io_usage(output, e))?;
            manifest.output(output);
            manifest.write()?;
        }
        return Ok(());
    }

    let lexicon = match &args.lexicon {
        Some(path) => NegatorLexicon::from_file(path)?,
        None => NegatorLexicon::default(),
    };
    let boundaries = match &args.boundaries {
        Some(path) => BoundaryConfig::from_file(path)?,
        None => BoundaryConfig::default(),
    };

    // gold labels are optional: retry without the feature column
    let dataset = match dataset::load_dataset(&args.input, &[NEGATION_FEATURE.to_string()]) {
        Ok(d) => d,
        Err(DatasetError::MissingColumn { column, .. }) if column == NEGATION_FEATURE => {
            dataset::load_dataset(&args.input, &[])?
        }
        Err(e) => return Err(e.into()),
    };
    let has_gold = dataset.schema.iter().any(|f| f == NEGATION_FEATURE);

    let mut lines = String::from("id\tpredicted\n");
    let mut preds = Vec::with_capacity(dataset.len());
    let mut golds = Vec::with_capacity(dataset.len());
    for r in &dataset.records {
        let sentence = Sentence::new(r.id.clone(), r.text.clone());
        let label = tag_multiple_negation(&sentence, &lexicon, &boundaries);
        lines.push_str(&format!("{}\t{}\n", r.id, label.as_bit()));
        preds.push(label.as_bit());
        if has_gold {
            golds.push(r.label(NEGATION_FEATURE).unwrap());
        }
    }
    match &args.output {
        Some(output) => {
            std::fs::write(output, &lines).map_err(|e| io_usage(output, e))?;
            manifest.output(output);
        }
        None => print!("{lines}"),
    }
    if has_gold && !preds.is_empty() {
        let report = metrics::score(&preds, &golds)?;
        render_report(&report, format);
    }
    manifest.write()
}

fn render_report(report: &metrics::ClassificationReport, format: OutputFormat) {
    match format {
        OutputFormat::Text => print!("{}", report.render_text()),
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(report).expect("report serializes"))
        }
    }
}

fn train_habitual_cmd(args: TrainHabitualArgs, format: OutputFormat) -> Result<(), AppError> {
    let mut manifest = ManifestBuilder::new("train-habitual", config_json(&args));
    manifest.seed(args.seed);

    let dataset = match &args.input {
        Some(path) => {
            manifest.input(path);
            dataset::load_dataset(path, std::slice::from_ref(&args.feature))?
        }
        None => dataset::synth::habitual_corpus(args.synth_size, args.seed),
    };
    let config = TrainConfig {
        k: args.k,
        folds: args.folds as usize,
        seed: args.seed,
        ..TrainConfig::default()
    };
    let tables = PosTables::default();
    let outcomes = habitual::train_habitual(&dataset, &args.feature, &config, &tables)?;
    let reports: Vec<_> = outcomes.iter().map(|o| o.report.clone()).collect();
    let average = metrics::average_reports(&reports)?;
    match format {
        OutputFormat::Text => {
            for (i, o) in outcomes.iter().enumerate() {
                println!("fold {i}:");
                print!("{}", o.report.render_text());
            }
            println!("average over {} folds:", outcomes.len());
            print!("{}", average.render_text());
        }
        OutputFormat::Json => {
            let value = serde_json::json!({
                "folds": reports,
                "average": average,
            });
            println!("{}", serde_json::to_string_pretty(&value).expect("serializes"));
        }
    }
    if let Some(model_out) = &args.model_out {
        let model = habitual::train_full(&dataset, &args.feature, &config, &tables)?;
        model.save(model_out)?;
        manifest.output(model_out);
    }
    manifest.write()
}

fn default_labels(feature: &str) -> (String, String) {
    if feature == NEGATION_FEATURE {
        ("multiple negation".to_string(), "no multiple negation".to_string())
    } else {
        ("habitual be".to_string(), "non-habitual be".to_string())
    }
}

fn llm_run(args: LlmRunArgs, format: OutputFormat) -> Result<(), AppError> {
    let mut manifest = ManifestBuilder::new("llm-run", config_json(&args));
    manifest.seed(args.seed);
    manifest.input(&args.input);

    let dataset = dataset::load_dataset(&args.input, std::slice::from_ref(&args.feature))?;
    let (default_a, default_b) = default_labels(&args.feature);
    let label_a = args.label_a.clone().unwrap_or(default_a);
    let label_b = args.label_b.clone().unwrap_or(default_b);

    let mut items: Vec<llm::LlmItem> = dataset
        .records
        .iter()
        .map(|r| llm::LlmItem {
            id: r.id.clone(),
            text: r.text.clone(),
            gold: r.label(&args.feature).unwrap(),
        })
        .collect();

    let spec = match args.mode {
        Mode::Zero => PromptSpec::zero_shot(&label_a, &label_b),
        Mode::Few => {
            // examples: the first `shots` of each class, removed from
            // the evaluation items
            let mut examples = Vec::new();
            let mut used = Vec::new();
            for want in [1u8, 0u8] {
                let label = if want == 1 { &label_a } else { &label_b };
                let picked: Vec<&llm::LlmItem> = items
                    .iter()
                    .filter(|item| item.gold == want)
                    .take(args.shots)
                    .collect();
                if picked.len() < args.shots {
                    return Err(AppError::Usage(format!(
                        "need {} examples labeled {want} for few-shot mode, found {}",
                        args.shots,
                        picked.len()
                    )));
                }
                for item in picked {
                    examples.push((item.text.clone(), label.clone()));
                    used.push(item.id.clone());
                }
            }
            items.retain(|item| !used.contains(&item.id));
            PromptSpec::few_shot(&label_a, &label_b, examples)
        }
    };

    let config = LlmConfig {
        endpoint: args.endpoint.clone().unwrap_or_default(),
        model: args.model.clone(),
        temperature: args.temperature,
        top_p: args.top_p,
        batch_size: args.batch_size,
        ..LlmConfig::default()
    };

    let mock;
    let http;
    let client: &dyn ChatClient = if args.mock {
        mock = MockClient::new(args.seed);
        &mock
    } else {
        http = HttpChatClient::from_env(&args.api_key_env)?;
        &http
    };

    let mut cache = match &args.cache {
        Some(path) => Some(ResponseCache::open(path)?),
        None => None,
    };
    let output = llm::run_batches(&items, &spec, &config, client, cache.as_mut())?;

    if let Some(trace_out) = &args.trace_out {
        output.trace.save_jsonl(trace_out)?;
        manifest.output(trace_out);
    }
    if let Some(transcripts_out) = &args.transcripts_out {
        let text =
            serde_json::to_string_pretty(&output.transcripts).expect("transcripts serialize");
        std::fs::write(transcripts_out, text).map_err(|e| io_usage(transcripts_out, e))?;
        manifest.output(transcripts_out);
    }
    if let Some(cache_path) = &args.cache {
        manifest.output(cache_path);
    }

    let preds: Vec<u8> = output.trace.entries.iter().map(|e| e.predicted).collect();
    let golds: Vec<u8> = output.trace.entries.iter().map(|e| e.gold).collect();
    println!(
        "{} items, {} parsed, {} unparsed, {} completions from network",
        items.len(),
        output.trace.len(),
        output.unparsed,
        output.network_calls
    );
    if !preds.is_empty() {
        let report = metrics::score(&preds, &golds)?;
        render_report(&report, format);
    }
    manifest.write()
}

fn bias_cmd(args: BiasArgs, format: OutputFormat) -> Result<(), AppError> {
    match args.analysis {
        BiasCommand::Recency {
            trace,
            window,
            reset_per_batch,
        } => {
            let loaded = PredictionTrace::load_jsonl(&trace)?;
            let analysis = bias::run_recency_regression(&loaded, window, reset_per_batch)?;
            match format {
                OutputFormat::Text => {
                    print!("{}", analysis.fit.summary_table());
                    println!(
                        "recency-gold correlation: {:.4} ({} rows used, {} dropped)",
                        analysis.recency_gold_correlation,
                        analysis.rows_used,
                        analysis.rows_dropped
                    );
                }
                OutputFormat::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&analysis).expect("analysis serializes")
                ),
            }
            Ok(())
        }
        BiasCommand::Formality { trace, flags } => {
            let loaded = PredictionTrace::load_jsonl(&trace)?;
            let flag_map = load_flags(&flags)?;
            let fit = bias::run_formality_regression(&loaded, &flag_map)?;
            match format {
                OutputFormat::Text => print!("{}", fit.summary_table()),
                OutputFormat::Json => {
                    println!("{}", serde_json::to_string_pretty(&fit).expect("fit serializes"))
                }
            }
            Ok(())
        }
        BiasCommand::Ordering {
            input,
            feature,
            seed,
            output,
        } => {
            let dataset = dataset::load_dataset(&input, std::slice::from_ref(&feature))?;
            let probes: Vec<(String, u8)> = dataset
                .records
                .iter()
                .map(|r| (r.id.clone(), r.label(&feature).unwrap()))
                .collect();
            let mut runs = Vec::new();
            for plan in bias::standard_plans(seed) {
                runs.extend(bias::build_ordering_runs(&probes, &plan)?);
            }
            let text = serde_json::to_string_pretty(&runs).expect("runs serialize");
            match &output {
                Some(path) => {
                    std::fs::write(path, &text).map_err(|e| io_usage(path, e))?;
                    let config = serde_json::json!({
                        "input": input.display().to_string(),
                        "feature": feature,
                        "seed": seed,
                    });
                    let mut manifest = ManifestBuilder::new("bias-ordering", config);
                    manifest.seed(seed).input(&input).output(path);
                    manifest.write()?;
                }
                None => println!("{text}"),
            }
            Ok(())
        }
    }
}

/// Formality flags: TSV with `id` and `formality` columns.
fn load_flags(path: &Path) -> Result<BTreeMap<String, u8>, AppError> {
    let raw = std::fs::read_to_string(path).map_err(|e| io_usage(path, e))?;
    let mut lines = raw.lines();
    let header = lines
        .next()
        .ok_or_else(|| AppError::Usage(format!("{}: empty flags file", path.display())))?;
    let cols: Vec<&str> = header.split('\t').collect();
    let id_col = cols.iter().position(|c| c.trim() == "id");
    let flag_col = cols.iter().position(|c| c.trim() == "formality");
    let (Some(id_col), Some(flag_col)) = (id_col, flag_col) else {
        return Err(AppError::Usage(format!(
            "{}: flags file needs id and formality columns",
            path.display()
        )));
    };
    let mut flags = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        let cell = |idx: usize| {
            cells.get(idx).copied().ok_or_else(|| {
                AppError::Usage(format!("{} row {}: short row", path.display(), i + 2))
            })
        };
        let value = match cell(flag_col)?.trim() {
            "0" => 0u8,
            "1" => 1u8,
            other => {
                return Err(AppError::Usage(format!(
                    "{} row {}: formality must be 0 or 1, found {other:?}",
                    path.display(),
                    i + 2
                )))
            }
        };
        flags.insert(cell(id_col)?.trim().to_string(), value);
    }
    Ok(flags)
}

fn augment_cmd(args: AugmentArgs) -> Result<(), AppError> {
    let mut manifest = ManifestBuilder::new("augment", config_json(&args));
    manifest.seed(args.seed);

    let templates = match &args.templates {
        Some(path) => {
            manifest.input(path);
            dataset::load_templates(path)?
        }
        None => dataset::default_templates(),
    };
    let lexicon = match &args.lexicon {
        Some(path) => {
            manifest.input(path);
            dataset::load_augment_lexicon(path)?
        }
        None => dataset::default_augment_lexicon(),
    };
    let records = dataset::augment_habitual(&templates, &lexicon, args.count, args.seed)?;
    let out = Dataset::new(
        records,
        vec!["habitual_be".to_string()],
        format!("augmented (count={}, seed={})", args.count, args.seed),
    )?;
    match &args.output {
        Some(path) => {
            dataset::save_dataset(&out, path)?;
            manifest.output(path);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "id\ttext\thabitual_be\tsource").ok();
            for r in &out.records {
                writeln!(
                    stdout,
                    "{}\t{}\t{}\t{}",
                    r.id,
                    r.text,
                    r.label("habitual_be").unwrap_or(0),
                    r.source
                )
                .ok();
            }
        }
    }
    manifest.write()
}

fn synth_corpus(args: SynthCorpusArgs) -> Result<(), AppError> {
    let mut manifest = ManifestBuilder::new("synth-corpus", config_json(&args));
    manifest.seed(args.seed);
    let corpus = match args.feature {
        SynthFeature::HabitualBe => dataset::synth::habitual_corpus(args.count, args.seed),
        SynthFeature::MultipleNegation => dataset::synth::negation_corpus(args.count, args.seed),
    };
    dataset::save_dataset(&corpus, &args.output)?;
    manifest.output(&args.output);
    manifest.write()
}
