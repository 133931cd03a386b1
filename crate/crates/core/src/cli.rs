//! Pipeline CLI: train, score, eval, sweep, bench, divergence-demo.
//! Exit codes: 0 success, 1 usage, 2 data error, 3 training/runtime fault.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checkpoint;
use crate::divergence;
use crate::eval;
use crate::kdd::{self, CategoricalCoding, EncodedSample, EncodingSchema};
use crate::manifest::{digest_file, RunManifest, MANIFEST_VERSION};
use crate::model::BiganModel;
use crate::score::{self, ThresholdRule};
use crate::train::{self, Objective, TrainConfig};
use crate::Class;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Runtime(m) => m,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "bigan-anomaly", about = "BiGAN-based intrusion anomaly detection pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model on the normal half of a KDD-format dataset
    Train(TrainArgs),
    /// Score every record of a dataset with a trained run
    Score(ScoreArgs),
    /// Apply a threshold rule to a scores CSV and compute metrics
    Eval(EvalArgs),
    /// Contamination-rate sweep over the held-out half
    Sweep(SweepArgs),
    /// Compare encoder-path scoring against iterative latent search
    Bench(BenchArgs),
    /// Emit the JS-vs-Wasserstein saturation table
    DivergenceDemo(DivergenceArgs),
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// KDD-format CSV dataset
    #[arg(long)]
    pub data: PathBuf,
    /// Output run directory (checkpoint, schema, history, manifest)
    #[arg(long)]
    pub out: PathBuf,
    /// TOML config file; omitted fields fall back to defaults
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// "wasserstein" or "classical_ce"
    #[arg(long)]
    pub objective: Option<String>,
    /// Contamination rate used to validate the split
    #[arg(long, default_value_t = 0.2)]
    pub contamination: f64,
    /// Also write a checkpoint every K epochs
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Use dummy (reference) coding instead of one-hot
    #[arg(long)]
    pub dummy_coding: bool,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    /// Run directory produced by `train`
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional rule ("contamination:0.2" or "threshold:1.5") to fill the
    /// verdict column
    #[arg(long)]
    pub rule: Option<String>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Scores CSV produced by `score`
    #[arg(long)]
    pub scores: PathBuf,
    /// "contamination:0.2" or "threshold:1.5"
    #[arg(long)]
    pub rule: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated contamination rates
    #[arg(long, default_value = "0.2,0.1,0.05,0.01")]
    pub rates: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Timed repetitions per method (warm-up excluded)
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Latent-search steps per sample
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    /// Batch size for both methods
    #[arg(long, default_value_t = 10)]
    pub batch: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DivergenceArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Largest separation in the grid
    #[arg(long, default_value_t = 2.0)]
    pub max: f64,
    /// Grid step
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Score(args) => cmd_score(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bench(args) => cmd_bench(args),
        Command::DivergenceDemo(args) => cmd_divergence(args),
    }
}

fn read_file(path: &Path, stage: &str) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{stage}: cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str, stage: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("{stage}: cannot write {}: {e}", path.display())))
}

fn load_config(args: &TrainArgs) -> Result<TrainConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = read_file(path, "config")
                .map_err(|e| CliError::Usage(e.message().to_string()))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config: malformed TOML: {e}")))?
        }
        None => TrainConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        cfg.epochs = epochs;
    }
    if let Some(batch) = args.batch_size {
        cfg.batch_size = batch;
    }
    if let Some(obj) = &args.objective {
        cfg.objective = match obj.as_str() {
            "wasserstein" => Objective::Wasserstein,
            "classical_ce" => Objective::ClassicalCe,
            other => return Err(CliError::Usage(format!("unknown objective {other:?}"))),
        };
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn load_dataset(path: &Path, stage: &str) -> Result<Vec<(kdd::RawRecord, Class)>> {
    let text = read_file(path, stage)?;
    let records = kdd::parse_kdd(&text).map_err(|e| CliError::Data(format!("{stage}: {e}")))?;
    if records.is_empty() {
        return Err(CliError::Data(format!("{stage}: dataset {} is empty", path.display())));
    }
    Ok(kdd::swap_labels(&records))
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let cfg = load_config(&args)?;
    let labeled = load_dataset(&args.data, "train")?;
    let split = kdd::split(&labeled, cfg.seed, args.contamination)
        .map_err(|e| CliError::Data(format!("train: {e}")))?;
    let coding = if args.dummy_coding { CategoricalCoding::Dummy } else { CategoricalCoding::OneHot };
    let schema =
        kdd::fit_schema(&split.train, coding).map_err(|e| CliError::Data(format!("train: {e}")))?;
    let train_set: Vec<Vec<f64>> = split
        .train
        .iter()
        .map(|r| kdd::encode(r, &schema))
        .collect::<kdd::Result<_>>()
        .map_err(|e| CliError::Data(format!("train: {e}")))?;

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Runtime(format!("train: cannot create {}: {e}", args.out.display())))?;

    let t0 = Instant::now();
    let every = args.checkpoint_every.unwrap_or(0);
    let out_dir = args.out.clone();
    let (model, history) = train::train_with_hook(&cfg, &train_set, &mut |epoch, m| {
        if every > 0 && (epoch + 1) % every == 0 {
            let _ = checkpoint::save(m, &out_dir.join(format!("checkpoint_epoch_{}.json", epoch + 1)));
        }
    })
    .map_err(|e| CliError::Runtime(format!("train: {e}")))?;
    let train_seconds = t0.elapsed().as_secs_f64();

    let ckpt_path = args.out.join("checkpoint.json");
    checkpoint::save(&model, &ckpt_path)
        .map_err(|e| CliError::Runtime(format!("train: {e}")))?;
    let schema_path = args.out.join("schema.json");
    write_file(
        &schema_path,
        &serde_json::to_string_pretty(&schema).expect("schema serialization"),
        "train",
    )?;
    write_file(&args.out.join("history.csv"), &history.to_csv(), "train")?;

    let manifest = RunManifest {
        version: MANIFEST_VERSION,
        config: cfg.clone(),
        dataset_digest: digest_file(&args.data)
            .map_err(|e| CliError::Data(format!("train: {e}")))?,
        seed: cfg.seed,
        checkpoint_path: "checkpoint.json".into(),
        schema_path: Some("schema.json".into()),
        metrics: None,
        train_seconds,
        benchmark_protocol: None,
    };
    manifest
        .save(&args.out.join("manifest.json"))
        .map_err(|e| CliError::Runtime(format!("train: {e}")))?;
    println!(
        "trained {} epochs on {} normal records ({} features) in {:.1}s -> {}",
        cfg.epochs,
        train_set.len(),
        schema.width(),
        train_seconds,
        args.out.display()
    );
    Ok(())
}

struct LoadedRun {
    manifest: RunManifest,
    model: BiganModel,
    schema: EncodingSchema,
}

fn load_run(dir: &Path, stage: &str) -> Result<LoadedRun> {
    let manifest = RunManifest::load(&dir.join("manifest.json"))
        .map_err(|e| CliError::Data(format!("{stage}: {e}")))?;
    let model = checkpoint::load(&dir.join(&manifest.checkpoint_path))
        .map_err(|e| CliError::Data(format!("{stage}: {e}")))?;
    let schema_rel = manifest.schema_path.clone().unwrap_or_else(|| "schema.json".into());
    let schema: EncodingSchema = serde_json::from_str(&read_file(&dir.join(schema_rel), stage)?)
        .map_err(|e| CliError::Data(format!("{stage}: malformed schema: {e}")))?;
    Ok(LoadedRun { manifest, model, schema })
}

fn parse_rule(text: &str) -> Result<ThresholdRule> {
    let (kind, value) = text
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("rule {text:?} is not kind:value")))?;
    let v: f64 = value
        .parse()
        .map_err(|_| CliError::Usage(format!("rule value {value:?} is not a number")))?;
    match kind {
        "contamination" => Ok(ThresholdRule::ContaminationRate(v)),
        "threshold" => Ok(ThresholdRule::FixedThreshold(v)),
        other => Err(CliError::Usage(format!("unknown rule kind {other:?}"))),
    }
}

fn encode_labeled(
    labeled: &[(kdd::RawRecord, Class)],
    schema: &EncodingSchema,
    stage: &str,
) -> Result<Vec<EncodedSample>> {
    kdd::encode_all(labeled, schema).map_err(|e| CliError::Data(format!("{stage}: {e}")))
}

fn cmd_score(args: ScoreArgs) -> Result<()> {
    let run = load_run(&args.run, "score")?;
    let labeled = load_dataset(&args.data, "score")?;
    let samples = encode_labeled(&labeled, &run.schema, "score")?;
    let xs: Vec<Vec<f64>> = samples.iter().map(|s| s.features.clone()).collect();
    let reports = score::score_batch(&run.model, &xs, &run.manifest.config.lambda_weights)
        .map_err(|e| CliError::Runtime(format!("score: {e}")))?;
    if score::is_degenerate(&reports) {
        return Err(CliError::Runtime(
            "score: degenerate model — every sample scored identically".into(),
        ));
    }
    let verdicts = match &args.rule {
        Some(rule) => Some(
            score::apply_threshold(&reports, parse_rule(rule)?)
                .map_err(|e| CliError::Runtime(format!("score: {e}")))?,
        ),
        None => None,
    };
    let truths: Vec<Class> = samples.iter().map(|s| s.truth).collect();
    write_file(&args.out, &eval::scores_to_csv(&reports, verdicts.as_deref(), &truths), "score")?;
    println!("scored {} records -> {}", reports.len(), args.out.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let rule = parse_rule(&args.rule)?;
    let (reports, truths) = eval::scores_from_csv(&read_file(&args.scores, "eval")?)
        .map_err(|e| CliError::Data(format!("eval: {e}")))?;
    let verdicts = score::apply_threshold(&reports, rule)
        .map_err(|e| CliError::Runtime(format!("eval: {e}")))?;
    let metrics = eval::compute_metrics(&verdicts, &truths)
        .map_err(|e| CliError::Runtime(format!("eval: {e}")))?;
    write_file(&args.out, &eval::metrics_to_csv(&[(args.rule.as_str(), metrics)]), "eval")?;
    println!(
        "precision {:.4} recall {:.4} f1 {:.4} -> {}",
        metrics.precision,
        metrics.recall,
        metrics.f1,
        args.out.display()
    );
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let run = load_run(&args.run, "sweep")?;
    let labeled = load_dataset(&args.data, "sweep")?;
    // evaluate on the half the model never trained on
    let (_, half_b) = kdd::halve(&labeled, run.manifest.seed);
    let pool = encode_labeled(&half_b, &run.schema, "sweep")?;
    let rates: Vec<f64> = args
        .rates
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad rate {s:?} in --rates")))
        })
        .collect::<Result<_>>()?;
    let rows = eval::contamination_sweep(
        &run.model,
        &pool,
        &rates,
        &run.manifest.config.lambda_weights,
    )
    .map_err(|e| CliError::Runtime(format!("sweep: {e}")))?;
    write_file(&args.out, &eval::sweep_to_csv(&rows), "sweep")?;
    for (c, m) in &rows {
        println!("rate {c}: precision {:.4} recall {:.4} f1 {:.4}", m.precision, m.recall, m.f1);
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let run = load_run(&args.run, "bench")?;
    let labeled = load_dataset(&args.data, "bench")?;
    let samples = encode_labeled(&labeled, &run.schema, "bench")?;
    if samples.len() < args.batch {
        return Err(CliError::Data(format!(
            "bench: dataset has {} records, batch of {} requested",
            samples.len(),
            args.batch
        )));
    }
    let batch: Vec<Vec<f64>> =
        samples.iter().take(args.batch).map(|s| s.features.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(run.manifest.seed);
    let report = eval::benchmark(
        &run.model,
        &batch,
        args.reps,
        args.steps,
        &run.manifest.config.lambda_weights,
        &mut rng,
    )
    .map_err(|e| CliError::Runtime(format!("bench: {e}")))?;
    let csv = format!(
        "batch_size,repetitions,anogan_steps,encoder_mean_ms,encoder_std_ms,search_mean_ms,search_std_ms,speedup\n{},{},{},{},{},{},{},{}\n",
        report.batch_size,
        report.repetitions,
        report.anogan_steps,
        report.encoder_mean_ms,
        report.encoder_std_ms,
        report.search_mean_ms,
        report.search_std_ms,
        report.speedup
    );
    write_file(&args.out, &csv, "bench")?;
    println!(
        "encoder {:.3}ms/batch vs search {:.1}ms/batch over {} reps: {:.0}x speedup",
        report.encoder_mean_ms, report.search_mean_ms, report.repetitions, report.speedup
    );
    Ok(())
}

fn cmd_divergence(args: DivergenceArgs) -> Result<()> {
    if args.step <= 0.0 || args.max < 0.0 {
        return Err(CliError::Usage("divergence-demo: step must be > 0 and max >= 0".into()));
    }
    let mut grid = Vec::new();
    let mut theta = 0.0;
    while theta <= args.max + 1e-12 {
        grid.push(theta);
        theta += args.step;
    }
    let table = divergence::saturation_sweep(&grid)
        .map_err(|e| CliError::Runtime(format!("divergence-demo: {e}")))?;
    let mut csv = String::from("separation,js,wasserstein1\n");
    for (t, j, w) in &table {
        csv.push_str(&format!("{t},{j},{w}\n"));
    }
    write_file(&args.out, &csv, "divergence-demo")?;
    println!("{} rows -> {}", table.len(), args.out.display());
    Ok(())
}
