//! Command-line interface: every pipeline stage as a subcommand, each run
//! recorded in a JSON manifest next to its primary output.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{
    aggregate, split_by_name, write_histograms, write_split_manifest, SplitCorpus,
};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate, majority_baseline, per_state_accuracy, slice_extremes, slice_weighted_random,
    write_per_state, write_plot_data, write_slice_reports, write_wide_table, NaiveBayes, Predict,
    SliceReport,
};
use crate::ingest::{self, ColumnMap};
use crate::langmap::LanguageTable;
use crate::manifest::RunManifest;
use crate::models::{load_model, write_atomic, StateRegistry};
use crate::nncore::{CellKind, OptimizerKind};
use crate::synth::SynthSpec;
use crate::train::{self, TrainConfig, TrainJob};

#[derive(Parser, Debug)]
#[command(
    name = "namestate",
    version,
    about = "Predict Indian state of residence (and languages) from a last name"
)]
pub struct Cli {
    /// Worker threads for aggregation and evaluation (training is always
    /// single-threaded); outputs are identical for any value.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic electoral-roll file with a learnable
    /// name→state signal.
    Synth(SynthArgs),
    /// Ingest a raw roll file into clean (last_name, sex, state) records.
    Preprocess(PreprocessArgs),
    /// Aggregate clean records into per-name histograms and summary tables.
    Stats(StatsArgs),
    /// Train a character-level recurrent classifier.
    Train(TrainArgs),
    /// Score a model or baseline on the held-out split and write reports.
    Evaluate(EvaluateArgs),
    /// Rank states (and optionally languages) for a single name.
    Predict(PredictArgs),
    /// Write x,y,smoothed plot data for accuracy curves.
    Plotdata(PlotdataArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DelimiterArg {
    Comma,
    Tab,
}

impl DelimiterArg {
    fn as_byte(self) -> u8 {
        match self {
            DelimiterArg::Comma => b',',
            DelimiterArg::Tab => b'\t',
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            DelimiterArg::Comma => "comma",
            DelimiterArg::Tab => "tab",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    Rnn,
    Lstm,
    Gru,
}

impl ModelArg {
    fn kind(self) -> CellKind {
        match self {
            ModelArg::Rnn => CellKind::Rnn,
            ModelArg::Lstm => CellKind::Lstm,
            ModelArg::Gru => CellKind::Gru,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OptimizerArg {
    Sgd,
    Adam,
}

impl OptimizerArg {
    fn kind(self) -> OptimizerKind {
        match self {
            OptimizerArg::Sgd => OptimizerKind::Sgd,
            OptimizerArg::Adam => OptimizerKind::Adam,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BaselineArg {
    Majority,
    Naivebayes,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FigureArg {
    /// Top-k hit against name popularity (record count).
    Popularity,
    /// Top-k hit against the name's female share.
    Gender,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output roll file.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of distinct last names.
    #[arg(long, default_value_t = 100)]
    pub names: usize,
    /// Number of auto-named states (State01, State02, …).
    #[arg(long, default_value_t = 5)]
    pub states: usize,
    /// Comma-separated population weights, one per state (default:
    /// linearly descending).
    #[arg(long)]
    pub state_weights: Option<String>,
    /// Probability a record's state is re-drawn from the population.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 3)]
    pub records_min: usize,
    #[arg(long, default_value_t = 12)]
    pub records_max: usize,
    /// Beta prior for per-name female share.
    #[arg(long, default_value_t = 2.0)]
    pub female_alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    pub female_beta: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    /// Raw roll file.
    #[arg(long)]
    pub input: PathBuf,
    /// Clean-records output file.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = DelimiterArg::Comma)]
    pub delimiter: DelimiterArg,
    #[arg(long, default_value = "first_name")]
    pub col_first: String,
    #[arg(long, default_value = "last_name")]
    pub col_last: String,
    #[arg(long, default_value = "father_husband_name")]
    pub col_relative: String,
    #[arg(long, default_value = "sex")]
    pub col_sex: String,
    #[arg(long, default_value = "state")]
    pub col_state: String,
    /// Minimum corpus-wide occurrences for a last name to be kept.
    #[arg(long, default_value_t = 3)]
    pub floor: u64,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Clean-records file from `preprocess`.
    #[arg(long)]
    pub input: PathBuf,
    /// Per-(name, state) histogram output.
    #[arg(long)]
    pub out_histograms: PathBuf,
    /// Per-name popularity/female-share table output.
    #[arg(long)]
    pub out_names: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Clean-records file from `preprocess`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Model output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the preset hidden dimension.
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerArg>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Seed for initialization, shuffling, and the train/test split.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Checkpoint every N epochs (0 = only at the end).
    #[arg(long, default_value_t = 0)]
    pub checkpoint_interval: usize,
    /// Optional global gradient-norm ceiling.
    #[arg(long)]
    pub clip_norm: Option<f64>,
    /// Metrics CSV (default: <out>.metrics.csv).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Checkpoint file (default: <out>.ckpt).
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Resume from an earlier checkpoint of the same configuration.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("predictor").required(true).args(["model_file", "baseline"])))]
pub struct EvaluateArgs {
    /// Clean-records file from `preprocess`.
    #[arg(long)]
    pub input: PathBuf,
    /// Trained model file.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Baseline predictor instead of a model.
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineArg>,
    /// Directory for all report files.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Sample size for the weighted-random and most/least-popular slices.
    #[arg(long, default_value_t = 3000)]
    pub sample_n: usize,
    /// Names sampled per state for the per-state table.
    #[arg(long, default_value_t = 1000)]
    pub per_state_n: usize,
    /// Seed for slice sampling; also the split seed when the model
    /// metadata carries none (baselines always split with it).
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Split fraction when the model metadata carries none.
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Popularity cutoff for the popularity plot.
    #[arg(long, default_value_t = 2000)]
    pub max_popularity: u64,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    /// Last name to rank states for.
    #[arg(long)]
    pub name: String,
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,
    /// Also rank languages via the state→language table.
    #[arg(long)]
    pub languages: bool,
    /// State→language table file.
    #[arg(long, default_value = "data/state_languages.csv")]
    pub table: PathBuf,
    /// Manifest output path.
    #[arg(long, default_value = "predict.manifest.json")]
    pub manifest: PathBuf,
}

#[derive(Args, Debug)]
pub struct PlotdataArgs {
    #[arg(long, value_enum)]
    pub figure: FigureArg,
    #[arg(long)]
    pub model_file: PathBuf,
    /// Clean-records file from `preprocess`.
    #[arg(long)]
    pub input: PathBuf,
    /// Plot CSV output.
    #[arg(long)]
    pub out: PathBuf,
    /// Drop names more popular than this from the popularity figure.
    #[arg(long, default_value_t = 2000)]
    pub max_popularity: u64,
    /// Lowess neighbourhood fraction.
    #[arg(long, default_value_t = 2.0 / 3.0)]
    pub fraction: f64,
    #[arg(long, default_value_t = 3)]
    pub iterations: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Split seed fallback when the model metadata carries none.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
}

/// Parses argv and runs; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return 1;
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: thread pool: {e}");
        return 1;
    }
    match dispatch(cli.command, cli.threads) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, threads: usize) -> Result<()> {
    let started = Instant::now();
    match command {
        Command::Synth(args) => run_synth(args, threads, started),
        Command::Preprocess(args) => run_preprocess(args, threads, started),
        Command::Stats(args) => run_stats(args, threads, started),
        Command::Train(args) => run_train(args, threads, started),
        Command::Evaluate(args) => run_evaluate(args, threads, started),
        Command::Predict(args) => run_predict(args, threads, started),
        Command::Plotdata(args) => run_plotdata(args, threads, started),
    }
}

fn manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    name.push_str(".manifest.json");
    primary_output.with_file_name(name)
}

fn finish_manifest(
    mut manifest: RunManifest,
    threads: usize,
    started: Instant,
    path: &Path,
) -> Result<()> {
    manifest.param("threads", threads);
    manifest.wall_seconds = started.elapsed().as_secs_f64();
    manifest.write(path)
}

fn run_synth(args: SynthArgs, threads: usize, started: Instant) -> Result<()> {
    let mut spec = SynthSpec::with_auto_states(args.states);
    spec.names = args.names;
    spec.noise = args.noise;
    spec.records_min = args.records_min;
    spec.records_max = args.records_max;
    spec.female_alpha = args.female_alpha;
    spec.female_beta = args.female_beta;
    spec.seed = args.seed;
    if let Some(weights) = &args.state_weights {
        let parsed: Vec<f64> = weights
            .split(',')
            .map(|w| {
                w.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArg(format!("bad state weight {w:?}")))
            })
            .collect::<Result<_>>()?;
        if parsed.len() != args.states {
            return Err(Error::InvalidArg(format!(
                "got {} state weights for {} states",
                parsed.len(),
                args.states
            )));
        }
        for (slot, weight) in spec.states.iter_mut().zip(parsed) {
            slot.1 = weight;
        }
    }
    let text = crate::synth::generate(&spec)?;
    write_atomic(&args.out, text.as_bytes())?;
    println!(
        "synth: wrote {} rows across {} names to {}",
        text.lines().count() - 1,
        args.names,
        args.out.display()
    );

    let mut manifest = RunManifest::new("synth");
    manifest
        .param("names", args.names)
        .param("states", args.states)
        .param("state_weights", spec.states.iter().map(|(_, w)| *w).collect::<Vec<_>>())
        .param("noise", args.noise)
        .param("records_min", args.records_min)
        .param("records_max", args.records_max)
        .param("female_alpha", args.female_alpha)
        .param("female_beta", args.female_beta)
        .seed("synth", args.seed)
        .output(&args.out);
    finish_manifest(manifest, threads, started, &manifest_path(&args.out))
}

fn run_preprocess(args: PreprocessArgs, threads: usize, started: Instant) -> Result<()> {
    let columns = ColumnMap {
        first: args.col_first.clone(),
        last: args.col_last.clone(),
        relative: args.col_relative.clone(),
        sex: args.col_sex.clone(),
        state: args.col_state.clone(),
    };
    let (records, report) =
        ingest::run(&args.input, args.delimiter.as_byte(), &columns, args.floor)?;
    ingest::write_clean(&args.output, &records)?;
    eprintln!(
        "preprocess: {} rows → {} kept ({} malformed, {} without last name, {} failed normalization, {} below floor {})",
        report.rows,
        report.kept,
        report.malformed,
        report.dropped_no_last_name,
        report.dropped_normalization,
        report.dropped_below_floor,
        args.floor
    );

    let mut manifest = RunManifest::new("preprocess");
    manifest
        .param("delimiter", args.delimiter.as_str())
        .param("col_first", &args.col_first)
        .param("col_last", &args.col_last)
        .param("col_relative", &args.col_relative)
        .param("col_sex", &args.col_sex)
        .param("col_state", &args.col_state)
        .param("floor", args.floor)
        .param("rows", report.rows)
        .param("malformed", report.malformed)
        .param("kept", report.kept)
        .input(&args.input)
        .output(&args.output);
    finish_manifest(manifest, threads, started, &manifest_path(&args.output))
}

fn run_stats(args: StatsArgs, threads: usize, started: Instant) -> Result<()> {
    let records = ingest::read_clean(&args.input)?;
    let histograms = aggregate(&records);
    write_histograms(&args.out_histograms, &histograms)?;

    let mut names_text = String::from("last_name,popularity,female_share\n");
    for hist in &histograms {
        let share = hist
            .female_share()
            .map(|s| format!("{s:.6}"))
            .unwrap_or_default();
        names_text.push_str(&format!("{},{},{}\n", hist.last_name, hist.popularity(), share));
    }
    write_atomic(&args.out_names, names_text.as_bytes())?;
    println!(
        "stats: {} records, {} distinct names, {} states",
        records.len(),
        histograms.len(),
        StateRegistry::from_observed(records.iter().map(|r| r.state.clone()))
            .map(|r| r.len())
            .unwrap_or(1)
    );

    let mut manifest = RunManifest::new("stats");
    manifest
        .input(&args.input)
        .output(&args.out_histograms)
        .output(&args.out_names);
    finish_manifest(manifest, threads, started, &manifest_path(&args.out_histograms))
}

/// Shared by train/evaluate/plotdata: clean records → histograms → split.
fn load_split(input: &Path, fraction: f64, seed: u64) -> Result<(SplitCorpus, StateRegistry)> {
    let records = ingest::read_clean(input)?;
    if records.is_empty() {
        return Err(Error::bad_data(input, "no clean records".to_string()));
    }
    let registry = StateRegistry::from_observed(records.iter().map(|r| r.state.clone()))?;
    let histograms = aggregate(&records);
    let corpus = split_by_name(histograms, fraction, seed)?;
    Ok((corpus, registry))
}

fn run_train(args: TrainArgs, threads: usize, started: Instant) -> Result<()> {
    let mut config = TrainConfig::preset(args.model.kind());
    if let Some(hidden) = args.hidden {
        config.hidden_dim = hidden;
    }
    if let Some(batch) = args.batch_size {
        config.batch_size = batch;
    }
    if let Some(optimizer) = args.optimizer {
        config.optimizer = optimizer.kind();
    }
    if let Some(lr) = args.learning_rate {
        config.learning_rate = lr;
    }
    if let Some(momentum) = args.momentum {
        config.momentum = momentum;
    }
    config.epochs = args.epochs;
    config.shuffle_seed = args.seed;
    config.checkpoint_interval = args.checkpoint_interval;
    config.clip_norm = args.clip_norm;

    let (corpus, registry) = load_split(&args.input, args.train_fraction, args.seed)?;
    let metrics_out = args
        .metrics
        .clone()
        .unwrap_or_else(|| sibling(&args.out, ".metrics.csv"));
    let checkpoint_out = args
        .checkpoint
        .clone()
        .unwrap_or_else(|| sibling(&args.out, ".ckpt"));
    let split_out = sibling(&args.out, ".split.csv");
    write_split_manifest(&split_out, &corpus)?;

    let output = train::run(&TrainJob {
        pairs: &corpus.train_pairs,
        registry: &registry,
        config: config.clone(),
        init_seed: args.seed,
        split_seed: Some(args.seed),
        train_fraction: Some(args.train_fraction),
        model_out: &args.out,
        metrics_out: &metrics_out,
        checkpoint_out: &checkpoint_out,
        resume_from: args.resume.as_deref(),
    })?;
    if let Some(last) = output.metrics.last() {
        println!(
            "train: {} epochs over {} pairs, final mean loss {:.6}",
            last.epoch,
            corpus.train_pairs.len(),
            last.mean_loss
        );
    } else {
        println!("train: nothing to do (checkpoint already complete)");
    }

    let mut manifest = RunManifest::new("train");
    manifest
        .param("model", config.kind.as_str())
        .param("hidden", config.hidden_dim)
        .param("batch_size", config.batch_size)
        .param("optimizer", config.optimizer.as_str())
        .param("learning_rate", config.learning_rate)
        .param("momentum", config.momentum)
        .param("epochs", config.epochs)
        .param("train_fraction", args.train_fraction)
        .param("checkpoint_interval", config.checkpoint_interval)
        .param("clip_norm", config.clip_norm)
        .param("config_digest", config.digest())
        .param("train_pairs", corpus.train_pairs.len())
        .seed("init", args.seed)
        .seed("shuffle", args.seed)
        .seed("split", args.seed)
        .input(&args.input)
        .output(&args.out)
        .output(&metrics_out)
        .output(&checkpoint_out)
        .output(&split_out);
    if let Some(resume) = &args.resume {
        manifest.param("resume", resume.display().to_string());
    }
    finish_manifest(manifest, threads, started, &manifest_path(&args.out))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path
        .file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    name.push_str(suffix);
    path.with_file_name(name)
}

fn run_evaluate(args: EvaluateArgs, threads: usize, started: Instant) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;

    // Resolve the split provenance: model metadata wins when present.
    let (predictor, corpus, label): (Box<dyn Predict>, SplitCorpus, String) =
        match (&args.model_file, args.baseline) {
            (Some(path), None) => {
                let model = load_model(path)?;
                let split_seed = model.meta.split_seed.unwrap_or(args.seed);
                let fraction = model.meta.train_fraction.unwrap_or(args.train_fraction);
                let (corpus, registry) = load_split(&args.input, fraction, split_seed)?;
                if model.states.names() != registry.names() {
                    return Err(Error::bad_data(
                        &args.input,
                        format!(
                            "corpus states differ from the model registry ({} vs {} states)",
                            registry.len(),
                            model.states.len()
                        ),
                    ));
                }
                let label = model.label();
                (Box::new(model), corpus, label)
            }
            (None, Some(baseline)) => {
                let (corpus, _) = load_split(&args.input, args.train_fraction, args.seed)?;
                match baseline {
                    BaselineArg::Majority => {
                        // Fit on the full corpus: train + test histograms.
                        let mut all = corpus.train_histograms.clone();
                        all.extend(corpus.test_histograms.iter().cloned());
                        let fitted = majority_baseline(&all)?;
                        println!(
                            "baseline majority: state={}, expected modal accuracy {:.3}",
                            fitted.state, fitted.share
                        );
                        let label = fitted.label();
                        (Box::new(fitted) as Box<dyn Predict>, corpus, label)
                    }
                    BaselineArg::Naivebayes => {
                        let fitted = NaiveBayes::fit(&corpus.train_histograms)?;
                        let label = fitted.label();
                        (Box::new(fitted) as Box<dyn Predict>, corpus, label)
                    }
                }
            }
            _ => unreachable!("clap group enforces exactly one predictor"),
        };

    let (outcomes, full_report) = evaluate(predictor.as_ref(), &corpus.test_histograms, args.k)?;
    let weighted = slice_weighted_random(&outcomes, args.sample_n, args.seed);
    let (top, bottom) = slice_extremes(&outcomes, args.sample_n);
    let per_state = per_state_accuracy(&outcomes, args.per_state_n, args.seed);

    let slices_path = args.out_dir.join("slices.csv");
    let wide_path = args.out_dir.join("accuracy_by_slice.csv");
    let state_path = args.out_dir.join("accuracy_by_state.csv");
    let reports = vec![
        full_report.clone(),
        weighted.clone(),
        top.clone(),
        bottom.clone(),
    ];
    write_slice_reports(&slices_path, &reports)?;
    write_wide_table(
        &wide_path,
        &[(label.clone(), full_report, weighted, top, bottom)],
    )?;
    write_per_state(&state_path, &per_state)?;
    for report in &reports {
        print_report(report);
    }

    let mut outputs = vec![slices_path, wide_path, state_path];
    let popularity_points: Vec<(f64, f64)> = outcomes
        .iter()
        .filter(|o| o.popularity <= args.max_popularity)
        .map(|o| (o.popularity as f64, o.hit as u8 as f64))
        .collect();
    let gender_points: Vec<(f64, f64)> = outcomes
        .iter()
        .filter_map(|o| o.female_share.map(|s| (s, o.hit as u8 as f64)))
        .collect();
    for (file, points) in [
        ("popularity_plot.csv", popularity_points),
        ("gender_plot.csv", gender_points),
    ] {
        let path = args.out_dir.join(file);
        if points.len() >= 2 {
            write_plot_data(&path, &points, 2.0 / 3.0, 3)?;
            outputs.push(path);
        } else {
            eprintln!("evaluate: skipping {file} ({} usable points)", points.len());
        }
    }

    let mut manifest = RunManifest::new("evaluate");
    manifest
        .param("predictor", label)
        .param("k", args.k)
        .param("sample_n", args.sample_n)
        .param("per_state_n", args.per_state_n)
        .param("train_fraction", args.train_fraction)
        .param("max_popularity", args.max_popularity)
        .param("split_seed", corpus.seed)
        .param("split_fraction", corpus.train_fraction)
        .seed("sampling", args.seed)
        .input(&args.input);
    if let Some(path) = &args.model_file {
        manifest.input(path);
    }
    for path in &outputs {
        manifest.output(path);
    }
    finish_manifest(manifest, threads, started, &args.out_dir.join("evaluate.manifest.json"))
}

fn print_report(report: &SliceReport) {
    println!(
        "{}: n={} topk_accuracy={:.6} modal_accuracy={:.6}",
        report.slice, report.n, report.topk_accuracy, report.modal_accuracy
    );
}

fn run_predict(args: PredictArgs, threads: usize, started: Instant) -> Result<()> {
    let model = load_model(&args.model_file)?;
    let ranked = model.predict_top_k(&args.name, args.top_k)?;
    for (state, prob) in &ranked {
        println!("state\t{state}\t{prob:.6}");
    }
    if args.languages {
        let table = LanguageTable::load(&args.table)?;
        let distribution = model.state_distribution(&args.name)?;
        let probs: Vec<(String, f64)> = model
            .states
            .names()
            .iter()
            .cloned()
            .zip(distribution)
            .collect();
        for (language, score) in table.predict_languages(&probs, args.top_k)? {
            println!("language\t{language}\t{score:.6}");
        }
    }

    let mut manifest = RunManifest::new("predict");
    manifest
        .param("name", &args.name)
        .param("top_k", args.top_k)
        .param("languages", args.languages)
        .input(&args.model_file);
    if args.languages {
        manifest.input(&args.table);
    }
    finish_manifest(manifest, threads, started, &args.manifest)
}

fn run_plotdata(args: PlotdataArgs, threads: usize, started: Instant) -> Result<()> {
    let model = load_model(&args.model_file)?;
    let split_seed = model.meta.split_seed.unwrap_or(args.seed);
    let fraction = model.meta.train_fraction.unwrap_or(args.train_fraction);
    let (corpus, registry) = load_split(&args.input, fraction, split_seed)?;
    if model.states.names() != registry.names() {
        return Err(Error::bad_data(
            &args.input,
            "corpus states differ from the model registry".to_string(),
        ));
    }
    let (outcomes, _) = evaluate(&model, &corpus.test_histograms, args.k)?;
    let points: Vec<(f64, f64)> = match args.figure {
        FigureArg::Popularity => outcomes
            .iter()
            .filter(|o| o.popularity <= args.max_popularity)
            .map(|o| (o.popularity as f64, o.hit as u8 as f64))
            .collect(),
        FigureArg::Gender => outcomes
            .iter()
            .filter_map(|o| o.female_share.map(|s| (s, o.hit as u8 as f64)))
            .collect(),
    };
    write_plot_data(&args.out, &points, args.fraction, args.iterations)?;
    println!(
        "plotdata: {} points smoothed to {}",
        points.len(),
        args.out.display()
    );

    let mut manifest = RunManifest::new("plotdata");
    manifest
        .param("figure", format!("{:?}", args.figure).to_lowercase())
        .param("k", args.k)
        .param("max_popularity", args.max_popularity)
        .param("fraction", args.fraction)
        .param("iterations", args.iterations)
        .param("split_seed", corpus.seed)
        .param("split_fraction", corpus.train_fraction)
        .input(&args.model_file)
        .input(&args.input)
        .output(&args.out);
    finish_manifest(manifest, threads, started, &manifest_path(&args.out))
}
