use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use galloping::data::{self, FeatureMask, SplitSpec};
use galloping::experiments::{self, Descriptor, FitOptions, SweepSpec, Table};
use galloping::metrics::{self, fmt_metric};
use galloping::sampling::{SamplingKind, SamplingStrategy};
use galloping::svm::{self, TrainConfig};
use galloping::synth::{self, SynthConfig};
use galloping::Result;

#[derive(Parser)]
#[command(name = "galloping", version, about = "Conductor galloping prediction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset
    Gen(GenArgs),
    /// Train a model on a dataset
    Train(TrainArgs),
    /// Evaluate a saved model on a dataset
    Eval(EvalArgs),
    /// Train and score every one of the 127 feature subsets
    SearchFeatures(SearchArgs),
    /// Fixed galloping count against increasing normal counts
    SweepBalance(SweepArgs),
    /// Training-set size by galloping-fraction grid
    Grid(GridArgs),
    /// No adjustment vs under-sampling vs SMOTE
    CompareSampling(CompareArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long)]
    galloping_fraction: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "galloping.csv")]
    out: PathBuf,
    /// key = value generator config; flags given explicitly override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the effective config to this path
    #[arg(long)]
    save_config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Box constraint
    #[arg(long, default_value_t = TrainConfig::DEFAULT_C)]
    c: f64,
    /// Kernel width; defaults to 1 / number of features
    #[arg(long)]
    gamma: Option<f64>,
    /// Choose C and gamma on an inner validation split
    #[arg(long)]
    grid_search: bool,
}

impl ModelArgs {
    fn options(&self) -> FitOptions {
        FitOptions {
            c: self.c,
            gamma: self.gamma,
            grid_search: self.grid_search,
            ..FitOptions::default()
        }
    }
}

#[derive(Args, Clone)]
struct SamplingArgs {
    #[arg(long, default_value = "none")]
    sampling: SamplingKind,
    #[arg(long, default_value_t = SamplingStrategy::DEFAULT_K)]
    smote_k: usize,
    #[arg(long, default_value_t = 1.0)]
    target_ratio: f64,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated feature names
    #[arg(long, default_value = "wind_speed,temperature,precipitation")]
    features: String,
    #[command(flatten)]
    model_args: ModelArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "model.svm")]
    model: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Write the metrics as a one-row CSV
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted for uniformity; evaluation draws no random numbers
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = SplitSpec::DEFAULT_TEST_FRACTION)]
    test_fraction: f64,
    #[command(flatten)]
    model_args: ModelArgs,
    /// Append a wall-clock runtime column (output is then not reproducible)
    #[arg(long)]
    timings: bool,
}

impl Common {
    fn split(&self) -> Result<SplitSpec> {
        SplitSpec::new(self.test_fraction, self.seed)
    }
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    common: Common,
    /// Subsample the training split to at most this many samples
    #[arg(long)]
    max_train: Option<usize>,
    #[arg(long, default_value = "feature_search.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "wind_speed,temperature,precipitation")]
    features: String,
    #[arg(long, default_value_t = SweepSpec::DEFAULT_MINORITY)]
    minority: usize,
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000,8000")]
    counts: Vec<usize>,
    #[arg(long, default_value_t = SweepSpec::DEFAULT_REPETITIONS)]
    reps: usize,
    #[arg(long, default_value = "balance_sweep.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "wind_speed,temperature,precipitation")]
    features: String,
    #[arg(long, value_delimiter = ',', default_value = "2000,5000,10000,20000")]
    sizes: Vec<usize>,
    /// Galloping fraction of each training subset
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5")]
    ratios: Vec<f64>,
    #[arg(long, default_value = "volume_grid.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "wind_speed,temperature,precipitation")]
    features: String,
    #[arg(long, default_value_t = SamplingStrategy::DEFAULT_K)]
    smote_k: usize,
    #[arg(long, default_value_t = 1.0)]
    target_ratio: f64,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value = "sampling_comparison.csv")]
    out: PathBuf,
}

fn gen(a: GenArgs) -> Result<String> {
    let mut config = match &a.config {
        Some(p) => SynthConfig::load(p)?,
        None => SynthConfig::default(),
    };
    config.n_total = a.n;
    config.seed = a.seed;
    if let Some(f) = a.galloping_fraction {
        config.galloping_fraction = f;
    }
    if let Some(noise) = a.noise {
        config.label_noise = noise;
    }
    let ds = synth::generate(&config)?;
    data::write_csv(&ds, &a.out)?;
    if let Some(p) = &a.save_config {
        config.save(p)?;
    }
    Ok(format!(
        "wrote {} samples ({} galloping) to {}",
        ds.len(),
        ds.class_count(galloping::Label::Galloping),
        a.out.display()
    ))
}

fn train(a: TrainArgs) -> Result<String> {
    let mask = FeatureMask::parse_names(&a.features)?;
    let ds = data::project(&data::load_csv(&a.data)?, mask)?;
    let strategy = SamplingStrategy {
        kind: a.sampling.sampling,
        k_neighbors: a.sampling.smote_k,
        target_ratio: a.sampling.target_ratio,
        seed: experiments::derive_seed(a.seed, "sampling", 0),
    };
    let model = experiments::fit(
        &ds,
        &a.model_args.options(),
        Some(&strategy),
        experiments::derive_seed(a.seed, "train", 0),
    )?;
    svm::save_model(&model, &a.model)?;
    Ok(format!(
        "trained on {} samples: {} support vectors, C={} gamma={} -> {}",
        ds.len(),
        model.support_vector_count(),
        model.c(),
        model.kernel().gamma(),
        a.model.display()
    ))
}

fn eval(a: EvalArgs) -> Result<String> {
    let model = svm::load_model(&a.model)?;
    let ds = data::load_csv(&a.data)?;
    let report = metrics::evaluate(&model, &ds)?;
    if let Some(out) = &a.out {
        let text = format!("{}\n{}\n", metrics::REPORT_HEADER, report.csv_row());
        std::fs::write(out, text).map_err(|e| galloping::Error::Io {
            path: out.clone(),
            source: e,
        })?;
    }
    Ok(report.to_string())
}

fn search(a: SearchArgs) -> Result<String> {
    let ds = data::load_csv(&a.common.data)?;
    let rows = experiments::feature_search(&ds, &a.common.model_args.options(), &a.common.split()?, a.max_train)?;
    experiments::write_csv(Table::FeatureSearch, &rows, a.common.timings, &a.out)?;
    let best = &rows[0];
    let name = match best.descriptor {
        Descriptor::Mask(m) => m.names(),
        _ => unreachable!(),
    };
    Ok(format!(
        "best of {} masks: {name} f1={} -> {}",
        rows.len(),
        fmt_metric(best.f1()),
        a.out.display()
    ))
}

fn sweep(a: SweepArgs) -> Result<String> {
    let ds = data::load_csv(&a.common.data)?;
    let spec = SweepSpec {
        fixed_minority: a.minority,
        majority_counts: a.counts,
        repetitions: a.reps,
        seed: a.common.seed,
    };
    let mask = FeatureMask::parse_names(&a.features)?;
    let rows = experiments::balance_sweep(&ds, &spec, &a.common.model_args.options(), &a.common.split()?, mask)?;
    experiments::write_csv(Table::BalanceSweep, &rows, a.common.timings, &a.out)?;
    let best = spec
        .majority_counts
        .iter()
        .map(|&normal| {
            let d = Descriptor::Balance {
                galloping: spec.fixed_minority,
                normal,
            };
            (normal, experiments::summary_f1(&rows, d))
        })
        .max_by(|x, y| x.1.unwrap_or(-1.0).total_cmp(&y.1.unwrap_or(-1.0)))
        .expect("non-empty counts");
    Ok(format!(
        "peak mean f1={} at {} galloping / {} normal -> {}",
        fmt_metric(best.1),
        spec.fixed_minority,
        best.0,
        a.out.display()
    ))
}

fn grid(a: GridArgs) -> Result<String> {
    let ds = data::load_csv(&a.common.data)?;
    let mask = FeatureMask::parse_names(&a.features)?;
    let rows = experiments::volume_grid(&ds, &a.sizes, &a.ratios, &a.common.model_args.options(), &a.common.split()?, mask)?;
    experiments::write_csv(Table::VolumeGrid, &rows, a.common.timings, &a.out)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    let best = rows
        .iter()
        .max_by(|x, y| x.f1().unwrap_or(-1.0).total_cmp(&y.f1().unwrap_or(-1.0)))
        .expect("non-empty grid");
    let cell = match best.descriptor {
        Descriptor::Volume { size, galloping_ratio } => format!("size {size} ratio {galloping_ratio}"),
        _ => unreachable!(),
    };
    Ok(format!(
        "{} cells ({failed} failed), best f1={} at {cell} -> {}",
        rows.len(),
        fmt_metric(best.f1()),
        a.out.display()
    ))
}

fn compare(a: CompareArgs) -> Result<String> {
    let ds = data::load_csv(&a.common.data)?;
    let mask = FeatureMask::parse_names(&a.features)?;
    let strategies: Vec<SamplingStrategy> = SamplingKind::ALL
        .iter()
        .map(|&kind| SamplingStrategy {
            kind,
            k_neighbors: a.smote_k,
            target_ratio: a.target_ratio,
            seed: a.common.seed,
        })
        .collect();
    let rows = experiments::sampling_comparison(
        &ds,
        &strategies,
        &a.common.model_args.options(),
        &a.common.split()?,
        mask,
        a.reps,
    )?;
    experiments::write_csv(Table::SamplingComparison, &rows, a.common.timings, &a.out)?;
    let parts: Vec<String> = SamplingKind::ALL
        .iter()
        .map(|&k| format!("{k}={}", fmt_metric(experiments::summary_f1(&rows, Descriptor::Sampling(k)))))
        .collect();
    Ok(format!("f1 {} -> {}", parts.join(" "), a.out.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::SearchFeatures(a) => search(a),
        Command::SweepBalance(a) => sweep(a),
        Command::Grid(a) => grid(a),
        Command::CompareSampling(a) => compare(a),
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
