//! Experiment drivers: exhaustive feature-subset search, class-balance sweep,
//! data-volume grid and sampling-strategy comparison, each producing a CSV
//! table.
//!
//! Every experiment first splits its source into a training pool and a test
//! set. Subsets, scaling and class balancing are all derived from the pool
//! alone; the test set is never resampled, so every cell of an experiment is
//! scored on the same held-out samples.
//!
//! # Seeds
//!
//! A single user seed drives everything. Each consumer draws its own seed
//! with [`derive_seed`]`(seed, purpose, index)`, where `purpose` is one of
//! `"split"`, `"subset"`, `"sampling"` or `"train"` and `index` is the
//! repetition or cell number.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{self, Dataset, FeatureMask, Label, SplitSpec};
use crate::error::{Error, Result};
use crate::metrics::{self, MetricsReport, REPORT_HEADER};
use crate::sampling::{self, SamplingKind, SamplingStrategy};
use crate::svm::{self, KernelParams, SvmModel, TrainConfig};

/// SplitMix64 finalizer over `seed`, an FNV-1a hash of `purpose`, and `index`.
pub fn derive_seed(seed: u64, purpose: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in purpose.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed
        .wrapping_add(h.rotate_left(17))
        .wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for _ in 0..2 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

/// SVM hyperparameters shared by the experiments. `gamma: None` means
/// `1 / (number of features)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub c: f64,
    pub gamma: Option<f64>,
    /// Pick `C` and `gamma` by the inner validation grid instead.
    pub grid_search: bool,
    pub kkt_tolerance: f64,
    pub max_passes: usize,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        let base = TrainConfig::default_for_dim(1);
        Self {
            c: TrainConfig::DEFAULT_C,
            gamma: None,
            grid_search: false,
            kkt_tolerance: base.kkt_tolerance,
            max_passes: base.max_passes,
            max_iterations: base.max_iterations,
        }
    }
}

impl FitOptions {
    pub fn train_config(&self, dim: usize, seed: u64) -> Result<TrainConfig> {
        let kernel = match self.gamma {
            Some(g) => KernelParams::new(g)?,
            None => KernelParams::for_dim(dim),
        };
        let config = TrainConfig {
            c: self.c,
            kernel,
            kkt_tolerance: self.kkt_tolerance,
            max_passes: self.max_passes,
            max_iterations: self.max_iterations,
            seed,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Standardizes `train` (raw values over the wanted features), optionally
/// rebalances it, and trains. The model carries the fitted scaling, so it can
/// be evaluated directly on raw test data.
pub fn fit(
    train: &Dataset,
    options: &FitOptions,
    sampling: Option<&SamplingStrategy>,
    seed: u64,
) -> Result<SvmModel> {
    let scaled = data::standardize(train)?;
    let scaled = match sampling {
        Some(s) => sampling::apply(&scaled, s)?,
        None => scaled,
    };
    let config = options.train_config(scaled.dim(), seed)?;
    if options.grid_search {
        Ok(svm::grid_search(&scaled, &config)?.0)
    } else {
        Ok(svm::train(&scaled, &config)?)
    }
}

/// What a result row describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Descriptor {
    Mask(FeatureMask),
    Balance { galloping: usize, normal: usize },
    Volume { size: usize, galloping_ratio: f64 },
    Sampling(SamplingKind),
}

/// Which repetition a row reports; `Mean` rows aggregate the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repetition {
    Single,
    Run(usize),
    Mean,
}

impl fmt::Display for Repetition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Repetition::Single => f.write_str("0"),
            Repetition::Run(r) => write!(f, "{r}"),
            Repetition::Mean => f.write_str("mean"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub descriptor: Descriptor,
    pub repetition: Repetition,
    /// Metrics, or the error that stopped this cell.
    pub outcome: std::result::Result<MetricsReport, String>,
    pub runtime_seconds: f64,
}

impl ExperimentResult {
    pub fn report(&self) -> Option<&MetricsReport> {
        self.outcome.as_ref().ok()
    }

    pub fn f1(&self) -> Option<f64> {
        self.report().and_then(|r| r.f1)
    }

    fn timed(
        descriptor: Descriptor,
        repetition: Repetition,
        run: impl FnOnce() -> Result<MetricsReport>,
    ) -> Self {
        let start = Instant::now();
        let outcome = run().map_err(|e| {
            log::warn!("{descriptor:?}: {e}");
            e.to_string()
        });
        Self {
            descriptor,
            repetition,
            outcome,
            runtime_seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Sums counts and averages each ratio over the successful runs. A ratio is
/// `None` if it is undefined in any of them.
fn mean_row(descriptor: Descriptor, runs: &[ExperimentResult]) -> ExperimentResult {
    let ok: Vec<&MetricsReport> = runs.iter().filter_map(|r| r.report()).collect();
    let runtime_seconds = runs.iter().map(|r| r.runtime_seconds).sum();
    if ok.is_empty() {
        return ExperimentResult {
            descriptor,
            repetition: Repetition::Mean,
            outcome: Err("every repetition failed".into()),
            runtime_seconds,
        };
    }
    let avg = |get: fn(&MetricsReport) -> Option<f64>| -> Option<f64> {
        let vals: Option<Vec<f64>> = ok.iter().map(|r| get(r)).collect();
        vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
    };
    let report = MetricsReport {
        tp: ok.iter().map(|r| r.tp).sum(),
        fp: ok.iter().map(|r| r.fp).sum(),
        fn_: ok.iter().map(|r| r.fn_).sum(),
        tn: ok.iter().map(|r| r.tn).sum(),
        precision: avg(|r| r.precision),
        recall: avg(|r| r.recall),
        f1: avg(|r| r.f1),
    };
    ExperimentResult {
        descriptor,
        repetition: Repetition::Mean,
        outcome: Ok(report),
        runtime_seconds,
    }
}

fn split_pool(source: &Dataset, split: &SplitSpec, rep: usize) -> Result<(Dataset, Dataset)> {
    let spec = SplitSpec {
        seed: derive_seed(split.seed, "split", rep as u64),
        ..*split
    };
    data::train_test_split(source, &spec)
}

/// `galloping` + `normal` samples drawn without replacement from `pool`,
/// kept in pool order.
fn draw_subset(pool: &Dataset, galloping: usize, normal: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(galloping + normal);
    for (label, want) in [(Label::Galloping, galloping), (Label::Normal, normal)] {
        let idx = pool.indices_of(label);
        if idx.len() < want {
            return Err(Error::Insufficient(format!(
                "need {want} {label} samples, training pool has {}",
                idx.len()
            )));
        }
        chosen.extend(index::sample(&mut rng, idx.len(), want).into_iter().map(|k| idx[k]));
    }
    chosen.sort_unstable();
    Ok(pool.select(&chosen))
}

/// Trains and evaluates one model per feature mask (all 127), sorted by F1
/// descending; masks with undefined F1 or a failure go last. Ties keep mask
/// order.
///
/// `max_train` caps the training split by uniform subsampling.
pub fn feature_search(
    dataset: &Dataset,
    options: &FitOptions,
    split: &SplitSpec,
    max_train: Option<usize>,
) -> Result<Vec<ExperimentResult>> {
    let (mut train, test) = split_pool(dataset, split, 0)?;
    if let Some(cap) = max_train.filter(|&cap| cap < train.len()) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(split.seed, "subset", 0));
        let mut idx = index::sample(&mut rng, train.len(), cap).into_vec();
        idx.sort_unstable();
        train = train.select(&idx);
    }
    let train_seed = derive_seed(split.seed, "train", 0);
    let mut rows: Vec<ExperimentResult> = FeatureMask::every()
        .map(|mask| {
            ExperimentResult::timed(Descriptor::Mask(mask), Repetition::Single, || {
                let model = fit(&data::project(&train, mask)?, options, None, train_seed)?;
                metrics::evaluate(&model, &test)
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        let key = |r: &ExperimentResult| r.f1().unwrap_or(f64::NEG_INFINITY);
        key(b).total_cmp(&key(a))
    });
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub fixed_minority: usize,
    pub majority_counts: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub const DEFAULT_MINORITY: usize = 2_000;
    pub const DEFAULT_COUNTS: [usize; 5] = [500, 1_000, 2_000, 4_000, 8_000];
    pub const DEFAULT_REPETITIONS: usize = 5;

    pub fn new(seed: u64) -> Self {
        Self {
            fixed_minority: Self::DEFAULT_MINORITY,
            majority_counts: Self::DEFAULT_COUNTS.to_vec(),
            repetitions: Self::DEFAULT_REPETITIONS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fixed_minority == 0 || self.repetitions == 0 || self.majority_counts.is_empty() {
            return Err(Error::InvalidParameter(
                "minority, repetitions and counts must be non-empty/positive".into(),
            ));
        }
        if self.majority_counts[0] == 0 || self.majority_counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "majority counts must be positive and strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// For each majority count, trains on `fixed_minority` galloping plus that
/// many normal samples from the training pool. Each repetition uses its own
/// split and subsets; per-repetition rows are followed by a mean row.
pub fn balance_sweep(
    source: &Dataset,
    spec: &SweepSpec,
    options: &FitOptions,
    split: &SplitSpec,
    mask: FeatureMask,
) -> Result<Vec<ExperimentResult>> {
    spec.validate()?;
    let source = data::project(source, mask)?;
    let max_major = *spec.majority_counts.last().expect("validated non-empty");
    let split = SplitSpec { seed: spec.seed, ..*split };
    let pools = (0..spec.repetitions)
        .map(|r| split_pool(&source, &split, r))
        .collect::<Result<Vec<_>>>()?;
    for (train, _) in &pools {
        let (g, n) = (train.class_count(Label::Galloping), train.class_count(Label::Normal));
        if g < spec.fixed_minority || n < max_major {
            return Err(Error::Insufficient(format!(
                "training pool has {g} galloping / {n} normal, sweep needs {} / {max_major}",
                spec.fixed_minority
            )));
        }
    }
    let mut rows = Vec::new();
    for (cell, &normal) in spec.majority_counts.iter().enumerate() {
        let descriptor = Descriptor::Balance {
            galloping: spec.fixed_minority,
            normal,
        };
        let runs: Vec<ExperimentResult> = pools
            .iter()
            .enumerate()
            .map(|(r, (pool, test))| {
                ExperimentResult::timed(descriptor, Repetition::Run(r), || {
                    let tag = (cell * spec.repetitions + r) as u64;
                    let train =
                        draw_subset(pool, spec.fixed_minority, normal, derive_seed(spec.seed, "subset", tag))?;
                    let model = fit(&train, options, None, derive_seed(spec.seed, "train", tag))?;
                    metrics::evaluate(&model, test)
                })
            })
            .collect();
        let mean = mean_row(descriptor, &runs);
        rows.extend(runs);
        rows.push(mean);
    }
    Ok(rows)
}

/// Full factorial over total training size and galloping fraction. Cells the
/// training pool cannot supply are recorded as failures.
pub fn volume_grid(
    source: &Dataset,
    sizes: &[usize],
    ratios: &[f64],
    options: &FitOptions,
    split: &SplitSpec,
    mask: FeatureMask,
) -> Result<Vec<ExperimentResult>> {
    if sizes.is_empty() || ratios.is_empty() {
        return Err(Error::InvalidParameter("sizes and ratios must be non-empty".into()));
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::InvalidParameter(format!("galloping ratio {r} outside (0, 1)")));
    }
    let source = data::project(source, mask)?;
    let (pool, test) = split_pool(&source, split, 0)?;
    let mut rows = Vec::with_capacity(sizes.len() * ratios.len());
    for (i, &size) in sizes.iter().enumerate() {
        for (j, &ratio) in ratios.iter().enumerate() {
            let tag = (i * ratios.len() + j) as u64;
            let descriptor = Descriptor::Volume {
                size,
                galloping_ratio: ratio,
            };
            rows.push(ExperimentResult::timed(descriptor, Repetition::Single, || {
                let g = (size as f64 * ratio).round() as usize;
                let train = draw_subset(&pool, g, size - g, derive_seed(split.seed, "subset", tag))?;
                let model = fit(&train, options, None, derive_seed(split.seed, "train", tag))?;
                metrics::evaluate(&model, &test)
            }));
        }
    }
    Ok(rows)
}

/// For each repetition: split, then for each strategy rebalance the (scaled)
/// training split only, train, and score on the untouched test split. With
/// more than one repetition a mean row follows each strategy's runs.
pub fn sampling_comparison(
    source: &Dataset,
    strategies: &[SamplingStrategy],
    options: &FitOptions,
    split: &SplitSpec,
    mask: FeatureMask,
    repetitions: usize,
) -> Result<Vec<ExperimentResult>> {
    if strategies.is_empty() || repetitions == 0 {
        return Err(Error::InvalidParameter(
            "need at least one strategy and one repetition".into(),
        ));
    }
    let source = data::project(source, mask)?;
    let g = source.class_count(Label::Galloping);
    if 2 * g >= source.len() {
        log::warn!("sampling comparison: galloping is not the minority class ({g} of {})", source.len());
    }
    let pools = (0..repetitions)
        .map(|r| split_pool(&source, split, r))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (s, strategy) in strategies.iter().enumerate() {
        let descriptor = Descriptor::Sampling(strategy.kind);
        let runs: Vec<ExperimentResult> = pools
            .iter()
            .enumerate()
            .map(|(r, (train, test))| {
                let repetition = if repetitions == 1 {
                    Repetition::Single
                } else {
                    Repetition::Run(r)
                };
                ExperimentResult::timed(descriptor, repetition, || {
                    let tag = (s * repetitions + r) as u64;
                    let strategy = SamplingStrategy {
                        seed: derive_seed(strategy.seed, "sampling", r as u64),
                        ..*strategy
                    };
                    let model = fit(train, options, Some(&strategy), derive_seed(split.seed, "train", tag))?;
                    metrics::evaluate(&model, test)
                })
            })
            .collect();
        let mean = (repetitions > 1).then(|| mean_row(descriptor, &runs));
        rows.extend(runs);
        rows.extend(mean);
    }
    Ok(rows)
}

/// Which experiment a table holds; fixes the descriptor columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    FeatureSearch,
    BalanceSweep,
    VolumeGrid,
    SamplingComparison,
}

impl Table {
    pub fn file_name(self) -> &'static str {
        match self {
            Table::FeatureSearch => "feature_search.csv",
            Table::BalanceSweep => "balance_sweep.csv",
            Table::VolumeGrid => "volume_grid.csv",
            Table::SamplingComparison => "sampling_comparison.csv",
        }
    }

    fn descriptor_header(self) -> &'static str {
        match self {
            Table::FeatureSearch => "rank,mask,features,n_features",
            Table::BalanceSweep => "galloping,normal,repetition",
            Table::VolumeGrid => "size,galloping_ratio,repetition",
            Table::SamplingComparison => "strategy,repetition",
        }
    }
}

fn descriptor_cells(rank: usize, r: &ExperimentResult) -> String {
    match r.descriptor {
        Descriptor::Mask(m) => format!("{rank},{},\"{}\",{}", m.bits(), m.names(), m.len()),
        Descriptor::Balance { galloping, normal } => format!("{galloping},{normal},{}", r.repetition),
        Descriptor::Volume { size, galloping_ratio } => format!("{size},{galloping_ratio},{}", r.repetition),
        Descriptor::Sampling(k) => format!("{k},{}", r.repetition),
    }
}

/// Renders a result table. Failed rows leave the metric cells empty and put
/// the error in `status`; runtime is appended only when `timings` is set
/// (wall-clock times would break byte-for-byte reproducibility).
pub fn to_csv(table: Table, results: &[ExperimentResult], timings: bool) -> String {
    let mut out = format!("{},{REPORT_HEADER},status", table.descriptor_header());
    if timings {
        out.push_str(",runtime_seconds");
    }
    out.push('\n');
    for (i, r) in results.iter().enumerate() {
        out.push_str(&descriptor_cells(i + 1, r));
        out.push(',');
        match &r.outcome {
            Ok(report) => {
                out.push_str(&report.csv_row());
                out.push_str(",ok");
            }
            Err(e) => {
                out.push_str(",,,,,,,");
                out.push_str(&format!("\"error: {}\"", e.replace('"', "'")));
            }
        }
        if timings {
            out.push_str(&format!(",{:.3}", r.runtime_seconds));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(
    table: Table,
    results: &[ExperimentResult],
    timings: bool,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(to_csv(table, results, timings).as_bytes()).map_err(io)?;
    w.flush().map_err(io)
}

/// Mean-row F1 (or the single row's F1) for a descriptor.
pub fn summary_f1(results: &[ExperimentResult], descriptor: Descriptor) -> Option<f64> {
    let matching: Vec<&ExperimentResult> = results.iter().filter(|r| r.descriptor == descriptor).collect();
    matching
        .iter()
        .find(|r| r.repetition == Repetition::Mean)
        .or_else(|| matching.first())
        .and_then(|r| r.f1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthConfig};

    fn small(seed: u64) -> Dataset {
        generate(&SynthConfig::new(400, seed)).unwrap()
    }

    #[test]
    fn derived_seeds_differ_by_purpose_and_index() {
        let a = derive_seed(1, "split", 0);
        assert_eq!(a, derive_seed(1, "split", 0));
        assert_ne!(a, derive_seed(1, "train", 0));
        assert_ne!(a, derive_seed(1, "split", 1));
        assert_ne!(a, derive_seed(2, "split", 0));
    }

    #[test]
    fn mean_row_sums_counts_and_averages_ratios() {
        let d = Descriptor::Sampling(SamplingKind::None);
        let run = |tp, fp, fn_, tn| ExperimentResult {
            descriptor: d,
            repetition: Repetition::Run(0),
            outcome: Ok(MetricsReport::from_counts(tp, fp, fn_, tn)),
            runtime_seconds: 1.0,
        };
        let m = mean_row(d, &[run(1, 1, 0, 2), run(3, 0, 1, 0)]);
        let r = m.report().unwrap();
        assert_eq!((r.tp, r.fp, r.fn_, r.tn), (4, 1, 1, 2));
        assert_eq!(r.precision, Some(0.75));
        assert_eq!(r.recall, Some(0.875));
    }

    #[test]
    fn failures_are_recorded() {
        let ds = small(1);
        let options = FitOptions::default();
        let rows = volume_grid(&ds, &[50, 100_000], &[0.5], &options, &SplitSpec::with_seed(3), FeatureMask::trio()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].outcome.is_ok());
        assert!(rows[1].outcome.is_err());
        let csv = to_csv(Table::VolumeGrid, &rows, false);
        assert!(csv.lines().nth(2).unwrap().contains("error: insufficient"));
    }

    #[test]
    fn sweep_rejects_small_source() {
        let spec = SweepSpec::new(0);
        let err = balance_sweep(&small(2), &spec, &FitOptions::default(), &SplitSpec::with_seed(0), FeatureMask::trio());
        assert!(matches!(err, Err(Error::Insufficient(_))));
        let bad = SweepSpec {
            majority_counts: vec![10, 10],
            ..SweepSpec::new(0)
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_layout() {
        let ds = small(4);
        let strategies: Vec<_> = SamplingKind::ALL.iter().map(|&k| SamplingStrategy::new(k, 1)).collect();
        let rows = sampling_comparison(&ds, &strategies, &FitOptions::default(), &SplitSpec::with_seed(1), FeatureMask::trio(), 2).unwrap();
        assert_eq!(rows.len(), 9);
        let csv = to_csv(Table::SamplingComparison, &rows, false);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "strategy,repetition,tp,fp,fn,tn,precision,recall,f1,status");
        assert!(lines[3].starts_with("none,mean,"));
        assert!(lines[9].starts_with("smote,mean,"));
        assert!(to_csv(Table::SamplingComparison, &rows, true).lines().next().unwrap().ends_with("runtime_seconds"));
    }
}
