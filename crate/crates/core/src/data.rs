//! Sample and dataset model, CSV interchange, splitting, standardization and
//! feature projection.
//!
//! A [`Dataset`] stores its rows in a flat row-major buffer together with the
//! list of active feature columns. A freshly loaded dataset carries all seven
//! features in canonical order; [`project`] narrows it to a [`FeatureMask`].

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const NUM_FEATURES: usize = 7;

/// Canonical CSV header.
pub const CSV_HEADER: &str =
    "wind_speed,humidity,temperature,precipitation,ice_thickness,vertical_wind_speed,amplitude,label";

/// One of the seven usable weather/line features. The discriminant is the
/// ordinal used in masks and in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureId {
    WindSpeed = 0,
    Humidity = 1,
    Temperature = 2,
    Precipitation = 3,
    IceThickness = 4,
    VerticalWindSpeed = 5,
    Amplitude = 6,
}

impl FeatureId {
    pub const ALL: [FeatureId; NUM_FEATURES] = [
        FeatureId::WindSpeed,
        FeatureId::Humidity,
        FeatureId::Temperature,
        FeatureId::Precipitation,
        FeatureId::IceThickness,
        FeatureId::VerticalWindSpeed,
        FeatureId::Amplitude,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(ordinal: usize) -> Option<Self> {
        Self::ALL.get(ordinal).copied()
    }

    /// Column name used in CSV headers and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            FeatureId::WindSpeed => "wind_speed",
            FeatureId::Humidity => "humidity",
            FeatureId::Temperature => "temperature",
            FeatureId::Precipitation => "precipitation",
            FeatureId::IceThickness => "ice_thickness",
            FeatureId::VerticalWindSpeed => "vertical_wind_speed",
            FeatureId::Amplitude => "amplitude",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            FeatureId::WindSpeed | FeatureId::VerticalWindSpeed => "m/s",
            FeatureId::Humidity => "%",
            FeatureId::Temperature => "degC",
            FeatureId::Precipitation | FeatureId::IceThickness => "mm",
            FeatureId::Amplitude => "m",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Binary class label: +1 galloping, -1 normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Galloping,
    Normal,
}

impl Label {
    pub fn value(self) -> i8 {
        match self {
            Label::Galloping => 1,
            Label::Normal => -1,
        }
    }

    pub fn sign(self) -> f64 {
        f64::from(self.value())
    }

    pub fn from_value(value: i64) -> Option<Self> {
        match value {
            1 => Some(Label::Galloping),
            -1 => Some(Label::Normal),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Galloping => Label::Normal,
            Label::Normal => Label::Galloping,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        trimmed
            .parse::<i64>()
            .ok()
            .and_then(Label::from_value)
            .ok_or_else(|| Error::InvalidLabel {
                value: trimmed.to_string(),
            })
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// One observation with all seven features.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherSample {
    pub features: [f64; NUM_FEATURES],
    pub label: Label,
}

impl WeatherSample {
    pub fn new(features: [f64; NUM_FEATURES], label: Label) -> Result<Self> {
        if let Some(k) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "feature {} is not finite",
                FeatureId::ALL[k]
            )));
        }
        Ok(Self { features, label })
    }

    pub fn get(&self, feature: FeatureId) -> f64 {
        self.features[feature.ordinal()]
    }
}

/// Nonempty subset of the seven features, bit `k` selecting ordinal `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureMask(u8);

impl FeatureMask {
    pub const MAX: u8 = (1 << NUM_FEATURES) - 1;

    pub fn new(bits: u8) -> Result<Self> {
        if bits == 0 || bits > Self::MAX {
            return Err(Error::InvalidParameter(format!(
                "feature mask {bits} outside 1..={}",
                Self::MAX
            )));
        }
        Ok(Self(bits))
    }

    pub fn all() -> Self {
        Self(Self::MAX)
    }

    /// Wind speed, temperature and precipitation.
    pub fn trio() -> Self {
        Self::from_features(&[
            FeatureId::WindSpeed,
            FeatureId::Temperature,
            FeatureId::Precipitation,
        ])
        .expect("nonempty")
    }

    pub fn from_features(features: &[FeatureId]) -> Result<Self> {
        let bits = features.iter().fold(0u8, |acc, f| acc | 1 << f.ordinal());
        Self::new(bits)
    }

    /// Parses a comma-separated list of feature names.
    pub fn parse_names(text: &str) -> Result<Self> {
        let features = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| {
                FeatureId::from_name(name)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown feature `{name}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_features(&features)
    }

    /// Every valid mask, in increasing order.
    pub fn every() -> impl Iterator<Item = FeatureMask> {
        (1..=Self::MAX).map(FeatureMask)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, feature: FeatureId) -> bool {
        self.0 & (1 << feature.ordinal()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    /// Selected features in ordinal order.
    pub fn features(self) -> Vec<FeatureId> {
        FeatureId::ALL
            .into_iter()
            .filter(|f| self.contains(*f))
            .collect()
    }

    pub fn names(self) -> String {
        self.features()
            .iter()
            .map(|f| f.name())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names())
    }
}

/// Train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    /// Split each class separately so both parts keep the class ratio.
    pub stratified: bool,
}

impl SplitSpec {
    pub const DEFAULT_TEST_FRACTION: f64 = 0.25;

    pub fn new(test_fraction: f64, seed: u64) -> Result<Self> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "test fraction {test_fraction} outside (0, 1)"
            )));
        }
        Ok(Self {
            test_fraction,
            seed,
            stratified: false,
        })
    }

    pub fn with_seed(seed: u64) -> Self {
        Self {
            test_fraction: Self::DEFAULT_TEST_FRACTION,
            seed,
            stratified: false,
        }
    }

    pub fn stratified(mut self, on: bool) -> Self {
        self.stratified = on;
        self
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self::with_seed(0)
    }
}

/// Per-column affine transform `(x - mean) / std_dev` (population convention).
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
}

impl Standardization {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn apply_in_place(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.means).zip(&self.std_devs) {
            *v = (*v - m) / s;
        }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        let mut out = row.to_vec();
        self.apply_in_place(&mut out);
        out
    }

    fn select(&self, positions: &[usize]) -> Self {
        Self {
            means: positions.iter().map(|&p| self.means[p]).collect(),
            std_devs: positions.iter().map(|&p| self.std_devs[p]).collect(),
        }
    }
}

/// Ordered labeled samples over a list of feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<FeatureId>,
    values: Vec<f64>,
    labels: Vec<Label>,
    standardization: Option<Standardization>,
}

impl Dataset {
    /// Empty dataset over all seven features.
    pub fn new() -> Self {
        Self::with_columns(FeatureId::ALL.to_vec())
    }

    pub fn with_columns(columns: Vec<FeatureId>) -> Self {
        Self {
            columns,
            values: Vec::new(),
            labels: Vec::new(),
            standardization: None,
        }
    }

    pub fn from_samples(samples: impl IntoIterator<Item = WeatherSample>) -> Self {
        let mut ds = Self::new();
        for s in samples {
            ds.values.extend_from_slice(&s.features);
            ds.labels.push(s.label);
        }
        ds
    }

    /// Builds a dataset from raw rows; every row must match `columns` in length
    /// and contain only finite values.
    pub fn from_rows(columns: Vec<FeatureId>, rows: &[Vec<f64>], labels: &[Label]) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: labels.len(),
            });
        }
        let mut ds = Self::with_columns(columns);
        for (row, &label) in rows.iter().zip(labels) {
            ds.push(row, label)?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, row: &[f64], label: Label) -> Result<()> {
        if row.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite feature value".into()));
        }
        self.values.extend_from_slice(row);
        self.labels.push(label);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[FeatureId] {
        &self.columns
    }

    pub fn mask(&self) -> Result<FeatureMask> {
        FeatureMask::from_features(&self.columns)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn column(&self, position: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[position])
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    pub fn class_count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Indices of samples carrying `label`, in order.
    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    /// Full seven-feature sample at `i`; `None` if the dataset was projected.
    pub fn sample(&self, i: usize) -> Option<WeatherSample> {
        if self.columns != FeatureId::ALL {
            return None;
        }
        let mut features = [0.0; NUM_FEATURES];
        features.copy_from_slice(self.row(i));
        Some(WeatherSample {
            features,
            label: self.labels[i],
        })
    }

    /// New dataset holding the samples at `indices` in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut out = Dataset {
            columns: self.columns.clone(),
            values: Vec::with_capacity(indices.len() * self.dim()),
            labels: Vec::with_capacity(indices.len()),
            standardization: self.standardization.clone(),
        };
        for &i in indices {
            out.values.extend_from_slice(self.row(i));
            out.labels.push(self.labels[i]);
        }
        out
    }

    /// Appends all samples of `other`, which must share columns and scaling.
    pub fn extend_from(&mut self, other: &Dataset) -> Result<()> {
        if other.columns != self.columns || other.standardization != self.standardization {
            return Err(Error::InvalidParameter(
                "cannot concatenate datasets with different columns or scaling".into(),
            ));
        }
        self.values.extend_from_slice(&other.values);
        self.labels.extend_from_slice(&other.labels);
        Ok(())
    }
}

impl Default for Dataset {
    fn default() -> Self {
        Self::new()
    }
}

fn parse_err(path: &Path, row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message: message.into(),
    }
}

/// Reads a dataset in the canonical CSV format. Rows are numbered by file
/// line (the header is line 1); columns are 1-based.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();

    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(path, e))?,
        None => {
            return Err(Error::HeaderMismatch {
                path: path.to_path_buf(),
                column: 1,
                expected: "wind_speed".into(),
                found: String::new(),
            })
        }
    };
    let expected: Vec<&str> = CSV_HEADER.split(',').collect();
    let found: Vec<&str> = header.trim_end_matches('\r').split(',').map(str::trim).collect();
    for k in 0..expected.len().max(found.len()) {
        let e = expected.get(k).copied().unwrap_or("");
        let f = found.get(k).copied().unwrap_or("");
        if e != f {
            return Err(Error::HeaderMismatch {
                path: path.to_path_buf(),
                column: k + 1,
                expected: e.into(),
                found: f.into(),
            });
        }
    }

    let mut ds = Dataset::new();
    for (offset, line) in lines.enumerate() {
        let row = offset + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != NUM_FEATURES + 1 {
            return Err(parse_err(
                path,
                row,
                cells.len().min(NUM_FEATURES + 1),
                format!("expected {} cells, found {}", NUM_FEATURES + 1, cells.len()),
            ));
        }
        let mut features = [0.0; NUM_FEATURES];
        for (k, cell) in cells[..NUM_FEATURES].iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(path, row, k + 1, format!("non-numeric value `{cell}`")))?;
            if !v.is_finite() {
                return Err(parse_err(path, row, k + 1, format!("non-finite value `{cell}`")));
            }
            features[k] = v;
        }
        let label = Label::parse(cells[NUM_FEATURES]).map_err(|e| {
            parse_err(path, row, NUM_FEATURES + 1, e.to_string())
        })?;
        ds.values.extend_from_slice(&features);
        ds.labels.push(label);
    }
    Ok(ds)
}

/// Writes a seven-feature dataset in the canonical CSV format. Values use the
/// shortest representation that parses back to the identical `f64`.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if dataset.columns != FeatureId::ALL {
        return Err(Error::InvalidParameter(
            "only datasets with all seven feature columns can be written as CSV".into(),
        ));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{CSV_HEADER}").map_err(io)?;
    for (row, label) in dataset.rows().zip(&dataset.labels) {
        for v in row {
            write!(out, "{v},").map_err(io)?;
        }
        writeln!(out, "{label}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Random train/test partition with `|test| = round(test_fraction * n)`.
/// Both parts keep the original sample order.
pub fn train_test_split(dataset: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let n = dataset.len();
    let (train_idx, test_idx) = split_indices(dataset, spec)?;
    debug_assert_eq!(train_idx.len() + test_idx.len(), n);
    Ok((dataset.select(&train_idx), dataset.select(&test_idx)))
}

/// Index form of [`train_test_split`].
pub fn split_indices(dataset: &Dataset, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = dataset.len();
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction {} outside (0, 1)",
            spec.test_fraction
        )));
    }
    let n_test = (spec.test_fraction * n as f64).round() as usize;
    if n < 2 || n_test == 0 || n_test >= n {
        return Err(Error::TooFewSamples { have: n, need: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut is_test = vec![false; n];
    if spec.stratified {
        for label in [Label::Galloping, Label::Normal] {
            let mut idx = dataset.indices_of(label);
            let k = (spec.test_fraction * idx.len() as f64).round() as usize;
            idx.shuffle(&mut rng);
            for &i in &idx[..k] {
                is_test[i] = true;
            }
        }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..n_test] {
            is_test[i] = true;
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| is_test[i]);
    if test.is_empty() || train.is_empty() {
        return Err(Error::TooFewSamples { have: n, need: 2 });
    }
    Ok((train, test))
}

/// Population mean and standard deviation of each column.
pub fn fit_standardization(dataset: &Dataset) -> Result<Standardization> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = dataset.len() as f64;
    let mut means = Vec::with_capacity(dataset.dim());
    let mut std_devs = Vec::with_capacity(dataset.dim());
    for (k, &feature) in dataset.columns.iter().enumerate() {
        let mean = dataset.column(k).sum::<f64>() / n;
        let var = dataset.column(k).map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        if sd.is_nan() || sd <= 1e-12 * (1.0 + mean.abs()) {
            return Err(Error::ZeroVariance {
                feature: feature.name(),
            });
        }
        means.push(mean);
        std_devs.push(sd);
    }
    Ok(Standardization { means, std_devs })
}

/// Applies a previously fitted transform (for example one fitted on a
/// training split) to an unscaled dataset.
pub fn apply_standardization(dataset: &Dataset, params: &Standardization) -> Result<Dataset> {
    if dataset.standardization.is_some() {
        return Err(Error::InvalidParameter("dataset is already standardized".into()));
    }
    if params.len() != dataset.dim() {
        return Err(Error::DimensionMismatch {
            expected: dataset.dim(),
            got: params.len(),
        });
    }
    let mut out = dataset.clone();
    for chunk in out.values.chunks_mut(dataset.dim().max(1)) {
        params.apply_in_place(chunk);
    }
    out.standardization = Some(params.clone());
    Ok(out)
}

/// Z-scores every column and records the transform on the result.
pub fn standardize(dataset: &Dataset) -> Result<Dataset> {
    if dataset.standardization.is_some() {
        return Err(Error::InvalidParameter("dataset is already standardized".into()));
    }
    let params = fit_standardization(dataset)?;
    apply_standardization(dataset, &params)
}

/// Keeps only the masked features; labels and order are unchanged.
pub fn project(dataset: &Dataset, mask: FeatureMask) -> Result<Dataset> {
    let wanted = mask.features();
    let positions = wanted
        .iter()
        .map(|f| {
            dataset.columns.iter().position(|c| c == f).ok_or_else(|| {
                Error::InvalidParameter(format!("dataset has no `{f}` column"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(dataset.len() * positions.len());
    for row in dataset.rows() {
        values.extend(positions.iter().map(|&p| row[p]));
    }
    Ok(Dataset {
        columns: wanted,
        values,
        labels: dataset.labels.clone(),
        standardization: dataset.standardization.as_ref().map(|s| s.select(&positions)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset {
        let samples = (0..n).map(|i| {
            let x = i as f64;
            let label = if i % 3 == 0 { Label::Galloping } else { Label::Normal };
            WeatherSample::new([x, 50.0 + x, -x, 0.5 * x, 0.1 * x, x.sin(), x * x], label).unwrap()
        });
        Dataset::from_samples(samples)
    }

    #[test]
    fn feature_ordinals_are_fixed() {
        for (k, f) in FeatureId::ALL.iter().enumerate() {
            assert_eq!(f.ordinal(), k);
            assert_eq!(FeatureId::from_name(f.name()), Some(*f));
        }
        let names: Vec<_> = FeatureId::ALL.iter().map(|f| f.name()).collect();
        assert_eq!(format!("{},label", names.join(",")), CSV_HEADER);
    }

    #[test]
    fn mask_bounds() {
        assert!(FeatureMask::new(0).is_err());
        assert!(FeatureMask::new(128).is_err());
        assert_eq!(FeatureMask::every().count(), 127);
        assert_eq!(FeatureMask::trio().bits(), 0b1101);
        assert_eq!(
            FeatureMask::parse_names("wind_speed,temperature,precipitation").unwrap(),
            FeatureMask::trio()
        );
        assert!(FeatureMask::parse_names("wind_line_angle").is_err());
        assert!(FeatureMask::parse_names("").is_err());
    }

    #[test]
    fn label_domain() {
        assert_eq!(Label::parse("1").unwrap(), Label::Galloping);
        assert_eq!(Label::parse("-1").unwrap(), Label::Normal);
        assert!(Label::parse("0").is_err());
        assert!(Label::parse("yes").is_err());
    }

    #[test]
    fn split_sizes() {
        let ds = toy(100);
        let (train, test) = train_test_split(&ds, &SplitSpec::new(0.25, 7).unwrap()).unwrap();
        assert_eq!((train.len(), test.len()), (75, 25));

        let (train, test) = train_test_split(&toy(4), &SplitSpec::new(0.25, 1).unwrap()).unwrap();
        assert_eq!((train.len(), test.len()), (3, 1));
    }

    #[test]
    fn split_is_deterministic() {
        let ds = toy(100);
        let spec = SplitSpec::new(0.25, 7).unwrap();
        assert_eq!(split_indices(&ds, &spec).unwrap(), split_indices(&ds, &spec).unwrap());
    }

    #[test]
    fn split_too_small() {
        assert!(matches!(
            train_test_split(&toy(1), &SplitSpec::default()),
            Err(Error::TooFewSamples { .. })
        ));
        // round(0.25 * 2) = 1 test, 1 train: fine
        assert!(train_test_split(&toy(2), &SplitSpec::default()).is_ok());
        // round(0.1 * 3) = 0 test samples
        assert!(train_test_split(&toy(3), &SplitSpec::new(0.1, 0).unwrap()).is_err());
    }

    #[test]
    fn stratified_split_keeps_class_ratio() {
        let ds = toy(120); // 40 galloping, 80 normal
        let spec = SplitSpec::new(0.25, 3).unwrap().stratified(true);
        let (_, test) = train_test_split(&ds, &spec).unwrap();
        assert_eq!(test.class_count(Label::Galloping), 10);
        assert_eq!(test.class_count(Label::Normal), 20);
    }

    #[test]
    fn standardize_symmetric_pair() {
        let cols = vec![FeatureId::WindSpeed];
        let ds = Dataset::from_rows(cols.clone(), &[vec![-1.0], vec![1.0]], &[Label::Normal, Label::Galloping]).unwrap();
        let z = standardize(&ds).unwrap();
        assert_eq!(z.row(0), &[-1.0]);
        assert_eq!(z.row(1), &[1.0]);

        let ds = Dataset::from_rows(cols, &[vec![0.0], vec![10.0]], &[Label::Normal, Label::Galloping]).unwrap();
        let z = standardize(&ds).unwrap();
        assert_eq!(z.standardization().unwrap().means, vec![5.0]);
        assert_eq!(z.row(0)[0], -z.row(1)[0]);
    }

    #[test]
    fn standardize_constant_column_names_feature() {
        let mut ds = toy(10);
        for i in 0..ds.len() {
            ds.values[i * NUM_FEATURES + 2] = 3.0;
        }
        match standardize(&ds) {
            Err(Error::ZeroVariance { feature }) => assert_eq!(feature, "temperature"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn standardize_moments() {
        let z = standardize(&toy(57)).unwrap();
        for k in 0..z.dim() {
            let n = z.len() as f64;
            let mean = z.column(k).sum::<f64>() / n;
            let sd = (z.column(k).map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            assert!(mean.abs() < 1e-9);
            assert!((sd - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_shapes() {
        let ds = toy(10);
        assert_eq!(project(&ds, FeatureMask::all()).unwrap(), ds);
        let wind = project(&ds, FeatureMask::from_features(&[FeatureId::WindSpeed]).unwrap()).unwrap();
        assert_eq!(wind.dim(), 1);
        let trio = project(&ds, FeatureMask::trio()).unwrap();
        assert_eq!(trio.dim(), 3);
        assert_eq!(trio.row(4), &[4.0, -4.0, 2.0]);
        assert_eq!(trio.labels(), ds.labels());
        // projecting a projection onto a missing column fails
        assert!(project(&wind, FeatureMask::trio()).is_err());
    }

    #[test]
    fn projection_carries_standardization() {
        let z = standardize(&toy(20)).unwrap();
        let p = project(&z, FeatureMask::trio()).unwrap();
        let s = p.standardization().unwrap();
        let full = z.standardization().unwrap();
        assert_eq!(s.means, vec![full.means[0], full.means[2], full.means[3]]);
    }
}
