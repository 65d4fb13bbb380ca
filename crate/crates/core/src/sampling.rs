//! Class balancing by random under-sampling of the majority class or SMOTE
//! over-sampling of the minority class.
//!
//! The minority class is whichever label is rarer. `target_ratio` is the
//! desired minority:majority count ratio after adjustment.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplingKind {
    None,
    UnderSample,
    Smote,
}

impl SamplingKind {
    pub const ALL: [SamplingKind; 3] = [SamplingKind::None, SamplingKind::UnderSample, SamplingKind::Smote];

    pub fn name(self) -> &'static str {
        match self {
            SamplingKind::None => "none",
            SamplingKind::UnderSample => "under",
            SamplingKind::Smote => "smote",
        }
    }
}

impl fmt::Display for SamplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown sampling kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingStrategy {
    pub kind: SamplingKind,
    pub k_neighbors: usize,
    pub target_ratio: f64,
    pub seed: u64,
}

impl SamplingStrategy {
    pub const DEFAULT_K: usize = 5;

    pub fn new(kind: SamplingKind, seed: u64) -> Self {
        Self {
            kind,
            k_neighbors: Self::DEFAULT_K,
            target_ratio: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::InvalidParameter("k_neighbors must be >= 1".into()));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "target ratio must be > 0, got {}",
                self.target_ratio
            )));
        }
        Ok(())
    }
}

/// Minority and majority labels with their counts. Ties name galloping the
/// minority.
fn classes(dataset: &Dataset) -> Result<((Label, usize), (Label, usize))> {
    let g = dataset.class_count(Label::Galloping);
    let n = dataset.len() - g;
    if g == 0 || n == 0 {
        return Err(Error::SingleClass);
    }
    Ok(if g <= n {
        ((Label::Galloping, g), (Label::Normal, n))
    } else {
        ((Label::Normal, n), (Label::Galloping, g))
    })
}

/// Drops majority samples uniformly at random until
/// `minority / majority = target_ratio` (to the nearest sample). Survivors
/// keep their original order.
pub fn undersample(dataset: &Dataset, strategy: &SamplingStrategy) -> Result<Dataset> {
    strategy.validate()?;
    let ((_, minority), (major_label, majority)) = classes(dataset)?;
    let keep = (minority as f64 / strategy.target_ratio).round() as usize;
    if keep >= majority {
        log::info!(
            "under-sampling: {minority}/{majority} already meets ratio {}, nothing dropped",
            strategy.target_ratio
        );
        return Ok(dataset.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(strategy.seed);
    let major_idx = dataset.indices_of(major_label);
    let mut retained = vec![true; dataset.len()];
    for &i in &major_idx {
        retained[i] = false;
    }
    for k in index::sample(&mut rng, majority, keep) {
        retained[major_idx[k]] = true;
    }
    let indices: Vec<usize> = (0..dataset.len()).filter(|&i| retained[i]).collect();
    Ok(dataset.select(&indices))
}

/// Where a synthetic sample came from; indices refer to the input dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub parent: usize,
    pub neighbor: usize,
    pub t: f64,
}

/// `x + t (neighbor - x)`.
pub fn interpolate(x: &[f64], neighbor: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(neighbor).map(|(a, b)| a + t * (b - a)).collect()
}

/// The `k` nearest members of `pool` (dataset indices) for each member of
/// `pool`, itself excluded, by Euclidean distance. Equal distances go to the
/// lower dataset index. Exact O(n^2) scan.
pub fn nearest_neighbors(dataset: &Dataset, pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(pool.len());
    pool.iter()
        .map(|&i| {
            let x = dataset.row(i);
            scratch.clear();
            scratch.extend(pool.iter().filter(|&&j| j != i).map(|&j| {
                let d2: f64 = x.iter().zip(dataset.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, j)
            }));
            let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            let k = k.min(scratch.len());
            if k < scratch.len() {
                scratch.select_nth_unstable_by(k, by_distance);
            }
            scratch[..k].sort_unstable_by(by_distance);
            scratch[..k].iter().map(|&(_, j)| j).collect()
        })
        .collect()
}

/// SMOTE with the origin of every synthetic sample.
///
/// `round(target_ratio * majority) - minority` synthetic minority samples are
/// appended after the originals. Every minority sample serves as parent
/// `floor(need / minority)` times; parents for the remainder are drawn
/// without replacement.
pub fn smote_with_origins(
    dataset: &Dataset,
    strategy: &SamplingStrategy,
) -> Result<(Dataset, Vec<SyntheticOrigin>)> {
    strategy.validate()?;
    let ((minor_label, minority), (_, majority)) = classes(dataset)?;
    let k = strategy.k_neighbors;
    if minority <= k {
        return Err(Error::TooFewSamples {
            have: minority,
            need: k + 1,
        });
    }
    let target = (strategy.target_ratio * majority as f64).round() as usize;
    if target <= minority {
        log::info!(
            "SMOTE: {minority}/{majority} already meets ratio {}, nothing added",
            strategy.target_ratio
        );
        return Ok((dataset.clone(), Vec::new()));
    }
    let need = target - minority;
    let mut rng = ChaCha8Rng::seed_from_u64(strategy.seed);
    let pool = dataset.indices_of(minor_label);
    let neighbors = nearest_neighbors(dataset, &pool, k);

    let mut parents: Vec<usize> = Vec::with_capacity(need);
    for _ in 0..need / minority {
        parents.extend(0..minority);
    }
    parents.extend(index::sample(&mut rng, minority, need % minority));

    let mut out = dataset.clone();
    let mut origins = Vec::with_capacity(need);
    for p in parents {
        let nb = neighbors[p][rng.random_range(0..k)];
        let t: f64 = rng.random();
        let x = interpolate(dataset.row(pool[p]), dataset.row(nb), t);
        out.push(&x, minor_label)?;
        origins.push(SyntheticOrigin {
            parent: pool[p],
            neighbor: nb,
            t,
        });
    }
    Ok((out, origins))
}

pub fn smote(dataset: &Dataset, strategy: &SamplingStrategy) -> Result<Dataset> {
    smote_with_origins(dataset, strategy).map(|(d, _)| d)
}

pub fn apply(dataset: &Dataset, strategy: &SamplingStrategy) -> Result<Dataset> {
    strategy.validate()?;
    match strategy.kind {
        SamplingKind::None => Ok(dataset.clone()),
        SamplingKind::UnderSample => undersample(dataset, strategy),
        SamplingKind::Smote => smote(dataset, strategy),
    }
}
