//! Gaussian-kernel support vector machine.

mod cache;
mod kernel;
mod model;
mod smo;

pub use kernel::{gaussian_kernel, KernelParams};
pub use model::{load_model, save_model, SvmModel};
pub use smo::{train, train_with_stats, TrainConfig, TrainError, TrainStats};

use crate::data::{self, Dataset, SplitSpec};
use crate::error::Result;
use crate::metrics;

pub const GRID_C: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

/// Candidate gammas; `None` stands for `1 / dim`.
pub const GRID_GAMMA: [Option<f64>; 4] = [Some(0.01), Some(0.1), None, Some(1.0)];

/// Outcome of one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub c: f64,
    pub gamma: f64,
    pub f1: Option<f64>,
}

/// Picks `C` and `gamma` by F1 on an inner 25% validation split of the
/// (already projected and scaled) training data, then refits on all of it.
///
/// Cells whose F1 is undefined or whose training fails rank last; ties keep
/// the earlier cell in `GRID_C` x `GRID_GAMMA` order.
pub fn grid_search(
    dataset: &Dataset,
    base: &TrainConfig,
) -> Result<(SvmModel, TrainConfig, Vec<GridPoint>)> {
    let spec = SplitSpec::with_seed(base.seed).stratified(true);
    let (inner_train, validation) = data::train_test_split(dataset, &spec)?;
    let mut points = Vec::new();
    let mut best: Option<(f64, TrainConfig)> = None;
    for &c in &GRID_C {
        for g in GRID_GAMMA {
            let kernel = match g {
                Some(g) => KernelParams::new(g)?,
                None => KernelParams::for_dim(dataset.dim()),
            };
            let config = TrainConfig {
                c,
                kernel,
                ..base.clone()
            };
            let f1 = match train(&inner_train, &config) {
                Ok(model) => metrics::evaluate(&model, &validation)?.f1,
                Err(e) => {
                    log::warn!("grid cell C={c} gamma={}: {e}", kernel.gamma());
                    None
                }
            };
            points.push(GridPoint {
                c,
                gamma: kernel.gamma(),
                f1,
            });
            let score = f1.unwrap_or(f64::NEG_INFINITY);
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, config));
            }
        }
    }
    let (_, config) = best.expect("grid is non-empty");
    let model = train(dataset, &config)?;
    Ok((model, config, points))
}
