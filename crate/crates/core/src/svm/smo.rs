//! Sequential minimal optimization for the C-SVM dual
//!
//! ```text
//! min  f(a) = 1/2 a'Qa - e'a     s.t.  0 <= a_i <= C,  y'a = 0
//! Q_ij = y_i y_j k(x_i, x_j)
//! ```
//!
//! Working pairs follow Keerthi et al.'s two-threshold view: with
//! `G = Qa - e`, `i` maximizes `-y_t G_t` over the "up" set, and `j` is taken
//! from the "low" set, choosing among the violators the one with the best
//! second-order objective decrease (Fan, Chen and Lin, 2005). The pair is solved
//! analytically and clipped to the box. Optimization stops once
//! `m(a) - M(a) < eps`; with the bias taken inside `[M, m]` every training
//! point then satisfies its KKT condition to within `eps`.

use thiserror::Error;

use crate::data::{Dataset, Label};

use super::cache::KernelRows;
use super::kernel::KernelParams;
use super::model::SvmModel;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Box constraint.
    pub c: f64,
    pub kernel: KernelParams,
    pub kkt_tolerance: f64,
    /// Number of solve/verify rounds; each failed verification halves the
    /// stopping threshold.
    pub max_passes: usize,
    /// Hard cap on pair updates across all passes.
    pub max_iterations: usize,
    /// Recorded for reproducibility; the solver itself draws no random numbers.
    pub seed: u64,
}

impl TrainConfig {
    pub const DEFAULT_C: f64 = 10.0;

    pub fn new(c: f64, kernel: KernelParams) -> Self {
        Self {
            c,
            kernel,
            kkt_tolerance: 1e-3,
            max_passes: 10,
            max_iterations: 10_000_000,
            seed: 0,
        }
    }

    /// `C = 10`, `gamma = 1 / dim`.
    pub fn default_for_dim(dim: usize) -> Self {
        Self::new(Self::DEFAULT_C, KernelParams::for_dim(dim))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(TrainError::InvalidConfig(format!("C must be > 0, got {}", self.c)));
        }
        if self.kkt_tolerance.is_nan() || self.kkt_tolerance <= 0.0 {
            return Err(TrainError::InvalidConfig(format!(
                "KKT tolerance must be > 0, got {}",
                self.kkt_tolerance
            )));
        }
        if self.max_passes == 0 || self.max_iterations == 0 {
            return Err(TrainError::InvalidConfig(
                "max_passes and max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training data is empty")]
    Empty,
    #[error("training data contains a single class")]
    SingleClass,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("SMO stopped after {iterations} iterations with {violations} KKT violations")]
    NotConverged {
        iterations: usize,
        violations: usize,
        best: Box<SvmModel>,
    },
}

/// Solver state and diagnostics returned alongside the model.
#[derive(Debug, Clone)]
pub struct TrainStats {
    /// Dual variable of every training point, in dataset order.
    pub alpha: Vec<f64>,
    /// `sum(a) - 1/2 a'Qa`, the maximized dual objective.
    pub dual_objective: f64,
    pub iterations: usize,
    pub passes: usize,
    pub kkt_violations: usize,
    pub kernel_rows_computed: u64,
}

struct Solver<'a> {
    y: Vec<f64>,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    c: f64,
    rows: KernelRows<'a>,
    /// Indices still being optimized; the rest are shrunk at a bound and
    /// their gradient entries are stale until reconstructed.
    active: Vec<usize>,
    iterations: usize,
}

impl<'a> Solver<'a> {
    fn new(data: &'a Dataset, config: &TrainConfig) -> Self {
        let n = data.len();
        Self {
            y: data.labels().iter().map(|l| l.sign()).collect(),
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            c: config.c,
            rows: KernelRows::new(data, config.kernel.gamma()),
            active: (0..n).collect(),
            iterations: 0,
        }
    }

    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    /// Working pair and the gap `m(a) - M(a)`. `i` is the maximal violator
    /// from the "up" set; `j` is the "low" candidate with the largest
    /// guaranteed decrease of the objective (second-order selection).
    fn select_pair(&mut self) -> Option<(usize, usize, f64)> {
        let mut up = (f64::NEG_INFINITY, usize::MAX);
        for &t in &self.active {
            let v = -self.y[t] * self.grad[t];
            if self.in_up(t) && v > up.0 {
                up = (v, t);
            }
        }
        let (m, i) = up;
        if i == usize::MAX {
            return None;
        }
        let row_i = self.rows.row(i);
        let mut low = f64::INFINITY;
        let mut best = (f64::INFINITY, usize::MAX);
        for &t in &self.active {
            let in_low = if self.y[t] > 0.0 {
                self.alpha[t] > 0.0
            } else {
                self.alpha[t] < self.c
            };
            if !in_low {
                continue;
            }
            let v = -self.y[t] * self.grad[t];
            low = low.min(v);
            let b = m - v;
            if b > 0.0 {
                let a = (2.0 - 2.0 * row_i[t]).max(TAU);
                let gain = -b * b / a;
                if gain < best.0 {
                    best = (gain, t);
                }
            }
        }
        if low == f64::INFINITY {
            return None;
        }
        let j = if best.1 == usize::MAX { i } else { best.1 };
        Some((i, j, m - low))
    }

    fn step(&mut self, i: usize, j: usize) {
        let c = self.c;
        let (yi, yj) = (self.y[i], self.y[j]);
        let k_ij = self.rows.row(i)[j];
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);

        // k(x, x) = 1 for the Gaussian kernel
        let quad = (2.0 - 2.0 * k_ij).max(TAU);
        if yi != yj {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;

        let (di, dj) = (ai - old_i, aj - old_j);
        if di != 0.0 {
            let row = self.rows.row(i);
            for &t in &self.active {
                self.grad[t] += self.y[t] * yi * row[t] * di;
            }
        }
        if dj != 0.0 {
            let row = self.rows.row(j);
            for &t in &self.active {
                self.grad[t] += self.y[t] * yj * row[t] * dj;
            }
        }
        self.iterations += 1;
    }

    /// Runs pair updates until the gap drops below `eps` or the budget is
    /// spent. Returns whether the gap criterion was met; on return every
    /// variable is active and the gradient is exact.
    fn optimize(&mut self, eps: f64, max_iterations: usize) -> bool {
        let n = self.y.len();
        let interval = n.min(1000);
        let mut countdown = interval;
        let mut unshrunk = false;
        let done = loop {
            if self.iterations >= max_iterations {
                break false;
            }
            countdown -= 1;
            if countdown == 0 {
                countdown = interval;
                self.shrink(eps, &mut unshrunk);
            }
            match self.select_pair() {
                Some((i, j, gap)) if gap >= eps => self.step(i, j),
                _ if self.active.len() < n => {
                    // optimal on the active set only; re-check on all of it
                    self.unshrink();
                    match self.select_pair() {
                        Some((i, j, gap)) if gap >= eps => {
                            self.step(i, j);
                            countdown = 1;
                        }
                        _ => break true,
                    }
                }
                _ => break true,
            }
        };
        if self.active.len() < n {
            self.unshrink();
        }
        done
    }

    /// `max(-y_t G_t)` over the active "up" set and `max(y_t G_t)` over the
    /// active "low" set.
    fn thresholds(&self) -> (f64, f64) {
        let (mut up, mut low) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &t in &self.active {
            let yg = self.y[t] * self.grad[t];
            let (a, pos) = (self.alpha[t], self.y[t] > 0.0);
            if (pos && a < self.c) || (!pos && a > 0.0) {
                up = up.max(-yg);
            }
            if (pos && a > 0.0) || (!pos && a < self.c) {
                low = low.max(yg);
            }
        }
        (up, low)
    }

    /// Drops bound variables that cannot re-enter the working set under the
    /// current thresholds. Close to convergence the full problem is restored
    /// once, so that early shrinking decisions get re-examined.
    fn shrink(&mut self, eps: f64, unshrunk: &mut bool) {
        let (up, low) = self.thresholds();
        if !*unshrunk && up + low <= 10.0 * eps {
            *unshrunk = true;
            self.unshrink();
        }
        let (y, alpha, grad, c) = (&self.y, &self.alpha, &self.grad, self.c);
        self.active.retain(|&t| {
            let yg = y[t] * grad[t];
            let pos = y[t] > 0.0;
            // a bound variable outside the "up" set can only be picked as
            // `j`, which needs `-y G < up`; one outside "low" only as `i`
            let at_upper = alpha[t] >= c;
            let at_lower = alpha[t] <= 0.0;
            let stuck = if (at_upper && pos) || (at_lower && !pos) {
                -yg > up
            } else if (at_upper && !pos) || (at_lower && pos) {
                yg > low
            } else {
                false
            };
            !stuck
        });
    }

    /// Recomputes the gradient of shrunk variables and reactivates them.
    fn unshrink(&mut self) {
        let n = self.y.len();
        let mut is_active = vec![false; n];
        for &t in &self.active {
            is_active[t] = true;
        }
        let stale: Vec<usize> = (0..n).filter(|&t| !is_active[t]).collect();
        if !stale.is_empty() {
            for &t in &stale {
                self.grad[t] = -1.0;
            }
            for j in 0..n {
                let a = self.alpha[j];
                if a > 0.0 {
                    let coef = a * self.y[j];
                    let row = self.rows.row(j);
                    for &t in &stale {
                        self.grad[t] += self.y[t] * coef * row[t];
                    }
                }
            }
        }
        self.active = (0..n).collect();
    }

    /// `rho` of the decision function `sum(a_i y_i k(x_i, x)) - rho`: the mean
    /// of `y_t G_t` over free vectors, or the midpoint of the feasible
    /// interval when every vector sits at a bound.
    fn rho(&self) -> f64 {
        let mut ub = f64::INFINITY;
        let mut lb = f64::NEG_INFINITY;
        let mut free_sum = 0.0;
        let mut free = 0usize;
        for t in 0..self.y.len() {
            let yg = self.y[t] * self.grad[t];
            let (a, y) = (self.alpha[t], self.y[t]);
            if a >= self.c {
                if y < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if a <= 0.0 {
                if y > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                free_sum += yg;
            }
        }
        if free > 0 {
            free_sum / free as f64
        } else {
            (ub + lb) / 2.0
        }
    }

    /// Points whose margin `y_t f(x_t)` breaks its KKT condition by more
    /// than `tol`, given the bias `-rho`.
    fn kkt_violations(&self, rho: f64, tol: f64) -> usize {
        (0..self.y.len())
            .filter(|&t| {
                // y f(x) - 1 = G_t - y_t rho
                let slack = self.grad[t] - self.y[t] * rho;
                let a = self.alpha[t];
                if a <= 0.0 {
                    slack < -tol
                } else if a >= self.c {
                    slack > tol
                } else {
                    slack.abs() > tol
                }
            })
            .count()
    }

    fn dual_objective(&self) -> f64 {
        // a'Qa = a'(G + e)
        let quad: f64 = self
            .alpha
            .iter()
            .zip(&self.grad)
            .map(|(a, g)| a * (g + 1.0))
            .sum();
        self.alpha.iter().sum::<f64>() - 0.5 * quad
    }
}

/// Trains on a dataset whose features are already projected and scaled.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<SvmModel, TrainError> {
    train_with_stats(dataset, config).map(|(model, _)| model)
}

pub fn train_with_stats(
    dataset: &Dataset,
    config: &TrainConfig,
) -> Result<(SvmModel, TrainStats), TrainError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(TrainError::Empty);
    }
    let positives = dataset.class_count(Label::Galloping);
    if positives == 0 || positives == dataset.len() {
        return Err(TrainError::SingleClass);
    }

    let mut solver = Solver::new(dataset, config);
    let tol = config.kkt_tolerance;
    let mut eps = tol;
    let mut passes = 0;
    let mut converged = false;
    let mut violations = usize::MAX;
    let mut rho = 0.0;
    while passes < config.max_passes {
        passes += 1;
        let reached = solver.optimize(eps, config.max_iterations);
        rho = solver.rho();
        violations = solver.kkt_violations(rho, tol);
        if violations == 0 {
            converged = true;
            break;
        }
        if !reached {
            break;
        }
        eps /= 2.0;
    }

    let model = SvmModel::from_solution(dataset, &solver.alpha, -rho, config)
        .map_err(|e| TrainError::InvalidConfig(e.to_string()))?;
    if !converged {
        return Err(TrainError::NotConverged {
            iterations: solver.iterations,
            violations,
            best: Box::new(model),
        });
    }
    let stats = TrainStats {
        dual_objective: solver.dual_objective(),
        iterations: solver.iterations,
        passes,
        kkt_violations: violations,
        kernel_rows_computed: solver.rows.computed,
        alpha: solver.alpha,
    };
    Ok((model, stats))
}
