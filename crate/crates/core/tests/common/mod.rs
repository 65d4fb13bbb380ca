//! Reference implementations shared by the integration tests. Nothing here
//! calls into the solver under test.

#![allow(dead_code)]

use galloping::data::{Dataset, FeatureId, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn gram(xs: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    xs.iter()
        .map(|a| {
            xs.iter()
                .map(|b| {
                    let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum();
                    (-gamma * d2).exp()
                })
                .collect()
        })
        .collect()
}

/// `sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij`
pub fn dual_objective(alpha: &[f64], y: &[f64], k: &[Vec<f64>]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{0 <= a <= c, y'a = 0}`: `a = clip(v - lambda y)`
/// with `lambda` found by bisection (`y'a` is non-increasing in `lambda`).
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> {
        v.iter().zip(y).map(|(vi, yi)| (vi - lambda * yi).clamp(0.0, c)).collect()
    };
    let h = |lambda: f64| -> f64 { at(lambda).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    let span = v.iter().map(|x| x.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient ascent on the dual. Returns the best
/// objective value seen.
pub fn pgd_dual_optimum(y: &[f64], k: &[Vec<f64>], c: f64, iterations: usize) -> f64 {
    let n = y.len();
    // largest eigenvalue of Q is at most its largest absolute row sum
    let lipschitz = k
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let step = 1.0 / lipschitz;
    let grad = |a: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| 1.0 - y[i] * (0..n).map(|j| a[j] * y[j] * k[i][j]).sum::<f64>())
            .collect()
    };
    let mut x = vec![0.0; n];
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut best = 0.0f64;
    for _ in 0..iterations {
        let g = grad(&z);
        let v: Vec<f64> = z.iter().zip(&g).map(|(a, gi)| a + step * gi).collect();
        let next = project(&v, y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        x = next;
        t = t_next;
        best = best.max(dual_objective(&x, y, k));
    }
    best
}

/// Exhaustive grid over the 4-point toy `y = (-1, -1, +1, +1)`, where the
/// equality constraint fixes `a4 = a1 + a2 - a3`. Refines around the best
/// cell a few times. Returns `(alpha, objective)`.
pub fn grid_dual_toy(k: &[Vec<f64>], c: f64) -> ([f64; 4], f64) {
    let y = [-1.0, -1.0, 1.0, 1.0];
    let mut center = [c / 2.0; 3];
    let mut half = c / 2.0;
    let mut best = ([0.0; 4], f64::NEG_INFINITY);
    for _ in 0..6 {
        let steps = 80;
        let h = 2.0 * half / steps as f64;
        let axis = |m: usize| -> Vec<f64> {
            (0..=steps)
                .map(|s| center[m] - half + s as f64 * h)
                .filter(|v| (0.0..=c).contains(v))
                .collect()
        };
        let (g1, g2, g3) = (axis(0), axis(1), axis(2));
        for &a1 in &g1 {
            for &a2 in &g2 {
                for &a3 in &g3 {
                    let a4 = a1 + a2 - a3;
                    if !(0.0..=c).contains(&a4) {
                        continue;
                    }
                    let a = [a1, a2, a3, a4];
                    let w = dual_objective(&a, &y, k);
                    if w > best.1 {
                        best = (a, w);
                    }
                }
            }
        }
        center = [best.0[0], best.0[1], best.0[2]];
        half /= 8.0;
    }
    best
}

pub fn toy() -> (Dataset, Vec<Vec<f64>>, Vec<f64>) {
    let xs = vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]];
    let labels = [Label::Normal, Label::Normal, Label::Galloping, Label::Galloping];
    let ds = Dataset::from_rows(vec![FeatureId::WindSpeed], &xs, &labels).unwrap();
    (ds, xs, vec![-1.0, -1.0, 1.0, 1.0])
}

/// Random labeled points with both classes present.
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> (Dataset, Vec<Vec<f64>>, Vec<f64>) {
    let columns = FeatureId::ALL[..dim].to_vec();
    loop {
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let labels: Vec<Label> = (0..n)
            .map(|_| if rng.random_bool(0.5) { Label::Galloping } else { Label::Normal })
            .collect();
        if labels.iter().all(|&l| l == labels[0]) {
            continue;
        }
        let y = labels.iter().map(|l| l.sign()).collect();
        let ds = Dataset::from_rows(columns.clone(), &xs, &labels).unwrap();
        return (ds, xs, y);
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// KKT check of `y_i f(x_i)` against `alpha_i`, returning the violation count.
pub fn kkt_violations(alpha: &[f64], margins: &[f64], c: f64, tol: f64) -> usize {
    alpha
        .iter()
        .zip(margins)
        .filter(|(&a, &m)| {
            if a <= 1e-8 * c {
                m < 1.0 - tol
            } else if a >= c * (1.0 - 1e-12) {
                m > 1.0 + tol
            } else {
                (m - 1.0).abs() > tol
            }
        })
        .count()
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
