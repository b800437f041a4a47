//! K-Lasso: walk a weighted Lasso path until exactly `K` features are
//! active, then refit those features by unpenalized weighted least squares.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Number of penalties on the geometric path.
pub const PATH_LENGTH: usize = 50;
/// Smallest penalty as a fraction of the largest.
pub const PATH_RATIO: f64 = 1e-3;
/// Coordinate descent stops when no coefficient moves by more than this.
pub const CD_TOLERANCE: f64 = 1e-6;
const CD_MAX_SWEEPS: usize = 10_000;
const BISECTION_STEPS: usize = 40;
/// Columns with weighted variance below this are never selected.
const VARIANCE_FLOOR: f64 = 1e-12;

/// Weighted linear surrogate over a subset of features.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModel {
    /// Selected feature indices, ascending.
    pub selected: Vec<usize>,
    /// Coefficient per entry of `selected`.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// The path never produced exactly `K` active features; `selected` is the
    /// largest smaller active set found.
    pub path_exhausted: bool,
}

impl LocalModel {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.intercept + self.selected.iter().zip(&self.coefficients).map(|(&f, &b)| b * row[f]).sum::<f64>()
    }
}

/// Weighted, centered second moments of a design.
struct Moments {
    x_mean: Vec<f64>,
    y_mean: f64,
    gram: Vec<Vec<f64>>,
    xy: Vec<f64>,
    yy: f64,
}

impl Moments {
    fn new(x: &[Vec<f64>], y: &[f64], w: &[f64]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let total: f64 = w.iter().sum();
        let mut x_mean = alloc::vec![0.0; d];
        let mut y_mean = 0.0;
        for ((row, &t), &wi) in x.iter().zip(y).zip(w) {
            for (m, &v) in x_mean.iter_mut().zip(row) {
                *m += wi * v;
            }
            y_mean += wi * t;
        }
        x_mean.iter_mut().for_each(|m| *m /= total);
        y_mean /= total;

        let mut gram = alloc::vec![alloc::vec![0.0; d]; d];
        let mut xy = alloc::vec![0.0; d];
        let mut yy = 0.0;
        let mut centered = alloc::vec![0.0; d];
        for ((row, &t), &wi) in x.iter().zip(y).zip(w) {
            for j in 0..d {
                centered[j] = row[j] - x_mean[j];
            }
            let ty = t - y_mean;
            yy += wi * ty * ty;
            for j in 0..d {
                let cj = wi * centered[j];
                xy[j] += cj * ty;
                for k in j..d {
                    gram[j][k] += cj * centered[k];
                }
            }
        }
        for j in 0..d {
            for k in 0..j {
                gram[j][k] = gram[k][j];
            }
        }
        Moments { x_mean, y_mean, gram, xy, yy }
    }
}

/// Select `k` features from the binary interpretable representation by the
/// Lasso path on kernel-weighted squared loss, then refit them.
///
/// Columns are standardized (weighted) for selection only. The path runs over
/// [`PATH_LENGTH`] penalties from the smallest penalty with an empty model
/// down to [`PATH_RATIO`] of it, warm started; a step that jumps past `k`
/// active features is refined by bisection on the penalty. When `k` covers
/// every non-constant column, all of them are selected without a path.
pub fn k_lasso(x: &[Vec<f64>], y: &[f64], w: &[f64], k: usize) -> Result<LocalModel> {
    let d = x.first().map_or(0, Vec::len);
    if x.len() != y.len() || x.len() != w.len() || x.is_empty() {
        return Err(Error::param("samples", "design, target and weights must be non-empty and equally long"));
    }
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::param("weights", "must have a positive sum"));
    }
    let m = Moments::new(x, y, w);

    let usable: Vec<usize> = (0..d).filter(|&j| m.gram[j][j] > VARIANCE_FLOOR * total).collect();
    let (selected, path_exhausted) = if m.yy <= VARIANCE_FLOOR * VARIANCE_FLOOR * total {
        (Vec::new(), true)
    } else if usable.len() <= k {
        (usable.clone(), usable.len() < k)
    } else {
        select_on_path(&m, &usable, k)
    };
    let (coefficients, intercept) = refit(&m, &selected);
    Ok(LocalModel { selected, coefficients, intercept, path_exhausted })
}

fn select_on_path(m: &Moments, usable: &[usize], k: usize) -> (Vec<usize>, bool) {
    // standardized problem over the usable columns
    let scale: Vec<f64> = usable.iter().map(|&j| libm::sqrt(m.gram[j][j])).collect();
    let p = usable.len();
    let gram: Vec<Vec<f64>> =
        (0..p).map(|a| (0..p).map(|b| m.gram[usable[a]][usable[b]] / (scale[a] * scale[b])).collect()).collect();
    let xy: Vec<f64> = (0..p).map(|a| m.xy[usable[a]] / scale[a]).collect();

    let lambda_max = xy.iter().fold(0.0f64, |acc, v| acc.max(libm::fabs(*v)));
    if !(lambda_max > 0.0) {
        return (Vec::new(), true);
    }
    let active = |beta: &[f64]| -> Vec<usize> { (0..p).filter(|&a| beta[a] != 0.0).map(|a| usable[a]).collect() };

    let mut beta = alloc::vec![0.0; p];
    let mut best_smaller: Vec<usize> = Vec::new();
    let mut prev_lambda = lambda_max;
    let mut prev_beta = beta.clone();
    for t in 0..PATH_LENGTH {
        let lambda = lambda_max * libm::pow(PATH_RATIO, t as f64 / (PATH_LENGTH - 1) as f64);
        coordinate_descent(&gram, &xy, lambda, &mut beta);
        let set = active(&beta);
        if set.len() == k {
            return (set, false);
        }
        if set.len() > k {
            // bisect the penalty between the last undershoot and this overshoot
            let (mut hi, mut lo) = (prev_lambda, lambda);
            let mut probe = prev_beta.clone();
            for _ in 0..BISECTION_STEPS {
                let mid = libm::sqrt(hi * lo);
                coordinate_descent(&gram, &xy, mid, &mut probe);
                let s = active(&probe);
                match s.len().cmp(&k) {
                    core::cmp::Ordering::Equal => return (s, false),
                    core::cmp::Ordering::Less => {
                        if s.len() > best_smaller.len() {
                            best_smaller = s;
                        }
                        hi = mid;
                    }
                    core::cmp::Ordering::Greater => lo = mid,
                }
            }
            return (best_smaller, true);
        }
        if set.len() > best_smaller.len() {
            best_smaller = set;
        }
        prev_lambda = lambda;
        prev_beta.clone_from(&beta);
    }
    (best_smaller, true)
}

/// Cyclic coordinate descent for `½βᵀGβ − cᵀβ + λ‖β‖₁` with unit diagonal.
fn coordinate_descent(gram: &[Vec<f64>], xy: &[f64], lambda: f64, beta: &mut [f64]) {
    let p = beta.len();
    for _ in 0..CD_MAX_SWEEPS {
        let mut max_change = 0.0f64;
        for j in 0..p {
            let mut rho = xy[j];
            for (k, &b) in beta.iter().enumerate() {
                if k != j && b != 0.0 {
                    rho -= gram[j][k] * b;
                }
            }
            let updated = soft_threshold(rho, lambda) / gram[j][j];
            max_change = max_change.max(libm::fabs(updated - beta[j]));
            beta[j] = updated;
        }
        if max_change < CD_TOLERANCE {
            break;
        }
    }
}

fn soft_threshold(v: f64, lambda: f64) -> f64 {
    if v > lambda {
        v - lambda
    } else if v < -lambda {
        v + lambda
    } else {
        0.0
    }
}

/// Weighted least squares with intercept on `selected` columns.
fn refit(m: &Moments, selected: &[usize]) -> (Vec<f64>, f64) {
    if selected.is_empty() {
        return (Vec::new(), m.y_mean);
    }
    let a: Vec<Vec<f64>> = selected.iter().map(|&i| selected.iter().map(|&j| m.gram[i][j]).collect()).collect();
    let b: Vec<f64> = selected.iter().map(|&i| m.xy[i]).collect();
    let coef = solve_spd(a, b);
    let intercept = m.y_mean - selected.iter().zip(&coef).map(|(&j, &c)| c * m.x_mean[j]).sum::<f64>();
    (coef, intercept)
}

/// Gaussian elimination with partial pivoting; a rank-deficient system gets a
/// tiny ridge.
pub(crate) fn solve_spd(a: Vec<Vec<f64>>, b: Vec<f64>) -> Vec<f64> {
    if let Some(x) = gauss(a.clone(), b.clone()) {
        return x;
    }
    let trace: f64 = (0..a.len()).map(|i| a[i][i]).sum();
    let ridge = 1e-10 * trace.max(1.0) / a.len() as f64;
    let mut damped = a;
    for (i, row) in damped.iter_mut().enumerate() {
        row[i] += ridge;
    }
    gauss(damped, b.clone()).unwrap_or_else(|| alloc::vec![0.0; b.len()])
}

fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(libm::fabs(*v))).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| libm::fabs(a[i][col]).total_cmp(&libm::fabs(a[j][col])))?;
        if libm::fabs(a[pivot][col]) <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}
