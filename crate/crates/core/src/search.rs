//! One-dimensional search: bisection, golden-section and grid-then-refine
//! maximization.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Root of `f` on `[a, b]` by bisection, to an interval width of `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, what: &'static str) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.signum() != f_hi.signum()) || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::RootNotFound(what));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section maximization of a unimodal `f` on `[a, b]`.
///
/// Returns the best point seen, preferring the smaller abscissa on ties.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let candidates = [(lo, f(lo)), (x1, f1), (x2, f2), (hi, f(hi))];
    best_of(&candidates)
}

fn best_of(points: &[(f64, f64)]) -> (f64, f64) {
    let mut best = points[0];
    for &(x, fx) in &points[1..] {
        if fx > best.1 || (fx == best.1 && x < best.0) {
            best = (x, fx);
        }
    }
    best
}

/// Outcome of [`grid_refine_max`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub x: f64,
    pub value: f64,
    /// Every `(x, f(x))` evaluated on the coarse grid.
    pub grid: Vec<(f64, f64)>,
}

fn top_peaks(points: &[(f64, f64)], count: usize) -> Vec<usize> {
    let n = points.len();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&k| {
            let v = points[k].1;
            (k == 0 || v >= points[k - 1].1) && (k + 1 == n || v >= points[k + 1].1)
        })
        .collect();
    peaks.sort_by(|&a, &b| points[b].1.total_cmp(&points[a].1).then(a.cmp(&b)));
    peaks.truncate(count);
    peaks
}

/// Evaluates `f` on `grid` (sorted ascending) and refines the best few local
/// maxima: the two grid cells on either side are resampled finely, and each
/// local maximum of that resampling is golden-section refined.
///
/// A kink between two grid points can hide a second peak from the coarse
/// grid; the resampling catches it. Brackets are refined to `tol` or to
/// `1e-9` of their lower end, whichever is finer. The result is never worse
/// than any grid evaluation.
pub fn grid_refine_max<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64], tol: f64) -> GridSearch {
    const PEAKS: usize = 3;
    const LOCAL_POINTS: usize = 33;
    let evaluated: Vec<(f64, f64)> = grid.iter().map(|&x| (x, f(x))).collect();
    let n = evaluated.len();
    let peaks = top_peaks(&evaluated, PEAKS);
    let (mut x, mut value) = evaluated[peaks[0]];
    for k in peaks {
        let lo = evaluated[k.saturating_sub(2)].0;
        let hi = evaluated[(k + 2).min(n - 1)].0;
        if hi <= lo {
            continue;
        }
        let local: Vec<(f64, f64)> = lin_grid(lo, hi, LOCAL_POINTS).into_iter().map(|x| (x, f(x))).collect();
        for m in top_peaks(&local, 2) {
            if local[m].1 > value {
                (x, value) = local[m];
            }
            let a = local[m.saturating_sub(1)].0;
            let b = local[(m + 1).min(LOCAL_POINTS - 1)].0;
            let (rx, rv) = golden_max(&mut f, a, b, tol.min(1e-9 * a).max(f64::MIN_POSITIVE));
            if rv > value {
                x = rx;
                value = rv;
            }
        }
    }
    GridSearch {
        x,
        value,
        grid: evaluated,
    }
}

/// `n` points on `[lo, hi]`: log-spaced below `split`, linear above.
pub fn mixed_grid(lo: f64, hi: f64, n: usize, split: f64) -> Vec<f64> {
    assert!(n >= 2 && hi > lo && lo > 0.0);
    if hi <= split {
        return log_grid(lo, hi, n);
    }
    if lo >= split {
        return lin_grid(lo, hi, n);
    }
    let n_log = n / 2;
    let mut pts = log_grid(lo, split, n_log);
    pts.pop();
    pts.extend(lin_grid(split, hi, n - pts.len()));
    pts
}

pub fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
