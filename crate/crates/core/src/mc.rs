//! Random streams and deterministic reductions for Monte Carlo work.
//!
//! Every replica draws from its own ChaCha8 stream keyed by `(seed, replica)`,
//! and every sum is a fixed pairwise tree over an ordered slice, so results
//! do not depend on how rayon schedules the work.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64, replica: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

pub fn uniform(rng: &mut Stream) -> f64 {
    rng.random::<f64>()
}

const LEAF: usize = 64;

/// Pairwise sum of `f(0), ..., f(n - 1)` with a fixed split pattern.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: &F) -> f64 {
    fn rec<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= LEAF {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            s
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, f) + rec(mid, hi, f)
        }
    }
    rec(0, n, f)
}

pub fn pairwise_csum_by<F: Fn(usize) -> Complex64>(n: usize, f: &F) -> Complex64 {
    fn rec<F: Fn(usize) -> Complex64>(lo: usize, hi: usize, f: &F) -> Complex64 {
        if hi - lo <= LEAF {
            let mut s = Complex64::new(0.0, 0.0);
            for i in lo..hi {
                s += f(i);
            }
            s
        } else {
            let mid = lo + (hi - lo) / 2;
            rec(lo, mid, f) + rec(mid, hi, f)
        }
    }
    rec(0, n, f)
}

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum_by(xs.len(), &|i| xs[i])
}

/// Evaluates `f` on every replica index in parallel, preserving order.
pub fn par_replicas<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Sample mean and its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub var: f64,
}

pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    if n == 0 {
        return MeanSe {
            mean: f64::NAN,
            se: f64::NAN,
            var: f64::NAN,
        };
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return MeanSe { mean, se: 0.0, var: 0.0 };
    }
    let var = pairwise_sum_by(n, &|i| (xs[i] - mean).powi(2)) / (n - 1) as f64;
    MeanSe {
        mean,
        se: (var / n as f64).sqrt(),
        var,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMeanSe {
    pub mean: Complex64,
    /// Standard error of the complex mean, `sqrt(E|z - mean|^2 / n)`.
    pub se: f64,
}

pub fn cmean_se(zs: &[Complex64]) -> CMeanSe {
    let n = zs.len();
    if n == 0 {
        return CMeanSe {
            mean: Complex64::new(f64::NAN, f64::NAN),
            se: f64::NAN,
        };
    }
    let mean = pairwise_csum_by(n, &|i| zs[i]) / n as f64;
    if n == 1 {
        return CMeanSe { mean, se: 0.0 };
    }
    let var = pairwise_sum_by(n, &|i| (zs[i] - mean).norm_sqr()) / (n - 1) as f64;
    CMeanSe {
        mean,
        se: (var / n as f64).sqrt(),
    }
}

/// Builds the global rayon pool, capped by `FURSTENBERG_THREADS` when set.
/// Later calls are no-ops.
pub fn init_threads() {
    let cap = std::env::var("FURSTENBERG_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    if let Some(n) = cap {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Least-squares line `y = a + b x`, with `R^2`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (a, b, r2)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = (0..4).map({
            let mut r = stream(7, 3);
            move |_| uniform(&mut r)
        }).collect();
        let b: Vec<f64> = (0..4).map({
            let mut r = stream(7, 3);
            move |_| uniform(&mut r)
        }).collect();
        let c: Vec<f64> = (0..4).map({
            let mut r = stream(7, 4);
            move |_| uniform(&mut r)
        }).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let xs: Vec<f64> = (0..10_000).map(|i| (i as f64).sin()).collect();
        let s1 = pairwise_sum(&xs);
        let par: Vec<f64> = par_replicas(xs.len(), |i| xs[i]);
        assert_eq!(s1.to_bits(), pairwise_sum(&par).to_bits());
        let naive: f64 = xs.iter().sum();
        assert!((s1 - naive).abs() < 1e-10);
    }

    #[test]
    fn mean_se_basics() {
        let m = mean_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.var - 5.0 / 3.0).abs() < 1e-15);
        let c = cmean_se(&[Complex64::new(1.0, 1.0); 5]);
        assert_eq!(c.se, 0.0);
    }

    #[test]
    fn line_fit_recovers_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let (a, b, r2) = linear_fit(&xs, &ys);
        assert!((a - 3.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }
}
