//! Monte-Carlo plumbing: deterministic parallel fan-out and small statistics
//! helpers.
//!
//! Sample loops are split into fixed-size blocks; each block is processed
//! sequentially and the per-block partials are merged in block order. The
//! block layout does not depend on the worker count, so results are
//! bit-identical for any `CHAOSLAB_THREADS` setting.

use std::ops::Range;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

/// Samples per block; fixed so that lane count cannot affect summation order.
pub const BLOCK: u64 = 4096;

/// Worker pool sized by `CHAOSLAB_THREADS` (default: rayon's choice).
pub fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(k) = std::env::var("CHAOSLAB_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&k| k >= 1)
        {
            builder = builder.num_threads(k);
        }
        builder.build().expect("failed to build worker pool")
    })
}

/// Run `work` over `0..total` in fixed blocks, returning per-block results
/// in block order.
pub fn map_blocks<A: Send>(total: u64, work: impl Fn(Range<u64>) -> A + Sync) -> Vec<A> {
    let blocks = total.div_ceil(BLOCK);
    thread_pool().install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let start = b * BLOCK;
                work(start..(start + BLOCK).min(total))
            })
            .collect()
    })
}

/// Accumulator of the first four power sums of a real sample.
#[derive(Debug, Clone, Copy, Default)]
pub struct PowerSums {
    pub n: u64,
    s1: f64,
    s2: f64,
    s3: f64,
    s4: f64,
}

impl PowerSums {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.s1 += x;
        let x2 = x * x;
        self.s2 += x2;
        self.s3 += x2 * x;
        self.s4 += x2 * x2;
    }

    pub fn merge(&mut self, other: &PowerSums) {
        self.n += other.n;
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.s3 += other.s3;
        self.s4 += other.s4;
    }

    pub fn mean(&self) -> f64 {
        self.s1 / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.n as f64;
        ((self.s2 - self.s1 * self.s1 / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the sample mean.
    pub fn se_mean(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Fourth central moment (biased plug-in estimate).
    pub fn central4(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        (self.s4 - 4.0 * m * self.s3 + 6.0 * m * m * self.s2 - 4.0 * m * m * m * self.s1) / n
            + m * m * m * m
    }

    /// Asymptotic standard error of the sample variance.
    pub fn se_variance(&self) -> f64 {
        let v = self.variance();
        ((self.central4() - v * v).max(0.0) / self.n as f64).sqrt()
    }
}

/// Accumulator for the mean of a complex sample with a dispersion estimate.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexMean {
    pub n: u64,
    sum: Complex64,
    sum_norm_sq: f64,
}

impl ComplexMean {
    pub fn push(&mut self, w: Complex64) {
        self.n += 1;
        self.sum += w;
        self.sum_norm_sq += w.norm_sqr();
    }

    pub fn merge(&mut self, other: &ComplexMean) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_norm_sq += other.sum_norm_sq;
    }

    pub fn mean(&self) -> Complex64 {
        self.sum / self.n as f64
    }

    /// Standard error of `|mean|`: sqrt(total component variance / n).
    pub fn se(&self) -> f64 {
        let n = self.n as f64;
        let var = (self.sum_norm_sq / n - self.mean().norm_sqr()).max(0.0);
        (var / n).sqrt()
    }
}

/// Pearson sample correlation of two equally long series.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
