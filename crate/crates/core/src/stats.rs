//! Sample statistics shared by the Monte Carlo routines.

use num_complex::Complex64;
use rayon::prelude::*;

/// Mean and standard error of the mean from i.i.d. real samples.
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standard errors of the real and imaginary parts of a complex mean.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StdErr {
    pub re: f64,
    pub im: f64,
}

impl StdErr {
    pub fn max(&self) -> f64 {
        self.re.max(self.im)
    }
}

/// Number of batches used for `n` samples: `⌊√n⌋`, at least two.
pub fn batch_count(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).clamp(2, n.max(2))
}

/// Overall mean plus batch-means standard errors over `⌊√n⌋` contiguous batches.
pub fn batch_means(samples: &[Complex64]) -> (Complex64, StdErr) {
    let n = samples.len();
    let mean = samples.iter().sum::<Complex64>() / n as f64;
    let nb = batch_count(n);
    let batch: Vec<Complex64> = (0..nb)
        .map(|b| {
            let (lo, hi) = (b * n / nb, (b + 1) * n / nb);
            samples[lo..hi].iter().sum::<Complex64>() / (hi - lo) as f64
        })
        .collect();
    let re: Vec<f64> = batch.iter().map(|z| z.re).collect();
    let im: Vec<f64> = batch.iter().map(|z| z.im).collect();
    (
        mean,
        StdErr {
            re: mean_stderr(&re).1,
            im: mean_stderr(&im).1,
        },
    )
}

/// `|estimate - target| / stderr`, with an exact match at zero error giving 0.
pub fn z_score(estimate: f64, target: f64, stderr: f64) -> f64 {
    let diff = (estimate - target).abs();
    if stderr > 0.0 {
        diff / stderr
    } else if diff <= 1e-12 * target.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Componentwise maximum of the real and imaginary z-scores.
pub fn complex_z_score(estimate: Complex64, target: Complex64, stderr: StdErr) -> f64 {
    z_score(estimate.re, target.re, stderr.re).max(z_score(estimate.im, target.im, stderr.im))
}

/// Evaluates `f(0..n)` in parallel; the output order is the index order, so
/// any later sequential reduction is independent of the thread count.
pub fn par_collect<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}
