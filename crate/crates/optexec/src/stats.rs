//! Deterministic reductions and small estimators shared by the Monte-Carlo
//! engine and the test suite.
//!
//! Every ensemble reduction goes through [`pairwise_sum`]. The summation tree
//! depends only on slice length, so for a fixed path ordering the result is
//! bit-identical regardless of how many worker threads produced the inputs,
//! and rounding error stays O(log n) ulps instead of O(n).

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MeanSe {
    pub mean: f64,
    /// Standard error of the mean; 0 for ensembles of fewer than two values.
    pub std_error: f64,
    pub n: u64,
}

/// Two-pass mean and standard error with pairwise reductions in both passes.
pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    if n == 0 {
        return MeanSe {
            mean: f64::NAN,
            std_error: f64::NAN,
            n: 0,
        };
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return MeanSe {
            mean,
            std_error: 0.0,
            n: 1,
        };
    }
    let centered: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&centered) / (n - 1) as f64;
    MeanSe {
        mean,
        std_error: (var / n as f64).sqrt(),
        n: n as u64,
    }
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = pairwise_sum(xs) / n as f64;
    let centered: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    pairwise_sum(&centered) / (n - 1) as f64
}

/// Standard error of the sample variance via the fourth central moment,
/// se^2 = (m4 - var^2 (n-3)/(n-1)) / n. Distribution-free, so a "variance is
/// positive" claim does not lean on normality.
pub fn variance_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return f64::NAN;
    }
    let nf = n as f64;
    let mean = pairwise_sum(xs) / nf;
    let c2: Vec<f64> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&c2) / (nf - 1.0);
    let c4: Vec<f64> = c2.iter().map(|&s| s * s).collect();
    let m4 = pairwise_sum(&c4) / nf;
    ((m4 - var * var * (nf - 3.0) / (nf - 1.0)) / nf)
        .max(0.0)
        .sqrt()
}

/// Least-squares slope of ln(y) against ln(x); used to fit convergence orders.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = pairwise_sum(&lx) / n;
    let my = pairwise_sum(&ly) / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..lx.len() {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    num / den
}

/// Total variation of a node sequence.
pub fn total_variation(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}
