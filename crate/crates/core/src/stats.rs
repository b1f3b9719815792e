//! Small statistical helpers: quantiles, histograms and Kolmogorov–Smirnov tests.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov tail probability with the Stephens small-sample
/// correction: Q(λ) = 2 Σ_k (−1)^{k−1} e^{−2k²λ²}, λ = (√m + 0.12 + 0.11/√m) D.
fn kolmogorov_p(d: f64, effective_n: f64) -> f64 {
    let sq = effective_n.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test of `samples` against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> KsResult {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    KsResult {
        statistic: d,
        p_value: kolmogorov_p(d, n),
    }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let effective = (n * m) as f64 / (n + m) as f64;
    KsResult {
        statistic: d,
        p_value: kolmogorov_p(d, effective),
    }
}

/// Linearly interpolated quantile of already sorted data (the usual "type 7").
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(data: &[f64], p: f64) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub fn median(data: &[f64]) -> f64 {
    quantile(data, 0.5)
}

/// Counts over `bins` equal-width bins spanning [lo, hi]; values outside are dropped.
pub fn histogram(data: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; bins];
    let width = (hi - lo) / bins as f64;
    for &v in data {
        if v < lo || v > hi || !v.is_finite() {
            continue;
        }
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_reference_points() {
        // Q(1.36) ≈ 0.049, Q(1.63) ≈ 0.010 for the limiting distribution
        assert!((kolmogorov_p(1.36 / 1e4, 1e8) - 0.0494).abs() < 1e-3);
        assert!((kolmogorov_p(1.628 / 1e4, 1e8) - 0.0100).abs() < 5e-4);
        assert_eq!(kolmogorov_p(0.0, 100.0), 1.0);
    }

    #[test]
    fn uniform_grid_passes() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let r = ks_one_sample(&x, |v| v.clamp(0.0, 1.0));
        assert!((r.statistic - 0.0005).abs() < 1e-12);
        assert!(r.p_value > 0.99);
        let shifted: Vec<f64> = x.iter().map(|v| v * 0.9).collect();
        assert!(ks_one_sample(&shifted, |v| v.clamp(0.0, 1.0)).p_value < 1e-6);
    }

    #[test]
    fn two_sample_cases() {
        let a: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a);
        assert_eq!(r.statistic, 0.0);
        let b: Vec<f64> = (0..500).map(|i| i as f64 + 250.0).collect();
        let r = ks_two_sample(&a, &b);
        assert!((r.statistic - 0.5).abs() < 1e-12);
        assert!(r.p_value < 1e-10);
    }

    #[test]
    fn quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.25), 2.0);
        assert_eq!(histogram(&[0.0, 0.5, 1.0, 2.0], 0.0, 1.0, 2), vec![1, 2]);
    }
}
