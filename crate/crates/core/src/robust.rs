//! Prior-robust summaries built from per-φ identified-set bounds.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvarError};
use crate::stats::{median, quantile_sorted};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

/// [min, max] of a quantity over the feasible draws of one φ. The convex hull
/// is reported when the identified set is not connected.
pub fn identified_set_bounds<I: IntoIterator<Item = f64>>(values: I) -> Result<Interval> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return Err(SvarError::EmptyVerdict { attempts: 0 });
    }
    Ok(Interval { lo, hi })
}

/// [median of lower bounds, median of upper bounds].
pub fn set_of_posterior_medians(bounds: &[Interval]) -> Interval {
    let lows: Vec<f64> = bounds.iter().map(|b| b.lo).collect();
    let highs: Vec<f64> = bounds.iter().map(|b| b.hi).collect();
    Interval {
        lo: median(&lows),
        hi: median(&highs),
    }
}

/// Number of records an interval must contain to carry posterior probability α.
pub fn required_count(n: usize, alpha: f64) -> usize {
    ((alpha * n as f64 - 1e-9).ceil() as usize).clamp(1, n)
}

/// Shortest [a, b] containing at least a fraction α of the bound intervals;
/// ties go to the leftmost interval.
///
/// Sweeps a over lower bounds in decreasing order while a max-heap keeps the
/// m smallest upper bounds among records with lo ≥ a, so b is the heap top.
pub fn robust_credible_interval(bounds: &[Interval], alpha: f64) -> Result<Interval> {
    if bounds.len() < 2 {
        return Err(SvarError::InsufficientData(
            "robust credible interval needs at least two phi draws".into(),
        ));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SvarError::Config(format!("credibility level {alpha} outside (0, 1]")));
    }
    let m = required_count(bounds.len(), alpha);
    let mut order: Vec<&Interval> = bounds.iter().collect();
    order.sort_by(|a, b| b.lo.total_cmp(&a.lo));
    let mut heap: BinaryHeap<OrdF64> = BinaryHeap::with_capacity(m + 1);
    let mut best: Option<Interval> = None;
    let mut k = 0;
    while k < order.len() {
        let a = order[k].lo;
        while k < order.len() && order[k].lo == a {
            heap.push(OrdF64(order[k].hi));
            if heap.len() > m {
                heap.pop();
            }
            k += 1;
        }
        if heap.len() == m {
            let b = heap.peek().expect("non-empty").0;
            let candidate = Interval { lo: a, hi: b };
            if best.is_none_or(|cur| candidate.width() <= cur.width()) {
                best = Some(candidate);
            }
        }
    }
    Ok(best.expect("m ≤ n guarantees a candidate"))
}

#[derive(Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Equal-tailed α interval of point draws under the standard posterior.
pub fn standard_credible_interval(values: &[f64], alpha: f64) -> Interval {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let tail = (1.0 - alpha) / 2.0;
    Interval {
        lo: quantile_sorted(&v, tail),
        hi: quantile_sorted(&v, 1.0 - tail),
    }
}

/// 1 − width(standard) / width(robust), floored at 0.
pub fn prior_informativeness(standard: &Interval, robust: &Interval) -> Result<f64> {
    let rw = robust.width();
    if !(rw > 0.0) {
        return Err(SvarError::DegenerateWidth);
    }
    Ok((1.0 - standard.width() / rw).clamp(0.0, 1.0))
}

fn draw_bound(d: f64, delta: f64) -> f64 {
    let a = 2.0 * d * (2.0 * d / delta).ln();
    let b = std::f64::consts::E * (2.0 * d + (1.0 / delta).ln());
    a.min(b)
}

/// Draws of Q per φ so that the min/max bounds of d quantities are ε-accurate
/// with probability 1 − δ: min{2d ln(2d/δ), e(2d + ln(1/δ))}/ε, rounded to the
/// nearest integer.
pub fn required_draws(d: usize, epsilon: f64, delta: f64) -> Result<u64> {
    validate_draw_inputs(d, epsilon, delta)?;
    Ok((draw_bound(d as f64, delta) / epsilon).round() as u64)
}

/// The ε achieved by `m` draws (inverse of `required_draws`).
pub fn epsilon_for_draws(d: usize, m: u64, delta: f64) -> Result<f64> {
    validate_draw_inputs(d, 0.5, delta)?;
    if m == 0 {
        return Err(SvarError::Config("draw count must be positive".into()));
    }
    Ok(draw_bound(d as f64, delta) / m as f64)
}

/// Required draws divided by the mean ESS share, for use with weighted draws.
pub fn grossed_up_draws(required: u64, mean_ess_percent: f64) -> u64 {
    (required as f64 / (mean_ess_percent / 100.0)).ceil() as u64
}

/// (δ, ε) pairs yielding the same draw count `m`.
pub fn iso_draw_curve(d: usize, m: u64, deltas: &[f64]) -> Result<Vec<(f64, f64)>> {
    deltas
        .iter()
        .map(|&delta| Ok((delta, epsilon_for_draws(d, m, delta)?)))
        .collect()
}

fn validate_draw_inputs(d: usize, epsilon: f64, delta: f64) -> Result<()> {
    if d == 0 || !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(SvarError::Config(format!(
            "required draws need d ≥ 1 and ε, δ in (0, 1); got d={d}, ε={epsilon}, δ={delta}"
        )));
    }
    Ok(())
}

/// One row of the robust summary table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustRow {
    pub variable: String,
    pub shock: String,
    pub horizon: usize,
    /// Posterior means of the lower and upper bounds.
    pub is_lower: f64,
    pub is_upper: f64,
    pub median_set: Interval,
    pub robust_interval: Interval,
    pub standard_interval: Interval,
    pub prior_informativeness: f64,
}

/// Summaries for one quantity from its per-φ bounds and its point draws under
/// the standard posterior.
pub fn summarise_quantity(bounds: &[Interval], point_draws: &[f64], alpha: f64) -> Result<(f64, f64, Interval, Interval, Interval, f64)> {
    let n = bounds.len() as f64;
    let is_lower = bounds.iter().map(|b| b.lo).sum::<f64>() / n;
    let is_upper = bounds.iter().map(|b| b.hi).sum::<f64>() / n;
    let median_set = set_of_posterior_medians(bounds);
    let robust = robust_credible_interval(bounds, alpha)?;
    let standard = standard_credible_interval(point_draws, alpha);
    let informativeness = match prior_informativeness(&standard, &robust) {
        Ok(v) => v,
        Err(SvarError::DegenerateWidth) => 0.0,
        Err(e) => return Err(e),
    };
    Ok((is_lower, is_upper, median_set, robust, standard, informativeness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RngStream;
    use rand::Rng;

    fn brute_force(bounds: &[Interval], alpha: f64) -> Interval {
        let m = required_count(bounds.len(), alpha);
        let mut best: Option<Interval> = None;
        for a in bounds.iter().map(|b| b.lo) {
            for b in bounds.iter().map(|b| b.hi) {
                if b < a {
                    continue;
                }
                let cand = Interval { lo: a, hi: b };
                let count = bounds.iter().filter(|x| cand.contains(x)).count();
                if count < m {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some(cur) => cand.width() < cur.width() || (cand.width() == cur.width() && cand.lo < cur.lo),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        best.unwrap()
    }

    fn synthetic(rng: &mut RngStream, n: usize) -> Vec<Interval> {
        (0..n)
            .map(|_| {
                let c: f64 = rng.random::<f64>() * 4.0 - 2.0;
                let w: f64 = rng.random::<f64>() * 1.5;
                Interval::new(c - w * rng.random::<f64>(), c + w)
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = RngStream::new(99, 0);
        for trial in 0..30 {
            let n = 2 + trial * 6;
            let bounds = synthetic(&mut rng, n);
            for &alpha in &[0.5, 0.68, 0.9, 0.95, 1.0] {
                let fast = robust_credible_interval(&bounds, alpha).unwrap();
                let slow = brute_force(&bounds, alpha);
                assert_eq!(fast, slow, "n={n} alpha={alpha}");
            }
        }
    }

    #[test]
    fn alpha_one_spans_everything() {
        let mut rng = RngStream::new(5, 0);
        let bounds = synthetic(&mut rng, 50);
        let rci = robust_credible_interval(&bounds, 1.0).unwrap();
        let lo = bounds.iter().map(|b| b.lo).fold(f64::INFINITY, f64::min);
        let hi = bounds.iter().map(|b| b.hi).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(rci, Interval::new(lo, hi));
    }

    #[test]
    fn point_identified_case_is_shortest_interval() {
        let pts: Vec<f64> = (0..101).map(|i| (i as f64 / 100.0).powi(2)).collect();
        let bounds: Vec<Interval> = pts.iter().map(|&p| Interval::new(p, p)).collect();
        let rci = robust_credible_interval(&bounds, 0.9).unwrap();
        // 91 consecutive points; the densest stretch is at the left
        assert_eq!(rci, Interval::new(pts[0], pts[90]));
    }

    #[test]
    fn medians_and_informativeness() {
        assert_eq!(set_of_posterior_medians(&[Interval::new(-1.0, 2.0)]), Interval::new(-1.0, 2.0));
        let sym = [Interval::new(-2.0, 1.0), Interval::new(-1.0, 2.0), Interval::new(-1.5, 1.5)];
        assert_eq!(set_of_posterior_medians(&sym), Interval::new(-1.5, 1.5));
        let r = Interval::new(0.0, 1.0);
        assert_eq!(prior_informativeness(&r, &r).unwrap(), 0.0);
        assert!((prior_informativeness(&Interval::new(0.1, 0.8), &r).unwrap() - 0.3).abs() < 1e-12);
        assert!(matches!(
            prior_informativeness(&r, &Interval::new(2.0, 2.0)),
            Err(SvarError::DegenerateWidth)
        ));
    }

    #[test]
    fn draw_counts() {
        assert_eq!(required_draws(189, 0.05, 0.05).unwrap(), 20_713);
        let eps = epsilon_for_draws(189, 20_713, 0.05).unwrap();
        assert!((eps - 0.05).abs() < 1e-5);
        // d = 1, ε = δ = 0.5: min{2 ln 4, e(2 + ln 2)} / 0.5
        let direct = (2.0 * 4.0f64.ln()).min(std::f64::consts::E * (2.0 + 2.0f64.ln())) / 0.5;
        assert_eq!(required_draws(1, 0.5, 0.5).unwrap(), direct.round() as u64);
        assert_eq!(grossed_up_draws(20_713, 89.0), (20_713.0f64 / 0.89).ceil() as u64);
        assert!(required_draws(0, 0.1, 0.1).is_err());
        let curve = iso_draw_curve(189, 20_713, &[0.01, 0.05, 0.2]).unwrap();
        assert!(curve.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn empty_bounds() {
        assert!(identified_set_bounds(Vec::<f64>::new()).is_err());
        assert_eq!(identified_set_bounds([0.3]).unwrap(), Interval::new(0.3, 0.3));
    }
}
