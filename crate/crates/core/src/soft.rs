//! The smoothed target f_Δ, importance weights back to the hard target, ESS
//! and multinomial resampling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Result, SvarError};
use crate::linalg::{qr_positive_diag, Matrix};
use crate::restrictions::PreparedRestrictions;

/// A regularisation function Λ(x, Δ): continuous, increasing in x, valued in
/// [1/2, 1) for x ≥ 0 and tending to the indicator 1{x ≥ 0} as Δ → 0.
pub trait Regulariser: Send + Sync {
    /// log Λ(x, Δ)
    fn log_value(&self, x: f64, delta: f64) -> f64;

    fn value(&self, x: f64, delta: f64) -> f64 {
        self.log_value(x, delta).exp()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Logistic;

impl Regulariser for Logistic {
    fn log_value(&self, x: f64, delta: f64) -> f64 {
        log_logistic(x, delta)
    }

    fn value(&self, x: f64, delta: f64) -> f64 {
        logistic(x, delta)
    }
}

/// 1 / (1 + exp(−x/Δ)).
pub fn logistic(x: f64, delta: f64) -> f64 {
    let t = x / delta;
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        // exp(t) / (1 + exp(t)) stays finite and positive for very negative t
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// log Λ(x, Δ) = −log1p(exp(−x/Δ)).
pub fn log_logistic(x: f64, delta: f64) -> f64 {
    let t = x / delta;
    if t > 36.0 {
        // log1p(e^{-t}) = e^{-t} to double precision
        -(-t).exp()
    } else if t < -36.0 {
        t - t.exp()
    } else if t >= 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}

/// Σ_l log Λ(m_l, Δ).
pub fn log_penalty(margins: &[f64], delta: f64) -> f64 {
    margins.iter().map(|&m| log_logistic(m, delta)).sum()
}

/// −½‖Z‖²_F + Σ_l log Λ(m_l, Δ), given precomputed margins at Q(Z).
pub fn log_f_delta_with_margins(z: &[f64], margins: &[f64], delta: f64) -> f64 {
    -0.5 * z.iter().map(|x| x * x).sum::<f64>() + log_penalty(margins, delta)
}

/// 0 if any margin is negative, otherwise Π_l Λ(m_l, Δ)⁻¹ ∈ [1, 2^s].
pub fn importance_weight(margins: &[f64], delta: f64) -> f64 {
    if margins.iter().any(|&m| !(m >= 0.0)) {
        return 0.0;
    }
    (-log_penalty(margins, delta)).exp()
}

/// (100/K)(Σw)²/Σw².
pub fn effective_sample_size(weights: &[f64]) -> Result<f64> {
    let sum: f64 = weights.iter().sum();
    if !(sum > 0.0) {
        return Err(SvarError::AllInfeasible);
    }
    let sum_sq: f64 = weights.iter().map(|w| w * w).sum();
    Ok(100.0 / weights.len() as f64 * sum * sum / sum_sq)
}

/// K indices drawn with replacement, probabilities proportional to `weights`.
pub fn resample_indices<R: Rng + ?Sized>(weights: &[f64], k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(weights).map_err(|_| SvarError::AllInfeasible)?;
    Ok((0..k).map(|_| dist.sample(rng)).collect())
}

/// Smoothed target at a fixed φ.
pub struct SoftTarget<'a> {
    prepared: &'a PreparedRestrictions,
    delta: f64,
    regulariser: &'a dyn Regulariser,
}

/// Everything computed while evaluating the target at one point.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub log_density: f64,
    pub q: Matrix,
    pub margins: Vec<f64>,
}

impl<'a> SoftTarget<'a> {
    pub fn new(prepared: &'a PreparedRestrictions, delta: f64) -> Result<Self> {
        Self::with_regulariser(prepared, delta, &Logistic)
    }

    pub fn with_regulariser(
        prepared: &'a PreparedRestrictions,
        delta: f64,
        regulariser: &'a dyn Regulariser,
    ) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(SvarError::Config(format!("delta must be positive, got {delta}")));
        }
        Ok(Self {
            prepared,
            delta,
            regulariser,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn with_delta(&self, delta: f64) -> Result<SoftTarget<'a>> {
        Self::with_regulariser(self.prepared, delta, self.regulariser)
    }

    pub fn prepared(&self) -> &PreparedRestrictions {
        self.prepared
    }

    /// z holds the n² entries of Z in column-major order. A rank-deficient Z
    /// has log density −∞.
    pub fn evaluate(&self, z: &[f64]) -> Evaluation {
        let n = self.prepared.n();
        let zm = Matrix::from_column_slice(n, n, z);
        let mut q = match qr_positive_diag(&zm) {
            Ok((q, _)) => q,
            Err(_) => {
                return Evaluation {
                    log_density: f64::NEG_INFINITY,
                    q: Matrix::zeros(n, n),
                    margins: vec![f64::NEG_INFINITY; self.prepared.len()],
                }
            }
        };
        self.prepared.canonical(&mut q);
        let margins = self.prepared.margins(&q);
        let penalty: f64 = margins
            .iter()
            .map(|&m| self.regulariser.log_value(m, self.delta))
            .sum();
        let log_density = -0.5 * z.iter().map(|x| x * x).sum::<f64>() + penalty;
        Evaluation {
            log_density: if log_density.is_nan() {
                f64::NEG_INFINITY
            } else {
                log_density
            },
            q,
            margins,
        }
    }

    pub fn log_density(&self, z: &[f64]) -> f64 {
        self.evaluate(z).log_density
    }

    /// Weight back to the hard-truncated target.
    pub fn weight(&self, margins: &[f64]) -> f64 {
        if margins.iter().any(|&m| !(m >= 0.0)) {
            return 0.0;
        }
        let penalty: f64 = margins
            .iter()
            .map(|&m| self.regulariser.log_value(m, self.delta))
            .sum();
        (-penalty).exp()
    }
}

/// M draws of Q with unnormalised importance weights.
#[derive(Clone, Debug, Default)]
pub struct WeightedDrawBatch {
    pub draws: Vec<Matrix>,
    pub weights: Vec<f64>,
    /// Target evaluations spent producing the batch (initialisation included).
    pub evaluations: u64,
}

impl WeightedDrawBatch {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn feasible_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    /// The identified set is treated as empty when no draw is feasible.
    pub fn is_empty_verdict(&self) -> bool {
        self.feasible_count() == 0
    }

    pub fn ess_percent(&self) -> Option<f64> {
        effective_sample_size(&self.weights).ok()
    }

    pub fn feasible_draws(&self) -> impl Iterator<Item = &Matrix> {
        self.draws
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(q, _)| q)
    }

    pub fn resample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Vec<Matrix>> {
        Ok(resample_indices(&self.weights, k, rng)?
            .into_iter()
            .map(|i| self.draws[i].clone())
            .collect())
    }
}
