//! Diffuse normal-inverse-Wishart posterior for φ and the outer loop over
//! (φ, Q) draws.

use rand::Rng;
use rand_distr::{ChiSquared, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SvarError};
use crate::linalg::{cholesky_lower, Matrix, RngStream};
use crate::model::{compute_irf_coefficients, impulse_response, InnovationSeries, ReducedFormParams, SufficientStats, VarData};
use crate::restrictions::{MarginContext, NormalisationMode, RestrictionSet};
use crate::samplers::{accept_reject_sample, soft_sign_sample, AcceptRejectConfig, SamplerKind, SliceConfig};
use crate::stats::{histogram, ks_two_sample, KsResult};

/// Posterior under p(B, Σ) ∝ |Σ|^{−(n+1)/2}:
/// Σ | Y ~ IW(ÛᵀÛ, T − k) and B | Σ, Y ~ MN(B̂, Σ, (XᵀX)⁻¹).
#[derive(Clone, Debug)]
pub struct NiwPosterior {
    data: VarData,
    b_hat: Matrix,
    xtx_chol: Matrix,
    scale: Matrix,
    scale_chol: Matrix,
    dof: f64,
}

pub fn fit_niw(stats: &SufficientStats) -> Result<NiwPosterior> {
    let n = stats.data.n();
    let dof = stats.data.t_eff() as f64 - stats.data.k() as f64;
    if !(dof > n as f64 - 1.0) {
        return Err(SvarError::InsufficientData(format!(
            "inverse-Wishart degrees of freedom {dof} must exceed {}",
            n - 1
        )));
    }
    let scale = (&stats.scatter + stats.scatter.transpose()) * 0.5;
    let scale_chol = cholesky_lower(&scale)?;
    Ok(NiwPosterior {
        data: stats.data.clone(),
        b_hat: stats.b_hat.clone(),
        xtx_chol: stats.xtx_chol.clone(),
        scale,
        scale_chol,
        dof,
    })
}

/// One posterior draw of φ together with its innovations u_t = y_t − B x_t.
#[derive(Clone, Debug)]
pub struct PhiDraw {
    pub phi: ReducedFormParams,
    pub innovations: InnovationSeries,
}

impl NiwPosterior {
    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn scale(&self) -> &Matrix {
        &self.scale
    }

    pub fn b_mean(&self) -> &Matrix {
        &self.b_hat
    }

    pub fn data(&self) -> &VarData {
        &self.data
    }

    /// E[Σ] = S / (ν − n − 1), defined for ν > n + 1.
    pub fn sigma_mean(&self) -> Option<Matrix> {
        let n = self.n() as f64;
        (self.dof > n + 1.0).then(|| &self.scale / (self.dof - n - 1.0))
    }

    /// φ at the posterior mean of (B, Σ), with its innovations.
    pub fn mean_phi(&self) -> Result<PhiDraw> {
        let sigma = self
            .sigma_mean()
            .ok_or_else(|| SvarError::InsufficientData("posterior mean of Sigma undefined".into()))?;
        self.with_coefficients(self.b_hat.clone(), &sigma)
    }

    fn with_coefficients(&self, b: Matrix, sigma: &Matrix) -> Result<PhiDraw> {
        let innovations = self.data.innovations(&b);
        let phi = ReducedFormParams::from_covariance(self.data.p, self.data.has_constant, b, sigma)?;
        Ok(PhiDraw { phi, innovations })
    }

    /// Σ via the Bartlett decomposition, then B | Σ.
    pub fn draw_sigma<R: Rng + ?Sized>(&self, rng: &mut R) -> Matrix {
        let n = self.n();
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            let chi = ChiSquared::new(self.dof - i as f64).expect("dof checked at fit");
            a[(i, i)] = rng.sample(chi).sqrt();
            for j in 0..i {
                a[(i, j)] = rng.sample(StandardNormal);
            }
        }
        // Σ⁻¹ = C⁻ᵀ A Aᵀ C⁻¹ ~ W(S⁻¹, ν) with S = C Cᵀ, so Σ = X Xᵀ with X = C A⁻ᵀ
        let xt = a
            .solve_lower_triangular(&self.scale_chol.transpose())
            .expect("Bartlett diagonal is positive");
        let sigma = xt.tr_mul(&xt);
        (&sigma + sigma.transpose()) * 0.5
    }

    pub fn draw_phi<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PhiDraw> {
        let sigma = self.draw_sigma(rng);
        let p = cholesky_lower(&sigma)?;
        let (n, k) = (self.n(), self.b_hat.ncols());
        let z = Matrix::from_fn(n, k, |_, _| rng.sample(StandardNormal));
        // B = B̂ + P Z L⁻¹ with L Lᵀ = XᵀX
        let zl = self
            .xtx_chol
            .transpose()
            .solve_upper_triangular(&z.transpose())
            .expect("XᵀX is positive definite")
            .transpose();
        let b = &self.b_hat + p * zl;
        self.with_coefficients(b, &sigma)
    }
}

/// Settings for the (φ, Q) loop.
#[derive(Clone, Debug)]
pub struct JointConfig {
    pub sampler: SamplerKind,
    pub n_phi_kept: usize,
    pub slice: SliceConfig,
    pub accept_reject: AcceptRejectConfig,
    /// Accepted draws per φ for accept-reject.
    pub accept_reject_draws: usize,
    /// Resampled draws per φ for the soft-sign sampler.
    pub k: usize,
    pub max_phi_attempts_before_floor: usize,
    pub plausibility_floor: f64,
    pub seed: u64,
}

impl JointConfig {
    pub fn new(sampler: SamplerKind, n_phi_kept: usize, seed: u64) -> Self {
        Self {
            sampler,
            n_phi_kept,
            slice: SliceConfig::default(),
            accept_reject: AcceptRejectConfig::default(),
            accept_reject_draws: 1000,
            k: 1000,
            max_phi_attempts_before_floor: 100_000,
            plausibility_floor: 1e-4,
            seed,
        }
    }
}

/// Outcome for one φ attempt.
#[derive(Clone, Debug)]
pub struct JointDrawRecord {
    pub phi_index: usize,
    pub nonempty: bool,
    /// Q draws tried (accept-reject) or target evaluations (soft-sign).
    pub effort: u64,
    pub ess_percent: Option<f64>,
    pub phi: ReducedFormParams,
    /// Raw draws; accept-reject draws all carry weight 1.
    pub draws: Vec<Matrix>,
    pub weights: Vec<f64>,
    /// Indices into `draws` after resampling.
    pub resampled: Vec<usize>,
}

impl JointDrawRecord {
    pub fn feasible_draws(&self) -> impl Iterator<Item = &Matrix> {
        self.draws
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(q, _)| q)
    }

    pub fn resampled_draws(&self) -> impl Iterator<Item = &Matrix> {
        self.resampled.iter().map(|&i| &self.draws[i])
    }
}

/// Verdict and effort for one φ attempt, kept or not.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptOutcome {
    pub index: usize,
    pub nonempty: bool,
    pub effort: u64,
}

#[derive(Clone, Debug)]
pub struct JointRun {
    /// Kept (non-empty) records in attempt order.
    pub records: Vec<JointDrawRecord>,
    /// One entry per φ attempt.
    pub log: Vec<AttemptOutcome>,
    pub attempts: usize,
}

impl JointRun {
    pub fn plausibility_percent(&self) -> Result<f64> {
        posterior_plausibility(self.records.len(), self.attempts)
    }

    pub fn mean_ess_percent(&self) -> Option<f64> {
        let ess: Vec<f64> = self.records.iter().filter_map(|r| r.ess_percent).collect();
        (!ess.is_empty()).then(|| ess.iter().sum::<f64>() / ess.len() as f64)
    }

    pub fn total_effort(&self) -> u64 {
        self.records.iter().map(|r| r.effort).sum()
    }
}

/// 100 × non-empty verdicts / φ attempts.
pub fn posterior_plausibility(nonempty: usize, attempts: usize) -> Result<f64> {
    if attempts == 0 {
        return Err(SvarError::InsufficientData("no phi attempts".into()));
    }
    Ok(100.0 * nonempty as f64 / attempts as f64)
}

/// Run the Q-sampler at a fixed φ. Returns raw draws, weights, resampled
/// indices, effort and ESS; an empty draw list is an empty verdict.
#[allow(clippy::type_complexity)]
pub fn sample_q(
    set: &RestrictionSet,
    phi: &ReducedFormParams,
    innovations: Option<&InnovationSeries>,
    cfg: &JointConfig,
    rng: &mut RngStream,
) -> Result<(Vec<Matrix>, Vec<f64>, Vec<usize>, u64, Option<f64>)> {
    let irf = compute_irf_coefficients(phi, set.required_horizon());
    let ctx = MarginContext { irf: &irf, innovations };
    match cfg.sampler {
        SamplerKind::AcceptReject => {
            let prepared = set.prepare(phi, &ctx)?;
            let batch = accept_reject_sample(&prepared, cfg.accept_reject_draws, &cfg.accept_reject, rng)?;
            let len = batch.draws.len();
            Ok((batch.draws, vec![1.0; len], (0..len).collect(), batch.total_attempts, None))
        }
        SamplerKind::SoftSign => {
            let prepared = set.prepare(phi, &ctx)?;
            let batch = soft_sign_sample(&prepared, &cfg.slice, rng)?;
            if batch.is_empty_verdict() {
                return Ok((vec![], vec![], vec![], batch.evaluations, None));
            }
            let ess = batch.ess_percent();
            let idx = crate::soft::resample_indices(&batch.weights, cfg.k, rng)?;
            Ok((batch.draws, batch.weights, idx, batch.evaluations, ess))
        }
    }
}

/// The restriction set each sampler runs against: accept-reject uses the
/// configured normalisation, the soft sampler keeps the document's mode.
pub fn set_for_sampler(set: &RestrictionSet, sampler: SamplerKind, ar_mode: NormalisationMode) -> RestrictionSet {
    match sampler {
        SamplerKind::AcceptReject => set.with_mode(ar_mode),
        SamplerKind::SoftSign => set.clone(),
    }
}

fn attempt(post: &NiwPosterior, set: &RestrictionSet, cfg: &JointConfig, index: usize) -> Result<JointDrawRecord> {
    let mut rng = RngStream::new(cfg.seed, index as u64);
    let draw = post.draw_phi(&mut rng)?;
    let innovations = set.has_narrative().then_some(&draw.innovations);
    let (draws, weights, resampled, effort, ess) = sample_q(set, &draw.phi, innovations, cfg, &mut rng)?;
    Ok(JointDrawRecord {
        phi_index: index,
        nonempty: !draws.is_empty(),
        effort,
        ess_percent: ess,
        phi: draw.phi,
        draws,
        weights,
        resampled,
    })
}

/// Draw φ until `n_phi_kept` non-empty identified sets are found.
///
/// Attempt a uses RNG stream a, attempts run in parallel chunks and are merged
/// in attempt order, so the result does not depend on scheduling.
pub fn run_joint_sampler(post: &NiwPosterior, set: &RestrictionSet, cfg: &JointConfig) -> Result<JointRun> {
    let mut run = JointRun {
        records: Vec::with_capacity(cfg.n_phi_kept),
        log: Vec::new(),
        attempts: 0,
    };
    if cfg.n_phi_kept == 0 {
        return Ok(run);
    }
    let chunk = (rayon::current_num_threads() * 4).max(8);
    let mut next = 0usize;
    'outer: loop {
        let results: Vec<Result<JointDrawRecord>> = (next..next + chunk)
            .into_par_iter()
            .map(|i| attempt(post, set, cfg, i))
            .collect();
        next += chunk;
        for result in results {
            let record = result?;
            run.attempts += 1;
            run.log.push(AttemptOutcome {
                index: record.phi_index,
                nonempty: record.nonempty,
                effort: record.effort,
            });
            if record.nonempty {
                run.records.push(record);
                if run.records.len() == cfg.n_phi_kept {
                    break 'outer;
                }
            }
            if run.attempts >= cfg.max_phi_attempts_before_floor
                && (run.records.len() as f64) < cfg.plausibility_floor * run.attempts as f64
            {
                return Err(SvarError::PlausibilityFloor {
                    kept: run.records.len(),
                    attempts: run.attempts,
                });
            }
        }
    }
    Ok(run)
}

/// Per-quantity comparison of the two samplers at a fixed φ.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuantityComparison {
    pub variable: usize,
    pub shock: usize,
    pub horizon: usize,
    pub lo: f64,
    pub hi: f64,
    pub accept_reject_counts: Vec<u64>,
    pub soft_sign_counts: Vec<u64>,
    pub ks: KsResult,
}

#[derive(Clone, Debug)]
pub struct ConditionalCheck {
    pub comparisons: Vec<QuantityComparison>,
    pub accept_reject_values: Vec<Vec<f64>>,
    pub soft_sign_values: Vec<Vec<f64>>,
}

/// Run both samplers at φ*, then histogram and KS-compare every requested
/// impulse response. `m` is the number of draws kept from each sampler.
///
/// The soft sampler runs first and settles emptiness; once it has found a
/// feasible Q the accept-reject search is left unbounded.
#[allow(clippy::too_many_arguments)]
pub fn conditional_posterior_check(
    phi: &ReducedFormParams,
    innovations: Option<&InnovationSeries>,
    set: &RestrictionSet,
    ar_mode: NormalisationMode,
    slice: &SliceConfig,
    m: usize,
    quantities: &[(usize, usize, usize)],
    bins: usize,
    seed: u64,
) -> Result<ConditionalCheck> {
    let horizon = quantities.iter().map(|q| q.2).max().unwrap_or(0);
    let irf = compute_irf_coefficients(phi, horizon.max(set.required_horizon()));
    let ctx = MarginContext { irf: &irf, innovations };

    let soft_prepared = set.prepare(phi, &ctx)?;
    let mut rng = RngStream::new(seed, 1);
    let batch = soft_sign_sample(&soft_prepared, &SliceConfig { m, ..*slice }, &mut rng)?;
    if batch.is_empty_verdict() {
        return Err(SvarError::EmptyVerdict {
            attempts: batch.len() as u64,
        });
    }
    let soft = batch.resample(m, &mut rng)?;

    let ar_prepared = set.with_mode(ar_mode).prepare(phi, &ctx)?;
    let ar = accept_reject_sample(
        &ar_prepared,
        m,
        &AcceptRejectConfig { max_attempts: u64::MAX },
        &mut RngStream::new(seed, 0),
    )?;

    let values = |draws: &[Matrix], &(i, j, h): &(usize, usize, usize)| -> Vec<f64> {
        draws.iter().map(|q| impulse_response(&irf, q, i, j, h, false)).collect()
    };
    let mut out = ConditionalCheck {
        comparisons: Vec::new(),
        accept_reject_values: Vec::new(),
        soft_sign_values: Vec::new(),
    };
    for q in quantities {
        let a = values(&ar.draws, q);
        let s = values(&soft, q);
        let lo = a.iter().chain(&s).copied().fold(f64::INFINITY, f64::min);
        let hi = a.iter().chain(&s).copied().fold(f64::NEG_INFINITY, f64::max);
        out.comparisons.push(QuantityComparison {
            variable: q.0,
            shock: q.1,
            horizon: q.2,
            lo,
            hi,
            accept_reject_counts: histogram(&a, lo, hi, bins),
            soft_sign_counts: histogram(&s, lo, hi, bins),
            ks: ks_two_sample(&a, &s),
        });
        out.accept_reject_values.push(a);
        out.soft_sign_values.push(s);
    }
    Ok(out)
}
