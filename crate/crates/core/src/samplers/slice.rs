//! Slice sampler on the soft-sign target with hyperrectangle shrinkage.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{minimize, NelderMeadOptions};
use crate::error::{Result, SvarError};
use crate::linalg::{draw_standard_matrix_normal, RngStream};
use crate::restrictions::PreparedRestrictions;
use crate::soft::{Evaluation, SoftTarget, WeightedDrawBatch};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SliceConfig {
    /// Kept draws per chain.
    pub m: usize,
    pub delta: f64,
    pub width_small: f64,
    pub width_large: f64,
    /// Probability of the small width.
    pub width_mix: f64,
    /// Δ₀ for the initial optimisation; `None` uses max(0.1, 1000Δ).
    pub init_delta: Option<f64>,
    pub max_shrink: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl Default for SliceConfig {
    fn default() -> Self {
        Self {
            m: 1000,
            delta: 1e-5,
            width_small: 2.0,
            width_large: 6.0,
            width_mix: 0.95,
            init_delta: None,
            max_shrink: 1000,
            burn_in: 0,
            thin: 1,
        }
    }
}

impl SliceConfig {
    pub fn with_delta(delta: f64, m: usize) -> Self {
        Self {
            delta,
            m,
            ..Self::default()
        }
    }

    pub fn effective_init_delta(&self) -> f64 {
        self.init_delta.unwrap_or_else(|| (1000.0 * self.delta).max(0.1))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(SvarError::Config(msg.to_string()));
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return bad("delta must be positive");
        }
        if !(self.effective_init_delta() >= self.delta) {
            return bad("init_delta must be at least delta");
        }
        if !(self.width_mix > 0.0 && self.width_mix <= 1.0) {
            return bad("width_mix must lie in (0, 1]");
        }
        if !(self.width_small > 0.0 && self.width_large > 0.0) {
            return bad("slice widths must be positive");
        }
        if self.m == 0 {
            return bad("M must be at least 1");
        }
        if self.thin == 0 {
            return bad("thin must be at least 1");
        }
        if self.max_shrink == 0 {
            return bad("max_shrink must be at least 1");
        }
        Ok(())
    }
}

/// Minimise −log f_{Δ₀} from a standard-normal start. Returns Z₀ (column-major)
/// and the number of evaluations.
pub fn initialise_chain(
    target: &SoftTarget<'_>,
    cfg: &SliceConfig,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, usize)> {
    let n = target.prepared().n();
    let init = target.with_delta(cfg.effective_init_delta())?;
    let z0 = draw_standard_matrix_normal(n, rng);
    let result = minimize(
        |z| -init.log_density(z),
        z0.as_slice(),
        NelderMeadOptions {
            diameter_tol: 1e-4,
            max_evals: 200 * n * n,
        },
    );
    Ok((result.x, result.evals))
}

/// One slice update of `z` at log-density `current.log_density`.
///
/// Returns the new point's evaluation and the number of target evaluations.
pub fn slice_step(
    z: &mut [f64],
    current: &Evaluation,
    target: &SoftTarget<'_>,
    cfg: &SliceConfig,
    rng: &mut RngStream,
) -> Result<(Evaluation, usize)> {
    let d = z.len();
    let exp: f64 = rng.sample(Exp1);
    let log_y = current.log_density - exp;
    let w = if rng.random::<f64>() < cfg.width_mix {
        cfg.width_small
    } else {
        cfg.width_large
    };
    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    for &zi in z.iter() {
        let l = zi - w * rng.random::<f64>();
        lo.push(l);
        hi.push(l + w);
    }
    let mut proposal = vec![0.0; d];
    for iter in 1..=cfg.max_shrink {
        for i in 0..d {
            proposal[i] = lo[i] + rng.random::<f64>() * (hi[i] - lo[i]);
        }
        let eval = target.evaluate(&proposal);
        if eval.log_density > log_y {
            z.copy_from_slice(&proposal);
            return Ok((eval, iter));
        }
        for i in 0..d {
            if proposal[i] < z[i] {
                lo[i] = proposal[i];
            } else if proposal[i] > z[i] {
                hi[i] = proposal[i];
            }
        }
    }
    Err(SvarError::ShrinkBudgetExceeded(cfg.max_shrink))
}

/// Initialise, then run `burn_in + m·thin` slice steps keeping every
/// `thin`-th state. Each kept state carries Q(Z) and its weight back to the
/// hard target; a batch with no positive weight is an empty verdict.
pub fn soft_sign_sample(
    prepared: &PreparedRestrictions,
    cfg: &SliceConfig,
    rng: &mut RngStream,
) -> Result<WeightedDrawBatch> {
    cfg.validate()?;
    let target = SoftTarget::new(prepared, cfg.delta)?;
    let (mut z, init_evals) = initialise_chain(&target, cfg, rng)?;
    let mut current = target.evaluate(&z);
    let mut evaluations = init_evals as u64 + 1;
    if !current.log_density.is_finite() {
        return Err(SvarError::RankDeficient { min_diag: 0.0 });
    }
    let mut batch = WeightedDrawBatch {
        draws: Vec::with_capacity(cfg.m),
        weights: Vec::with_capacity(cfg.m),
        evaluations: 0,
    };
    for _ in 0..cfg.burn_in {
        let (next, evals) = slice_step(&mut z, &current, &target, cfg, rng)?;
        current = next;
        evaluations += evals as u64;
    }
    for _ in 0..cfg.m {
        for _ in 0..cfg.thin {
            let (next, evals) = slice_step(&mut z, &current, &target, cfg, rng)?;
            current = next;
            evaluations += evals as u64;
        }
        batch.weights.push(target.weight(&current.margins));
        batch.draws.push(current.q.clone());
    }
    batch.evaluations = evaluations;
    Ok(batch)
}
