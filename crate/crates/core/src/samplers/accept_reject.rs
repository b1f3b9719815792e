//! Accept-reject on Haar draws of Q.

use crate::error::{Result, SvarError};
use crate::linalg::{draw_standard_matrix_normal, qr_positive_diag, Matrix, RngStream};
use crate::restrictions::PreparedRestrictions;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcceptRejectConfig {
    /// Attempts allowed before the identified set is declared empty.
    pub max_attempts: u64,
}

impl Default for AcceptRejectConfig {
    fn default() -> Self {
        Self { max_attempts: 1000 }
    }
}

impl AcceptRejectConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_attempts == 0 {
            return Err(SvarError::Config("accept-reject max_attempts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of one accept-reject search.
#[derive(Clone, Debug)]
pub struct AcceptRejectDraw {
    /// None when the budget ran out (empty verdict).
    pub q: Option<Matrix>,
    pub attempts: u64,
}

/// Draw Z, map to Q(Z), normalise if the set is mechanical, test feasibility;
/// repeat up to `max_attempts` times. Rank-deficient Z is redrawn and counted.
pub fn accept_reject_draw(
    prepared: &PreparedRestrictions,
    max_attempts: u64,
    rng: &mut RngStream,
) -> AcceptRejectDraw {
    let n = prepared.n();
    let mut attempts = 0;
    while attempts < max_attempts {
        attempts += 1;
        let z = draw_standard_matrix_normal(n, rng);
        let Ok((mut q, _)) = qr_positive_diag(&z) else {
            continue;
        };
        prepared.canonical(&mut q);
        if prepared.is_feasible(&q) {
            return AcceptRejectDraw {
                q: Some(q),
                attempts,
            };
        }
    }
    AcceptRejectDraw { q: None, attempts }
}

/// Accepted draws at a fixed φ.
#[derive(Clone, Debug)]
pub struct AcceptRejectBatch {
    pub draws: Vec<Matrix>,
    /// Attempts spent on the first (budgeted) draw.
    pub first_attempts: u64,
    pub total_attempts: u64,
}

impl AcceptRejectBatch {
    pub fn is_empty_verdict(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.draws.len() as f64 / self.total_attempts as f64
    }
}

/// `count` accepted draws. Only the first search is budgeted: once one
/// feasible Q has been found the set has positive Haar measure and later
/// searches are left to run until they succeed.
pub fn accept_reject_sample(
    prepared: &PreparedRestrictions,
    count: usize,
    cfg: &AcceptRejectConfig,
    rng: &mut RngStream,
) -> Result<AcceptRejectBatch> {
    cfg.validate()?;
    let first = accept_reject_draw(prepared, cfg.max_attempts, rng);
    let mut batch = AcceptRejectBatch {
        draws: Vec::with_capacity(count),
        first_attempts: first.attempts,
        total_attempts: first.attempts,
    };
    let Some(q) = first.q else {
        return Ok(batch);
    };
    if count == 0 {
        return Ok(batch);
    }
    batch.draws.push(q);
    while batch.draws.len() < count {
        let d = accept_reject_draw(prepared, u64::MAX, rng);
        batch.total_attempts += d.attempts;
        batch.draws.push(d.q.expect("unbounded search always succeeds"));
    }
    Ok(batch)
}
