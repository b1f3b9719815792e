//! Q-samplers: accept-reject and the soft-sign slice sampler.

mod accept_reject;
pub mod nelder_mead;
mod slice;

use serde::{Deserialize, Serialize};

pub use accept_reject::{
    accept_reject_draw, accept_reject_sample, AcceptRejectBatch, AcceptRejectConfig, AcceptRejectDraw,
};
pub use slice::{initialise_chain, slice_step, soft_sign_sample, SliceConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    AcceptReject,
    SoftSign,
}

impl SamplerKind {
    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::AcceptReject => "accept-reject",
            SamplerKind::SoftSign => "soft-sign",
        }
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "accept-reject" => Ok(SamplerKind::AcceptReject),
            "soft-sign" => Ok(SamplerKind::SoftSign),
            other => Err(format!("unknown sampler `{other}`")),
        }
    }
}

/// Throughput of a finished run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub wall_seconds: f64,
    pub effective_draws: f64,
    pub effective_draws_per_second: f64,
    pub acceptance_rate: Option<f64>,
    pub ess_percent: Option<f64>,
}

/// Effective draws are the accepted draws for accept-reject.
pub fn accept_reject_efficiency(accepted: usize, attempts: u64, wall_seconds: f64) -> EfficiencyReport {
    let effective = accepted as f64;
    EfficiencyReport {
        wall_seconds,
        effective_draws: effective,
        effective_draws_per_second: effective / wall_seconds,
        acceptance_rate: Some(accepted as f64 / attempts as f64),
        ess_percent: None,
    }
}

/// Effective draws are ESS% × M / 100 for the soft-sign sampler.
pub fn soft_sign_efficiency(ess_percent: f64, m: usize, wall_seconds: f64) -> EfficiencyReport {
    let effective = ess_percent * m as f64 / 100.0;
    EfficiencyReport {
        wall_seconds,
        effective_draws: effective,
        effective_draws_per_second: effective / wall_seconds,
        acceptance_rate: None,
        ess_percent: Some(ess_percent),
    }
}
