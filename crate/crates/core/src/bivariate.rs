//! Closed-form identified sets for the bivariate SVAR(0) testbeds.
//!
//! O(2) is parameterised by θ ∈ [−π, π] and a branch: rotations
//! [[cos θ, −sin θ], [sin θ, cos θ]] and reflections
//! [[cos θ, sin θ], [sin θ, −cos θ]].

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvarError};
use crate::linalg::Matrix;
use crate::model::ReducedFormParams;
use crate::restrictions::{BoundDirection, NormalisationMode, Restriction, RestrictionSet, Sign};

/// φ = (σ₁₁, σ₂₁, σ₂₂) with σ₂₁ < 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BivariatePhi {
    pub s11: f64,
    pub s21: f64,
    pub s22: f64,
}

impl BivariatePhi {
    pub fn new(s11: f64, s21: f64, s22: f64) -> Result<Self> {
        if !(s11 > 0.0 && s22 > 0.0 && s21 < 0.0) {
            return Err(SvarError::Config(format!(
                "bivariate phi needs s11 > 0, s21 < 0, s22 > 0; got ({s11}, {s21}, {s22})"
            )));
        }
        Ok(Self { s11, s21, s22 })
    }

    pub fn reduced_form(&self) -> ReducedFormParams {
        ReducedFormParams::bivariate(self.s11, self.s21, self.s22).expect("validated on construction")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Rotation,
    Reflection,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Rotation => "rotation",
            Branch::Reflection => "reflection",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaInterval {
    pub lo: f64,
    pub hi: f64,
    pub branch: Branch,
}

impl ThetaInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, theta: f64, branch: Branch) -> bool {
        branch == self.branch && theta >= self.lo && theta <= self.hi
    }
}

/// Disjoint closed intervals, sorted by branch then lower end. Empty means the
/// identified set is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaIntervalSet {
    pub intervals: Vec<ThetaInterval>,
}

impl ThetaIntervalSet {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(ThetaInterval::width).sum()
    }

    pub fn contains(&self, theta: f64, branch: Branch) -> bool {
        self.intervals.iter().any(|iv| iv.contains(theta, branch))
    }

    /// Index of the interval holding (θ, branch), if any.
    pub fn locate(&self, theta: f64, branch: Branch) -> Option<usize> {
        self.intervals.iter().position(|iv| iv.contains(theta, branch))
    }
}

/// arccot on the branch mapping negative arguments into (−π/2, 0).
fn arccot(x: f64) -> f64 {
    if x == 0.0 {
        FRAC_PI_2
    } else {
        (1.0 / x).atan()
    }
}

/// Identified set under the four impact signs and the elasticity bound ω̄:
/// a single rotation interval [arctan(σ₂₂/σ₂₁), arccot(σ₂₁/σ₂₂ − σ₁₁ω̄/σ₂₂)].
pub fn connected_identified_set(phi: &BivariatePhi, omega_bar: f64) -> Result<ThetaIntervalSet> {
    if !(omega_bar >= 0.0) {
        return Err(SvarError::Config("omega_bar must be nonnegative".into()));
    }
    let lo = (phi.s22 / phi.s21).atan();
    let hi = arccot(phi.s21 / phi.s22 - phi.s11 * omega_bar / phi.s22);
    Ok(ThetaIntervalSet {
        intervals: vec![ThetaInterval {
            lo,
            hi,
            branch: Branch::Rotation,
        }],
    })
}

/// Identified set under η₁₂₀ ≥ λ plus sign normalisation: a rotation interval
/// (empty once λ/σ₁₁ exceeds σ₂₂/‖(σ₂₁, σ₂₂)‖) and a reflection interval.
/// λ > σ₁₁ gives the empty set.
pub fn disconnected_identified_set(phi: &BivariatePhi, lambda: f64) -> Result<ThetaIntervalSet> {
    if !(lambda >= 0.0) {
        return Err(SvarError::Config("lambda must be nonnegative".into()));
    }
    if lambda > phi.s11 {
        return Ok(ThetaIntervalSet { intervals: vec![] });
    }
    let r = lambda / phi.s11;
    let base = (phi.s22 / phi.s21).atan();
    let mut intervals = Vec::with_capacity(2);
    if r <= phi.s22 / phi.s22.hypot(phi.s21) {
        intervals.push(ThetaInterval {
            lo: base,
            hi: (-r).asin(),
            branch: Branch::Rotation,
        });
    }
    intervals.push(ThetaInterval {
        lo: FRAC_PI_2,
        hi: (PI - r.asin()).min(PI + base),
        branch: Branch::Reflection,
    });
    Ok(ThetaIntervalSet { intervals })
}

/// θ = atan2(Q₂₁, Q₁₁); the branch is the sign of det Q.
pub fn theta_of(q: &Matrix) -> (f64, Branch) {
    let det = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
    let branch = if det >= 0.0 {
        Branch::Rotation
    } else {
        Branch::Reflection
    };
    (q[(1, 0)].atan2(q[(0, 0)]), branch)
}

pub fn q_of(theta: f64, branch: Branch) -> Matrix {
    let (s, c) = theta.sin_cos();
    match branch {
        Branch::Rotation => Matrix::from_row_slice(2, 2, &[c, -s, s, c]),
        Branch::Reflection => Matrix::from_row_slice(2, 2, &[c, s, s, -c]),
    }
}

fn names() -> (Vec<String>, Vec<String>) {
    (
        vec!["y1".into(), "y2".into()],
        vec!["e1".into(), "e2".into()],
    )
}

fn impact(variable: usize, shock: usize, sign: Sign, threshold: f64) -> Restriction {
    Restriction::IrfSign {
        variable,
        shock,
        horizon: 0,
        sign,
        threshold,
        cumulative: false,
    }
}

/// Impact signs (+, −) for shock 1 and (+, +) for shock 2, the bound
/// η₂₂₀ ≤ ω̄ η₁₂₀, and soft sign normalisation of both shocks.
pub fn connected_restrictions(omega_bar: f64) -> RestrictionSet {
    let (variables, shocks) = names();
    RestrictionSet::new(
        variables,
        shocks,
        vec![
            impact(0, 0, Sign::Positive, 0.0),
            impact(1, 0, Sign::Negative, 0.0),
            impact(0, 1, Sign::Positive, 0.0),
            impact(1, 1, Sign::Positive, 0.0),
            Restriction::ElasticityBound {
                numerator: 1,
                denominator: 0,
                shock: 1,
                bound: omega_bar,
                direction: BoundDirection::Upper,
                denominator_sign: Some(Sign::Positive),
            },
        ],
        vec![0, 1],
        NormalisationMode::Soft,
    )
    .expect("static construction")
}

/// η₁₂₀ ≥ λ with soft sign normalisation of both shocks.
pub fn disconnected_restrictions(lambda: f64) -> RestrictionSet {
    let (variables, shocks) = names();
    RestrictionSet::new(
        variables,
        shocks,
        vec![impact(0, 1, Sign::Positive, lambda)],
        vec![0, 1],
        NormalisationMode::Soft,
    )
    .expect("static construction")
}
