//! Posterior sampling for sign-restricted structural VARs.
//!
//! Two samplers for the rotation matrix Q are provided: plain accept-reject
//! on Haar draws, and a slice sampler on a smoothed ("soft") version of the
//! restricted target whose output is importance-resampled back onto the hard
//! restrictions. Around them sit a diffuse normal-inverse-Wishart posterior
//! for the reduced form, prior-robust summaries built from per-φ
//! identified-set bounds, and closed-form bivariate identified sets used as
//! a test oracle.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bivariate;
pub mod config;
pub mod data;
pub mod error;
pub mod linalg;
pub mod model;
pub mod output;
pub mod posterior;
pub mod restrictions;
pub mod robust;
pub mod run;
pub mod samplers;
pub mod soft;
pub mod stats;

pub use error::{Result, SvarError};
