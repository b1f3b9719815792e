use proptest::prelude::*;
use rand::Rng;

use svarsoft::linalg::{draw_standard_matrix_normal, orthonormal_factor, qr_positive_diag, Matrix, RngStream};
use svarsoft::model::{compute_irf_coefficients, ReducedFormParams};
use svarsoft::restrictions::{
    normalize_signs, parse_restrictions, MarginContext, NormalisationMode, PreparedRestrictions,
};
use svarsoft::soft::{effective_sample_size, importance_weight, log_f_delta_with_margins, log_logistic, logistic, resample_indices};

const SIGNS: &str = "
variables: [a, b, c]
shocks: [s1, s2, s3]
sign_normalisation: soft
restrictions:
  - {kind: irf-sign, variable: a, shock: s1, horizon: 0, sign: '+'}
  - {kind: irf-sign, variable: b, shock: s1, horizon: 1, sign: '-'}
  - {kind: irf-sign, variable: c, shock: s2, horizon: 0, sign: '+', cumulative: true}
  - {kind: structural-sign, variable: a, shock: s3, sign: '-'}
  - {kind: elasticity-bound, numerator: b, denominator: c, shock: s2, bound: 0.5, direction: upper}
";

fn random_phi(seed: u64) -> ReducedFormParams {
    let mut rng = RngStream::new(seed, 0);
    let mut l = Matrix::zeros(3, 3);
    for i in 0..3 {
        l[(i, i)] = rng.random_range(0.3..2.0);
        for j in 0..i {
            l[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    let b = Matrix::from_fn(3, 4, |_, _| rng.random_range(-0.5..0.5));
    ReducedFormParams::new(1, true, b, l).unwrap()
}

fn prepared(phi: &ReducedFormParams, mode: NormalisationMode) -> PreparedRestrictions {
    let set = parse_restrictions(SIGNS, None).unwrap().with_mode(mode);
    let irf = compute_irf_coefficients(phi, set.required_horizon());
    set.prepare(phi, &MarginContext { irf: &irf, innovations: None }).unwrap()
}

fn haar(seed: u64, n: usize) -> Matrix {
    orthonormal_factor(&draw_standard_matrix_normal(n, &mut RngStream::new(seed, 1))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weight_is_zero_or_between_one_and_two_to_the_s(seed in any::<u64>(), log_delta in -8.0f64..1.0) {
        let phi = random_phi(seed);
        let p = prepared(&phi, NormalisationMode::Soft);
        let q = haar(seed, 3);
        let m = p.margins(&q);
        let w = importance_weight(&m, 10f64.powf(log_delta));
        if p.is_feasible(&q) {
            prop_assert!(w >= 1.0 && w <= 2f64.powi(m.len() as i32), "w = {}", w);
        } else {
            prop_assert_eq!(w, 0.0);
        }
    }

    #[test]
    fn feasibility_agrees_with_margins(seed in any::<u64>()) {
        let phi = random_phi(seed);
        let p = prepared(&phi, NormalisationMode::Soft);
        let q = haar(seed, 3);
        prop_assert_eq!(p.is_feasible(&q), p.margins(&q).iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn sign_normalisation_is_idempotent(seed in any::<u64>()) {
        let phi = random_phi(seed);
        let q = haar(seed, 3);
        let once = normalize_signs(&phi, &q);
        prop_assert_eq!(normalize_signs(&phi, &once), once.clone());
        // every diagonal entry of A₀ = Q'Σ_tr⁻¹ is now nonnegative
        for j in 0..3 {
            prop_assert!(phi.sigma_tr_inv_column(j).dot(&once.column(j)) >= 0.0);
        }
        let mech = prepared(&phi, NormalisationMode::Mechanical);
        let mut canon = q.clone();
        mech.canonical(&mut canon);
        prop_assert_eq!(canon, once);
    }

    #[test]
    fn log_target_increases_with_each_margin(
        z in proptest::collection::vec(-3.0f64..3.0, 9),
        margins in proptest::collection::vec(-2.0f64..2.0, 1..6),
        idx in 0usize..6,
        bump in 1e-6f64..1.0,
        log_delta in -6.0f64..0.0,
    ) {
        let delta = 10f64.powf(log_delta);
        let i = idx % margins.len();
        let mut up = margins.clone();
        up[i] += bump;
        prop_assert!(log_f_delta_with_margins(&z, &up, delta) >= log_f_delta_with_margins(&z, &margins, delta));
    }

    #[test]
    fn log_logistic_matches_direct_form(x in -50.0f64..50.0, log_delta in -3.0f64..1.0) {
        let delta = 10f64.powf(log_delta);
        let direct = logistic(x, delta);
        prop_assume!(direct > 1e-300);
        prop_assert!((log_logistic(x, delta) - direct.ln()).abs() <= 1e-12 * direct.ln().abs().max(1.0));
    }

    #[test]
    fn ess_in_unit_range_and_resampling_skips_zero_weights(
        weights in proptest::collection::vec(prop_oneof![Just(0.0), 1.0f64..16.0], 1..200),
        seed in any::<u64>(),
    ) {
        prop_assume!(weights.iter().any(|&w| w > 0.0));
        let ess = effective_sample_size(&weights).unwrap();
        let positive = weights.iter().filter(|&&w| w > 0.0).count() as f64;
        prop_assert!(ess > 0.0 && ess <= 100.0 * positive / weights.len() as f64 + 1e-9);
        let idx = resample_indices(&weights, 100, &mut RngStream::new(seed, 2)).unwrap();
        prop_assert!(idx.iter().all(|&i| weights[i] > 0.0));
    }

    #[test]
    fn qr_factors_reconstruct_with_positive_diagonal(seed in any::<u64>(), n in 1usize..6) {
        let z = draw_standard_matrix_normal(n, &mut RngStream::new(seed, 3));
        let (q, r) = qr_positive_diag(&z).unwrap();
        prop_assert!((&q * &r - &z).amax() < 1e-10);
        prop_assert!((q.transpose() * &q - Matrix::identity(n, n)).amax() < 1e-12);
        for i in 0..n {
            prop_assert!(r[(i, i)] > 0.0);
            for j in 0..i {
                prop_assert_eq!(r[(i, j)], 0.0);
            }
        }
    }
}
