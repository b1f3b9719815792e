//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Runs as a plain binary (`harness = false`). A criterion that fails is
//! reported, not asserted, so the remaining criteria still run; the process
//! exits non-zero only if a criterion could not be evaluated at all.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use svarsoft::bivariate::{
    connected_identified_set, connected_restrictions, disconnected_identified_set, disconnected_restrictions,
    theta_of, Branch, BivariatePhi, ThetaIntervalSet,
};
use svarsoft::config::RunConfig;
use svarsoft::linalg::{draw_standard_matrix_normal, orthonormal_factor, Matrix, RngStream};
use svarsoft::model::{compute_irf_coefficients, InnovationSeries, ReducedFormParams};
use svarsoft::posterior::{
    conditional_posterior_check, run_joint_sampler, sample_q, set_for_sampler, JointConfig,
};
use svarsoft::restrictions::{
    BoundDirection, MarginContext, NormalisationMode, Restriction, RestrictionSet, Sign,
};
use svarsoft::robust::{identified_set_bounds, required_draws, robust_credible_interval, Interval};
use svarsoft::run::{bivariate_benchmark, load_posterior_inputs, oracle_position};
use svarsoft::samplers::{SamplerKind, SliceConfig};
use svarsoft::soft::importance_weight;
use svarsoft::stats::ks_one_sample;

const SEED: u64 = 20240917;
const PHI: (f64, f64, f64) = (1.0, -0.5, 1.0);
const REFERENCE_ESS: [[f64; 3]; 4] = [
    [78.36, 22.32, 2.17],
    [96.52, 80.62, 22.72],
    [99.65, 97.27, 80.92],
    [99.95, 99.67, 97.26],
];

enum Verdict {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Self {
        Self {
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            detail,
        }
    }
}

type Criterion = fn() -> Result<Outcome, String>;

fn phi() -> BivariatePhi {
    BivariatePhi::new(PHI.0, PHI.1, PHI.2).unwrap()
}

/// Soft-sign draws at the bivariate φ, resampled K = M times.
fn bivariate_soft(set: &RestrictionSet, delta: f64, m: usize, stream: u64) -> Result<(Vec<(f64, Branch)>, f64), String> {
    let mut cfg = JointConfig::new(SamplerKind::SoftSign, 1, SEED);
    cfg.slice = SliceConfig::with_delta(delta, m);
    cfg.k = m;
    let mut rng = RngStream::new(SEED, stream);
    let (draws, _, resampled, _, ess) =
        sample_q(set, &phi().reduced_form(), None, &cfg, &mut rng).map_err(|e| e.to_string())?;
    let thetas = resampled.iter().map(|&i| theta_of(&draws[i])).collect();
    Ok((thetas, ess.unwrap_or(0.0)))
}

fn uniform_ks(oracle: &ThetaIntervalSet, thetas: &[(f64, Branch)]) -> (f64, usize) {
    let positions: Vec<f64> = thetas.iter().filter_map(|&(t, b)| oracle_position(oracle, t, b)).collect();
    let outside = thetas.len() - positions.len();
    (ks_one_sample(&positions, |u| u.clamp(0.0, 1.0)).p_value, outside)
}

fn a1() -> Result<Outcome, String> {
    let oracle = connected_identified_set(&phi(), 1.0).map_err(|e| e.to_string())?;
    let set = connected_restrictions(1.0);
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, delta) in [1e-1, 1e-2, 1e-3, 1e-4].into_iter().enumerate() {
        let t = Instant::now();
        let (thetas, _) = bivariate_soft(&set, delta, 100_000, i as u64)?;
        let secs = t.elapsed().as_secs_f64();
        let (p, outside) = uniform_ks(&oracle, &thetas);
        pass &= p > 0.01 && secs < 60.0 && outside == 0;
        parts.push(format!("D={delta:e}: p={p:.4} ({secs:.1}s)"));
    }
    Ok(Outcome::check(pass, format!("KS vs Uniform[-1.10715, -0.58800]; {}", parts.join(", "))))
}

fn benchmark_config(omegas: &[f64], deltas: &[f64], m: usize, reps: usize) -> RunConfig {
    let yaml = format!(
        "mode: benchmark\nseed: {SEED}\nm: {m}\nbenchmark:\n  design: bivariate\n  omega_bars: {omegas:?}\n  deltas: {deltas:?}\n  replications: {reps}\n"
    );
    RunConfig::parse(&yaml).expect("benchmark config parses")
}

fn a2() -> Result<Outcome, String> {
    let omegas = [1.0, 0.1, 0.01];
    let deltas = [1e-1, 1e-2, 1e-3, 1e-4];
    let t = Instant::now();
    let rows = bivariate_benchmark(&benchmark_config(&omegas, &deltas, 10_000, 20)).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for row in rows.iter().filter(|r| r.algorithm == "soft-sign") {
        let oi = omegas.iter().position(|&w| Some(w) == row.omega_bar).unwrap();
        let di = deltas.iter().position(|&d| Some(d) == row.delta).unwrap();
        let gap = row.mean_ess_percent - REFERENCE_ESS[di][oi];
        worst = worst.max(gap.abs());
        cells.push(format!("{:.2}", row.mean_ess_percent));
    }
    Ok(Outcome::check(
        worst <= 3.0 && secs < 600.0,
        format!("max |ESS - table| = {worst:.2}pp, {secs:.0}s; ESS by row [{}]", cells.join(" ")),
    ))
}

fn a3() -> Result<Outcome, String> {
    let rows = bivariate_benchmark(&benchmark_config(&[0.01], &[1e-4], 10_000, 5)).map_err(|e| e.to_string())?;
    let rate = |alg: &str| rows.iter().find(|r| r.algorithm == alg).unwrap().effective_draws_per_second;
    let (soft, ar) = (rate("soft-sign"), rate("accept-reject"));
    let ratio = soft / ar;
    Ok(Outcome::check(
        ratio >= 10.0,
        format!("w=0.01, D=1e-4: {soft:.0} vs {ar:.0} effective draws/s, ratio {ratio:.1}"),
    ))
}

fn a4() -> Result<Outcome, String> {
    let oracle = disconnected_identified_set(&phi(), 0.5).map_err(|e| e.to_string())?;
    let (thetas, _) = bivariate_soft(&disconnected_restrictions(0.5), 1e-4, 1_000_000, 10)?;
    let first = thetas.iter().filter(|&&(t, b)| oracle.locate(t, b) == Some(0)).count();
    let share = 100.0 * first as f64 / thetas.len() as f64;
    let mut covered = true;
    for iv in &oracle.intervals {
        for end in [iv.lo, iv.hi] {
            covered &= thetas.iter().any(|&(t, b)| b == iv.branch && (t - end).abs() <= 0.01);
        }
    }
    Ok(Outcome::check(
        (share - 55.7).abs() <= 1.0 && covered,
        format!("first-interval share {share:.2}% (target 55.7 +/- 1), all endpoints covered: {covered}"),
    ))
}

fn random_restriction<R: Rng>(n: usize, periods: usize, rng: &mut R) -> Restriction {
    let var = rng.random_range(0..n);
    let shock = rng.random_range(0..n);
    let sign = if rng.random_bool(0.5) { Sign::Positive } else { Sign::Negative };
    let other = (var + rng.random_range(1..n)) % n;
    match rng.random_range(0..8) {
        0 => Restriction::IrfSign {
            variable: var,
            shock,
            horizon: rng.random_range(0..3),
            sign,
            threshold: if rng.random_bool(0.2) { rng.random_range(0.0..0.5) } else { 0.0 },
            cumulative: rng.random_bool(0.3),
        },
        1 => Restriction::IrfRanking {
            variable: var,
            shock,
            horizon: rng.random_range(0..3),
            versus: rng.random_range(0..3),
            cumulative: rng.random_bool(0.3),
        },
        2 => Restriction::StructuralSign { variable: var, shock, sign },
        3 => Restriction::ElasticityBound {
            numerator: var,
            denominator: other,
            shock,
            bound: rng.random_range(0.0..2.0),
            direction: if rng.random_bool(0.5) { BoundDirection::Upper } else { BoundDirection::Lower },
            denominator_sign: rng.random_bool(0.5).then_some(sign),
        },
        4 => Restriction::NarrativeShockSign {
            shock,
            period: rng.random_range(0..periods),
            sign,
        },
        5 => Restriction::NarrativeHdMost {
            variable: var,
            shock,
            period: rng.random_range(0..periods - 2),
            span: rng.random_range(0..2),
        },
        6 => Restriction::NarrativeHdLeast {
            variable: var,
            shock,
            period: rng.random_range(0..periods - 2),
            span: rng.random_range(0..2),
        },
        _ => Restriction::SignNormalisation { shock },
    }
}

fn random_phi<R: Rng>(n: usize, rng: &mut R) -> ReducedFormParams {
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = rng.random_range(0.2..2.0);
        for j in 0..i {
            l[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    let p = rng.random_range(0..3);
    let b = Matrix::from_fn(n, n * p + 1, |_, _| rng.random_range(-0.4..0.4));
    ReducedFormParams::new(p, true, b, l).unwrap()
}

fn a5() -> Result<Outcome, String> {
    let mut rng = RngStream::new(SEED, 5);
    let periods = 12;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut cases = 0;
    while cases < 100_000 {
        let n = rng.random_range(2..5);
        let phi = random_phi(n, &mut rng);
        let restrictions: Vec<Restriction> = (0..rng.random_range(1..6)).map(|_| random_restriction(n, periods, &mut rng)).collect();
        let names = |p: &str| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        let normalised = if rng.random_bool(0.5) { (0..n).collect() } else { vec![] };
        let Ok(set) = RestrictionSet::new(names("y"), names("e"), restrictions, normalised, NormalisationMode::Soft) else {
            continue;
        };
        let innovations = InnovationSeries::new(draw_standard_matrix_normal(periods, &mut rng).columns(0, n).into_owned());
        let irf = compute_irf_coefficients(&phi, set.required_horizon());
        let ctx = MarginContext { irf: &irf, innovations: Some(&innovations) };
        let prepared = set.prepare(&phi, &ctx).map_err(|e| e.to_string())?;
        let q = orthonormal_factor(&draw_standard_matrix_normal(n, &mut rng)).map_err(|e| e.to_string())?;
        let delta = 10f64.powf(rng.random_range(-6.0..0.0));
        let margins = prepared.margins(&q);
        let w = importance_weight(&margins, delta);
        let cap = 2f64.powi(margins.len() as i32);
        if !(0.0..=cap).contains(&w) {
            violations += 1;
        }
        worst_excess = worst_excess.max(w - cap);
        cases += 1;
    }
    let boundary = importance_weight(&[0.0], 1e-3);
    Ok(Outcome::check(
        violations == 0 && boundary == 2.0,
        format!("{cases} cases, {violations} weights outside [0, 2^s]; max(w - 2^s) = {worst_excess:.3e}; s=1 margin 0 gives {boundary}"),
    ))
}

fn logistic(x: f64, d: f64) -> f64 {
    0.5 * (1.0 + (x / (2.0 * d)).tanh())
}

/// E_Δ[θ] by quadrature: under f_Δ the angle has density ∝ Π Λ(m(θ), Δ)
/// on each branch of O(2), with margins written out for the bivariate design.
fn soft_mean_theta(delta: f64, omega: f64) -> f64 {
    let (s11, s21, s22) = PHI;
    // Σ_tr⁻¹ columns
    let inv = [[1.0 / s11, 0.0], [-s21 / (s11 * s22), 1.0 / s22]];
    let steps = 2_000_000;
    let (mut num, mut den) = (0.0, 0.0);
    for branch in 0..2 {
        for k in 0..steps {
            let t = -PI + 2.0 * PI * k as f64 / steps as f64;
            let (s, c) = t.sin_cos();
            let q1 = [c, s];
            let q2 = if branch == 0 { [-s, c] } else { [s, -c] };
            let a = [s11 * q1[0], s21 * q1[0] + s22 * q1[1]];
            let b = [s11 * q2[0], s21 * q2[0] + s22 * q2[1]];
            let margins = [
                a[0],
                -a[1],
                b[0],
                b[1],
                omega * b[0] - b[1],
                inv[0][0] * q1[0] + inv[1][0] * q1[1],
                inv[0][1] * q2[0] + inv[1][1] * q2[1],
            ];
            let l: f64 = margins.iter().map(|&m| logistic(m, delta)).product();
            num += t * l;
            den += l;
        }
    }
    num / den
}

fn a6() -> Result<Outcome, String> {
    let oracle = connected_identified_set(&phi(), 1.0).map_err(|e| e.to_string())?;
    let hard = 0.5 * (oracle.intervals[0].lo + oracle.intervals[0].hi);
    let gaps: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&d| (soft_mean_theta(d, 1.0) - hard).abs()).collect();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    Ok(Outcome::check(
        monotone && gaps[3] < 1e-3,
        format!("|E_D[theta] - E_f[theta]| = {}", gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(", ")),
    ))
}

fn a7() -> Result<Outcome, String> {
    let mut rng = RngStream::new(SEED, 7);
    let thetas: Vec<f64> = (0..100_000)
        .map(|_| theta_of(&orthonormal_factor(&draw_standard_matrix_normal(2, &mut rng)).unwrap()).0)
        .collect();
    let p = ks_one_sample(&thetas, |t| ((t + PI) / (2.0 * PI)).clamp(0.0, 1.0)).p_value;
    let draws = 1_000_000;
    let (mut first, mut second) = ([0.0; 9], [0.0; 9]);
    for _ in 0..draws {
        let q = orthonormal_factor(&draw_standard_matrix_normal(3, &mut rng)).unwrap();
        for (k, x) in q.iter().enumerate() {
            first[k] += x;
            second[k] += x * x;
        }
    }
    let mean_dev = first.iter().map(|s| (s / draws as f64).abs()).fold(0.0, f64::max);
    let var_dev = second.iter().map(|s| (s / draws as f64 - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    Ok(Outcome::check(
        p > 0.01 && mean_dev <= 0.01 && var_dev <= 0.01,
        format!("n=2 KS p={p:.4}; n=3 max |E q| = {mean_dev:.2e}, max |E q^2 - 1/3| = {var_dev:.2e}"),
    ))
}

fn a8() -> Result<Outcome, String> {
    let m = required_draws(189, 0.05, 0.05).map_err(|e| e.to_string())?;
    Ok(Outcome::check(m == 20_713, format!("required_draws(189, 0.05, 0.05) = {m}")))
}

/// Shortest [a, b] with a from the lower and b from the upper bounds that
/// contains at least ⌈αn⌉ records; ties go to the smaller a.
fn brute_force_robust(bounds: &[Interval], alpha: f64) -> Interval {
    let need = ((alpha * bounds.len() as f64) - 1e-9).ceil() as usize;
    let mut best: Option<Interval> = None;
    let mut lows: Vec<f64> = bounds.iter().map(|b| b.lo).collect();
    lows.sort_by(f64::total_cmp);
    for &a in &lows {
        for cand in bounds.iter().map(|b| b.hi).filter(|&b| b >= a) {
            let count = bounds.iter().filter(|r| r.lo >= a && r.hi <= cand).count();
            if count >= need && best.is_none_or(|cur| cand - a < cur.hi - cur.lo) {
                best = Some(Interval { lo: a, hi: cand });
            }
        }
    }
    best.unwrap()
}

fn a9() -> Result<Outcome, String> {
    let (thetas, _) = bivariate_soft(&connected_restrictions(1.0), 1e-4, 100_000, 9)?;
    let eta: Vec<f64> = thetas.iter().map(|&(t, _)| -PHI.0 * t.sin()).collect();
    let found = identified_set_bounds(eta).map_err(|e| e.to_string())?;
    let oracle = connected_identified_set(&phi(), 1.0).map_err(|e| e.to_string())?;
    let iv = &oracle.intervals[0];
    // −σ₁₁ sin θ is decreasing on the interval, which lies inside (−π/2, 0).
    let (lo, hi) = (-PHI.0 * iv.hi.sin(), -PHI.0 * iv.lo.sin());
    let bound_err = (found.lo - lo).abs().max((found.hi - hi).abs());

    let mut rng = RngStream::new(SEED, 90);
    let mut mismatches = 0;
    for _ in 0..20 {
        let records: Vec<Interval> = (0..200)
            .map(|_| {
                let a: f64 = rng.random_range(-2.0..1.0);
                Interval::new(a, a + rng.random_range(0.0..1.5))
            })
            .collect();
        for alpha in [0.68, 0.9] {
            let fast = robust_credible_interval(&records, alpha).map_err(|e| e.to_string())?;
            if fast != brute_force_robust(&records, alpha) {
                mismatches += 1;
            }
        }
    }
    Ok(Outcome::check(
        bound_err <= 1e-3 && mismatches == 0,
        format!("eta_120 bounds [{:.5}, {:.5}] vs [{lo:.5}, {hi:.5}]; robust CI mismatches {mismatches}/40", found.lo, found.hi),
    ))
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn oil_data() -> Option<PathBuf> {
    let path = std::env::var_os("SVARSOFT_OIL_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("fixtures/data/oil_market.csv"));
    path.exists().then_some(path)
}

fn a10() -> Result<Outcome, String> {
    let Some(data) = oil_data() else {
        return Ok(Outcome {
            verdict: Verdict::Skip,
            detail: "oil data not found (set SVARSOFT_OIL_DATA or place fixtures/data/oil_market.csv)".into(),
        });
    };
    let fixtures = workspace_root().join("fixtures");
    let mut cfg = RunConfig::load(&fixtures.join("oil_standard.yaml")).map_err(|e| e.to_string())?;
    cfg.dataset.as_mut().unwrap().path = data;
    cfg.seed = SEED;
    cfg.delta = 1e-5;
    let inputs = load_posterior_inputs(&cfg).map_err(|e| e.to_string())?;
    let mut plaus = Vec::new();
    let mut ess = None;
    for sampler in [SamplerKind::SoftSign, SamplerKind::AcceptReject] {
        let set = set_for_sampler(&inputs.set, sampler, cfg.accept_reject.normalisation);
        let mut jc = JointConfig::new(sampler, 100, SEED);
        jc.slice = SliceConfig { m: 1000, delta: 1e-5, ..cfg.slice_config() };
        jc.accept_reject = cfg.accept_reject_config();
        jc.accept_reject_draws = 1000;
        jc.k = 1000;
        let run = run_joint_sampler(&inputs.posterior, &set, &jc).map_err(|e| e.to_string())?;
        plaus.push(run.plausibility_percent().map_err(|e| e.to_string())?);
        if sampler == SamplerKind::SoftSign {
            ess = run.mean_ess_percent();
        }
    }
    let ess = ess.unwrap_or(0.0);
    let mean = inputs.posterior.mean_phi().map_err(|e| e.to_string())?;
    let n = inputs.set.n();
    let quantities: Vec<_> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j, 0))).collect();
    let check = conditional_posterior_check(
        &mean.phi,
        inputs.set.has_narrative().then_some(&mean.innovations),
        &inputs.set,
        cfg.accept_reject.normalisation,
        &SliceConfig { m: 1000, delta: 1e-5, ..cfg.slice_config() },
        1000,
        &quantities,
        50,
        SEED,
    )
    .map_err(|e| e.to_string())?;
    let min_p = check.comparisons.iter().map(|c| c.ks.p_value).fold(f64::INFINITY, f64::min);
    let pass = plaus[0] >= 10.0 * plaus[1] && (80.0..=95.0).contains(&ess) && min_p > 0.01;
    Ok(Outcome::check(
        pass,
        format!(
            "plausibility soft {:.1}% vs accept-reject {:.2}%; mean ESS {ess:.1}%; min KS p {min_p:.4}",
            plaus[0], plaus[1]
        ),
    ))
}

fn run_cli(config: &Path, out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_svarsoft"))
        .args(["run", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "error")
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("{}: {}", config.display(), String::from_utf8_lossy(&status.stderr)));
    }
    Ok(())
}

/// Files that carry wall-clock measurements.
const TIMING_FILES: [&str; 3] = ["timing.json", "benchmark_timing.csv", "benchmark_table.txt"];

fn compare_dirs(a: &Path, b: &Path) -> Result<Vec<String>, String> {
    let mut differing = Vec::new();
    let mut names: Vec<_> = std::fs::read_dir(a)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| !TIMING_FILES.contains(&n.as_str()))
        .collect();
    names.sort();
    for name in names {
        let x = std::fs::read(a.join(&name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(&name)).map_err(|e| format!("{name}: {e}"))?;
        if x != y {
            differing.push(name);
        }
    }
    Ok(differing)
}

fn a11() -> Result<Outcome, String> {
    let fixtures = workspace_root().join("fixtures");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let restrictions = dir.path().join("signs.cfg");
    std::fs::write(
        &restrictions,
        "variables: [REA, PROD, RPO]\nshocks: [demand, oil_specific, supply]\nrestrictions:\n  \
         - {kind: irf-sign, variable: REA, shock: demand, horizon: 0, sign: \"+\"}\n  \
         - {kind: irf-sign, variable: PROD, shock: supply, horizon: 0, sign: \"-\"}\n  \
         - {kind: irf-sign, variable: RPO, shock: oil_specific, horizon: 0, sign: \"+\"}\n  \
         - {kind: narrative-shock-sign, shock: supply, sign: \"+\", dates: [1990-08]}\n",
    )
    .map_err(|e| e.to_string())?;
    let data = fixtures.join("synthetic_oil.csv");
    let common = format!(
        "seed: 11\nrestrictions: {}\ndataset: {{path: {}}}\nlags: 4\nhorizons: 6\nm: 200\nphi_kept: 8\ndelta: 1.0e-4\n",
        restrictions.display(),
        data.display()
    );
    let configs = [
        ("standard", format!("mode: standard\n{common}")),
        ("standard-ar", format!("mode: standard\nsampler: accept-reject\n{common}")),
        ("robust", format!("mode: robust\n{common}robust: {{iso_draw_deltas: [0.05, 0.1]}}\n")),
        ("conditional", format!("mode: conditional-check\n{common}conditional_check: {{m: 300, bins: 10}}\n")),
        ("benchmark", format!("mode: benchmark\n{common}benchmark: {{design: posterior, deltas: [0.01]}}\n")),
        (
            "bivariate",
            format!(
                "mode: bivariate-demo\nseed: 3\nm: 2000\ndelta: 1.0e-3\nrestrictions: {}\nbivariate: {{design: connected}}\n",
                fixtures.join("bivariate_connected.cfg").display()
            ),
        ),
        (
            "bivariate-benchmark",
            "mode: benchmark\nseed: 4\nm: 500\nbenchmark: {design: bivariate, omega_bars: [1.0], deltas: [0.01], replications: 2}\n".into(),
        ),
    ];
    let mut differing = Vec::new();
    for (name, text) in &configs {
        let path = dir.path().join(format!("{name}.yaml"));
        std::fs::write(&path, text).map_err(|e| e.to_string())?;
        let (first, second) = (dir.path().join(format!("{name}-1")), dir.path().join(format!("{name}-2")));
        run_cli(&path, &first)?;
        run_cli(&path, &second)?;
        differing.extend(compare_dirs(&first, &second)?.into_iter().map(|f| format!("{name}/{f}")));
    }
    Ok(Outcome::check(
        differing.is_empty(),
        format!("{} modes re-run with the same seed; differing files: {:?}", configs.len(), differing),
    ))
}

fn main() {
    let criteria: [(&str, &str, Criterion); 11] = [
        ("A1", "bivariate uniformity", a1),
        ("A2", "bivariate ESS table", a2),
        ("A3", "relative speed", a3),
        ("A4", "disconnected mixing", a4),
        ("A5", "weight bound", a5),
        ("A6", "soft-target mean convergence", a6),
        ("A7", "Haar sampler", a7),
        ("A8", "required draws", a8),
        ("A9", "robust-layer oracles", a9),
        ("A10", "oil replication", a10),
        ("A11", "determinism", a11),
    ];
    let only = std::env::var("SVARSOFT_ACCEPTANCE").ok();
    let mut errors = 0;
    for (id, name, f) in criteria {
        if only.as_deref().is_some_and(|o| !o.split(',').any(|x| x == id)) {
            continue;
        }
        let t = Instant::now();
        let line = match f() {
            Ok(o) => {
                let tag = match o.verdict {
                    Verdict::Pass => "PASS",
                    Verdict::Fail => "FAIL",
                    Verdict::Skip => "SKIP",
                };
                format!("{id} {tag} {name}: {}", o.detail)
            }
            Err(e) => {
                errors += 1;
                format!("{id} ERROR {name}: {e}")
            }
        };
        println!("{line} [{:.1}s]", t.elapsed().as_secs_f64());
    }
    if errors > 0 {
        std::process::exit(1);
    }
}
