//! The CLI pipeline: one function per mode, all output through `OutputWriter`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::bivariate::{
    connected_identified_set, connected_restrictions, disconnected_identified_set, disconnected_restrictions,
    theta_of, BivariatePhi, ThetaIntervalSet,
};
use crate::config::{BenchmarkDesign, BivariateDesign, Mode, RunConfig};
use crate::data::{load_dataset, Dataset, YearMonth};
use crate::error::{Result, SvarError};
use crate::linalg::{Matrix, RngStream};
use crate::model::{compute_irf_coefficients, estimate_reduced_form, impulse_response, IrfCoefficients, SufficientStats};
use crate::output::{fmt_f64, OutputWriter};
use crate::posterior::{
    conditional_posterior_check, fit_niw, run_joint_sampler, sample_q, set_for_sampler, JointConfig, JointRun,
    NiwPosterior,
};
use crate::restrictions::{parse_restrictions, MarginContext, RestrictionSet};
use crate::robust::{epsilon_for_draws, identified_set_bounds, summarise_quantity, Interval};
use crate::samplers::{accept_reject_sample, soft_sign_sample, AcceptRejectConfig, SamplerKind, SliceConfig};
use crate::stats::{ks_one_sample, median, quantile_sorted};

/// Files produced by a successful run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
}

pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut out = OutputWriter::create(&cfg.out)?;
    let clock = Instant::now();
    match cfg.mode {
        Mode::Standard | Mode::Robust => run_posterior(cfg, &mut out, clock)?,
        Mode::ConditionalCheck => run_conditional_check(cfg, &mut out, clock)?,
        Mode::BivariateDemo => run_bivariate_demo(cfg, &mut out, clock)?,
        Mode::Benchmark => run_benchmark(cfg, &mut out, clock)?,
    }
    Ok(RunReport {
        files: out.written().to_vec(),
    })
}

/// Dataset, restrictions and reduced-form posterior for the data-driven modes.
pub struct PosteriorInputs {
    pub dataset: Dataset,
    pub set: RestrictionSet,
    pub stats: SufficientStats,
    pub posterior: NiwPosterior,
}

pub fn load_posterior_inputs(cfg: &RunConfig) -> Result<PosteriorInputs> {
    let dcfg = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| SvarError::Config("no dataset configured".into()))?;
    let restrictions = cfg
        .restrictions
        .as_ref()
        .ok_or_else(|| SvarError::Config("no restrictions configured".into()))?;
    let (start, end) = cfg.date_window()?;
    let dataset = window(load_dataset(&dcfg.path, &dcfg.transforms)?, start, end)?;
    let text = std::fs::read_to_string(restrictions).map_err(|e| SvarError::io(restrictions, e))?;
    let set = parse_restrictions(&text, Some(&dataset.calendar(cfg.lags)))?;
    let dataset = dataset.select(set.variables())?;
    let (_, stats) = estimate_reduced_form(&dataset.values, cfg.lags, cfg.constant)?;
    let posterior = fit_niw(&stats)?;
    Ok(PosteriorInputs {
        dataset,
        set,
        stats,
        posterior,
    })
}

/// Rows with start ≤ date ≤ end.
pub fn window(data: Dataset, start: Option<YearMonth>, end: Option<YearMonth>) -> Result<Dataset> {
    if start.is_none() && end.is_none() {
        return Ok(data);
    }
    let keep: Vec<usize> = (0..data.len())
        .filter(|&t| start.is_none_or(|s| data.dates[t] >= s) && end.is_none_or(|e| data.dates[t] <= e))
        .collect();
    if keep.is_empty() {
        return Err(SvarError::InsufficientData("no observations inside the date window".into()));
    }
    Ok(Dataset {
        names: data.names.clone(),
        dates: keep.iter().map(|&t| data.dates[t]).collect(),
        values: Matrix::from_fn(keep.len(), data.n(), |r, c| data.values[(keep[r], c)]),
    })
}

fn joint_config(cfg: &RunConfig, sampler: SamplerKind, m: usize, k: usize, delta: f64) -> JointConfig {
    let mut jc = JointConfig::new(sampler, cfg.phi_kept, cfg.seed);
    jc.slice = SliceConfig {
        m,
        delta,
        ..cfg.slice_config()
    };
    jc.accept_reject = cfg.accept_reject_config();
    jc.accept_reject_draws = m;
    jc.k = k;
    jc.max_phi_attempts_before_floor = cfg.max_phi_attempts;
    jc
}

/// An impulse response η_ijh, cumulated or not.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Quantity {
    pub variable: usize,
    pub shock: usize,
    pub horizon: usize,
    pub cumulative: bool,
}

fn quantities(set: &RestrictionSet, horizons: usize, cumulative: &[String]) -> Result<Vec<Quantity>> {
    let n = set.n();
    let mut cum = vec![false; n];
    for name in cumulative {
        let i = set
            .variables()
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| SvarError::UnknownVariable(name.clone()))?;
        cum[i] = true;
    }
    let mut out = Vec::with_capacity(n * n * (horizons + 1));
    for (i, &cumulative) in cum.iter().enumerate() {
        for j in 0..n {
            for h in 0..=horizons {
                out.push(Quantity {
                    variable: i,
                    shock: j,
                    horizon: h,
                    cumulative,
                });
            }
        }
    }
    Ok(out)
}

fn value(irf: &IrfCoefficients, q: &Matrix, x: &Quantity) -> f64 {
    impulse_response(irf, q, x.variable, x.shock, x.horizon, x.cumulative)
}

fn q_columns(n: usize) -> Vec<String> {
    let mut cols = Vec::with_capacity(n * n);
    for r in 1..=n {
        for c in 1..=n {
            cols.push(format!("q_{r}_{c}"));
        }
    }
    cols
}

fn push_q(fields: &mut Vec<String>, q: &Matrix) {
    for r in 0..q.nrows() {
        for c in 0..q.ncols() {
            fields.push(fmt_f64(q[(r, c)]));
        }
    }
}

fn effective_draws(run: &JointRun, sampler: SamplerKind, m: usize) -> f64 {
    match sampler {
        SamplerKind::AcceptReject => run.records.iter().map(|r| r.draws.len() as f64).sum(),
        SamplerKind::SoftSign => run
            .records
            .iter()
            .map(|r| r.ess_percent.unwrap_or(0.0) / 100.0 * m as f64)
            .sum(),
    }
}

#[derive(Serialize)]
struct Timing {
    wall_seconds: f64,
    effective_draws: f64,
    effective_draws_per_second: f64,
    effective_draws_per_hour: f64,
}

impl Timing {
    fn new(clock: Instant, effective_draws: f64) -> Self {
        let wall_seconds = clock.elapsed().as_secs_f64();
        let per_second = effective_draws / wall_seconds.max(f64::MIN_POSITIVE);
        Timing {
            wall_seconds,
            effective_draws,
            effective_draws_per_second: per_second,
            effective_draws_per_hour: per_second * 3600.0,
        }
    }
}

fn run_posterior(cfg: &RunConfig, out: &mut OutputWriter, clock: Instant) -> Result<()> {
    let inputs = load_posterior_inputs(cfg)?;
    let robust = cfg.mode == Mode::Robust;
    let m = match (&cfg.robust.required_draws, robust) {
        (Some(r), true) => r.draws()? as usize,
        _ => cfg.m,
    };
    let k = cfg.k.unwrap_or(m);
    let set = set_for_sampler(&inputs.set, cfg.sampler, cfg.accept_reject.normalisation);
    let jc = joint_config(cfg, cfg.sampler, m, k, cfg.delta);
    let run = run_joint_sampler(&inputs.posterior, &set, &jc)?;
    let qs = quantities(&set, cfg.horizons, &cfg.cumulative)?;
    let irfs: Vec<IrfCoefficients> = run
        .records
        .par_iter()
        .map(|r| compute_irf_coefficients(&r.phi, cfg.horizons))
        .collect();

    if cfg.write_draws {
        write_draws(out, &run, set.n())?;
    }
    let mut attempts = out.table("phi_attempts.csv", "phi-attempts", &["attempt", "verdict", "effort"])?;
    for a in &run.log {
        let verdict = if a.nonempty { "nonempty" } else { "empty" };
        attempts.row([a.index.to_string(), verdict.to_string(), a.effort.to_string()])?;
    }
    attempts.finish()?;

    // Pooled resampled values per quantity, sorted.
    let pooled: Vec<Vec<f64>> = qs
        .par_iter()
        .map(|x| {
            let mut v: Vec<f64> = run
                .records
                .iter()
                .zip(&irfs)
                .flat_map(|(r, irf)| r.resampled_draws().map(move |q| value(irf, q, x)))
                .collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect();
    let names = |x: &Quantity| (set.variables()[x.variable].clone(), set.shocks()[x.shock].clone());
    let mut irf_table = out.table(
        "irf_summary.csv",
        "irf-summary",
        &["variable", "shock", "horizon", "cumulative", "alpha", "median", "lo", "hi"],
    )?;
    for (x, v) in qs.iter().zip(&pooled) {
        let (var, shock) = names(x);
        let med = quantile_sorted(v, 0.5);
        for &alpha in &cfg.alpha {
            let tail = (1.0 - alpha) / 2.0;
            irf_table.row([
                var.clone(),
                shock.clone(),
                x.horizon.to_string(),
                x.cumulative.to_string(),
                fmt_f64(alpha),
                fmt_f64(med),
                fmt_f64(quantile_sorted(v, tail)),
                fmt_f64(quantile_sorted(v, 1.0 - tail)),
            ])?;
        }
    }
    irf_table.finish()?;

    if robust {
        let alpha = cfg.robust.alpha;
        let rows: Vec<Result<_>> = qs
            .par_iter()
            .zip(&pooled)
            .map(|(x, v)| {
                let bounds = run
                    .records
                    .iter()
                    .zip(&irfs)
                    .map(|(r, irf)| identified_set_bounds(r.feasible_draws().map(|q| value(irf, q, x))))
                    .collect::<Result<Vec<Interval>>>()?;
                summarise_quantity(&bounds, v, alpha)
            })
            .collect();
        let mut table = out.table(
            "robust_summary.csv",
            "robust-summary",
            &[
                "variable",
                "shock",
                "horizon",
                "is_lower",
                "is_upper",
                "med_set_lo",
                "med_set_hi",
                "rci_lo",
                "rci_hi",
                "std_lo",
                "std_hi",
                "prior_informativeness",
            ],
        )?;
        for (x, row) in qs.iter().zip(rows) {
            let (lo, hi, med, rci, std, informativeness) = row?;
            let (var, shock) = names(x);
            table.row([
                var,
                shock,
                x.horizon.to_string(),
                fmt_f64(lo),
                fmt_f64(hi),
                fmt_f64(med.lo),
                fmt_f64(med.hi),
                fmt_f64(rci.lo),
                fmt_f64(rci.hi),
                fmt_f64(std.lo),
                fmt_f64(std.hi),
                fmt_f64(informativeness),
            ])?;
        }
        table.finish()?;
        if !cfg.robust.iso_draw_deltas.is_empty() {
            let d = qs.len();
            let mut iso = out.table("iso_draw.csv", "iso-draw", &["d", "m", "delta", "epsilon"])?;
            for &delta in &cfg.robust.iso_draw_deltas {
                let eps = epsilon_for_draws(d, m as u64, delta)?;
                iso.row([d.to_string(), m.to_string(), fmt_f64(delta), fmt_f64(eps)])?;
            }
            iso.finish()?;
        }
    }

    let summary = json!({
        "mode": cfg.mode.name(),
        "sampler": cfg.sampler.name(),
        "seed": cfg.seed,
        "delta": cfg.delta,
        "init_delta": jc.slice.effective_init_delta(),
        "m": m,
        "k": k,
        "variables": set.variables(),
        "shocks": set.shocks(),
        "margin_count": set.margin_count(),
        "lags": cfg.lags,
        "constant": cfg.constant,
        "observations": inputs.stats.data.t_eff(),
        "first_date": inputs.dataset.dates[0].to_string(),
        "phi_kept": run.records.len(),
        "phi_attempts": run.attempts,
        "plausibility_percent": run.plausibility_percent()?,
        "mean_ess_percent": run.mean_ess_percent(),
        "total_effort": run.total_effort(),
    });
    out.json("run_summary.json", "run-summary", &summary)?;
    out.json(
        "timing.json",
        "timing",
        &Timing::new(clock, effective_draws(&run, cfg.sampler, m)),
    )
}

fn write_draws(out: &mut OutputWriter, run: &JointRun, n: usize) -> Result<()> {
    let mut cols = vec!["phi_index".to_string(), "draw_index".into(), "weight".into(), "feasible".into(), "copies".into()];
    cols.extend(q_columns(n));
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut table = out.table("draws.csv", "draws", &cols)?;
    for r in &run.records {
        let mut copies = vec![0usize; r.draws.len()];
        for &i in &r.resampled {
            copies[i] += 1;
        }
        for (d, q) in r.draws.iter().enumerate() {
            let w = r.weights[d];
            let mut fields = vec![
                r.phi_index.to_string(),
                d.to_string(),
                fmt_f64(w),
                u8::from(w > 0.0).to_string(),
                copies[d].to_string(),
            ];
            push_q(&mut fields, q);
            table.row(&fields)?;
        }
    }
    table.finish()
}

fn run_conditional_check(cfg: &RunConfig, out: &mut OutputWriter, clock: Instant) -> Result<()> {
    let inputs = load_posterior_inputs(cfg)?;
    let star = inputs.posterior.mean_phi()?;
    let n = inputs.set.n();
    let quantities: Vec<(usize, usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j, 0))).collect();
    let innovations = inputs.set.has_narrative().then_some(&star.innovations);
    let check = conditional_posterior_check(
        &star.phi,
        innovations,
        &inputs.set,
        cfg.accept_reject.normalisation,
        &cfg.slice_config(),
        cfg.conditional_check.m,
        &quantities,
        cfg.conditional_check.bins,
        cfg.seed,
    )?;
    let set = &inputs.set;
    let mut hist = out.table(
        "cond_hist.csv",
        "conditional-histograms",
        &["variable", "shock", "horizon", "bin", "bin_lo", "bin_hi", "accept_reject", "soft_sign"],
    )?;
    let mut ks = out.table(
        "cond_ks.csv",
        "conditional-ks",
        &["variable", "shock", "horizon", "ks_statistic", "p_value", "median_accept_reject", "median_soft_sign"],
    )?;
    for (idx, c) in check.comparisons.iter().enumerate() {
        let var = &set.variables()[c.variable];
        let shock = &set.shocks()[c.shock];
        let bins = c.accept_reject_counts.len();
        let width = (c.hi - c.lo) / bins as f64;
        for b in 0..bins {
            hist.row([
                var.clone(),
                shock.clone(),
                c.horizon.to_string(),
                b.to_string(),
                fmt_f64(c.lo + b as f64 * width),
                fmt_f64(if b + 1 == bins { c.hi } else { c.lo + (b + 1) as f64 * width }),
                c.accept_reject_counts[b].to_string(),
                c.soft_sign_counts[b].to_string(),
            ])?;
        }
        ks.row([
            var.clone(),
            shock.clone(),
            c.horizon.to_string(),
            fmt_f64(c.ks.statistic),
            fmt_f64(c.ks.p_value),
            fmt_f64(median(&check.accept_reject_values[idx])),
            fmt_f64(median(&check.soft_sign_values[idx])),
        ])?;
    }
    hist.finish()?;
    ks.finish()?;
    let min_p = check.comparisons.iter().map(|c| c.ks.p_value).fold(f64::INFINITY, f64::min);
    out.json(
        "run_summary.json",
        "run-summary",
        &json!({
            "mode": cfg.mode.name(),
            "seed": cfg.seed,
            "delta": cfg.delta,
            "m": cfg.conditional_check.m,
            "phi": "posterior-mean",
            "accept_reject_normalisation": cfg.accept_reject.normalisation,
            "min_ks_p_value": min_p,
        }),
    )?;
    out.json("timing.json", "timing", &Timing::new(clock, 2.0 * cfg.conditional_check.m as f64))
}

/// Position of θ in the oracle set measured from its left end, in [0, 1].
pub fn oracle_position(set: &ThetaIntervalSet, theta: f64, branch: crate::bivariate::Branch) -> Option<f64> {
    let total = set.measure();
    let mut acc = 0.0;
    for iv in &set.intervals {
        if iv.contains(theta, branch) {
            return Some(((acc + (theta - iv.lo).max(0.0)) / total).min(1.0));
        }
        acc += iv.width();
    }
    None
}

fn bivariate_setup(cfg: &RunConfig) -> Result<(BivariatePhi, RestrictionSet, ThetaIntervalSet)> {
    let b = cfg
        .bivariate
        .as_ref()
        .ok_or_else(|| SvarError::Config("no bivariate block".into()))?;
    let phi = BivariatePhi::new(b.sigma[0], b.sigma[1], b.sigma[2])?;
    let (set, oracle) = match b.design {
        BivariateDesign::Connected => (connected_restrictions(b.omega_bar), connected_identified_set(&phi, b.omega_bar)?),
        BivariateDesign::Disconnected => (disconnected_restrictions(b.lambda), disconnected_identified_set(&phi, b.lambda)?),
    };
    let set = match &cfg.restrictions {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| SvarError::io(path, e))?;
            let parsed = parse_restrictions(&text, None)?;
            if parsed.n() != 2 {
                return Err(SvarError::Config("bivariate-demo restrictions must have two variables".into()));
            }
            parsed
        }
        None => set,
    };
    Ok((phi, set, oracle))
}

fn run_bivariate_demo(cfg: &RunConfig, out: &mut OutputWriter, clock: Instant) -> Result<()> {
    let (phi, set, oracle) = bivariate_setup(cfg)?;
    let set = set_for_sampler(&set, cfg.sampler, cfg.accept_reject.normalisation);
    let rf = phi.reduced_form();
    let jc = joint_config(cfg, cfg.sampler, cfg.m, cfg.k(), cfg.delta);
    let mut rng = RngStream::new(cfg.seed, 0);
    let (draws, _, resampled, effort, ess) = sample_q(&set, &rf, None, &jc, &mut rng)?;
    if draws.is_empty() {
        return Err(SvarError::EmptyVerdict { attempts: effort });
    }
    let thetas: Vec<_> = resampled.iter().map(|&i| theta_of(&draws[i])).collect();

    let mut table = out.table("theta_draws.csv", "theta-draws", &["record", "index", "theta", "branch"])?;
    for (idx, iv) in oracle.intervals.iter().enumerate() {
        table.row(["lower".to_string(), idx.to_string(), fmt_f64(iv.lo), iv.branch.name().to_string()])?;
        table.row(["upper".to_string(), idx.to_string(), fmt_f64(iv.hi), iv.branch.name().to_string()])?;
    }
    for (k, (theta, branch)) in thetas.iter().enumerate() {
        table.row(["draw".to_string(), k.to_string(), fmt_f64(*theta), branch.name().to_string()])?;
    }
    table.finish()?;

    let mut shares = vec![0usize; oracle.intervals.len()];
    let mut positions = Vec::with_capacity(thetas.len());
    for &(theta, branch) in &thetas {
        if let Some(i) = oracle.locate(theta, branch) {
            shares[i] += 1;
        }
        if let Some(p) = oracle_position(&oracle, theta, branch) {
            positions.push(p);
        }
    }
    let ks = (!positions.is_empty()).then(|| ks_one_sample(&positions, |u| u.clamp(0.0, 1.0)));
    let k = thetas.len() as f64;
    out.json(
        "run_summary.json",
        "run-summary",
        &json!({
            "mode": cfg.mode.name(),
            "sampler": cfg.sampler.name(),
            "seed": cfg.seed,
            "delta": cfg.delta,
            "m": cfg.m,
            "k": thetas.len(),
            "phi": [phi.s11, phi.s21, phi.s22],
            "oracle": oracle.intervals.iter().map(|iv| json!({"lo": iv.lo, "hi": iv.hi, "branch": iv.branch.name()})).collect::<Vec<_>>(),
            "ess_percent": ess,
            "effort": effort,
            "interval_shares": shares.iter().map(|&s| s as f64 / k).collect::<Vec<_>>(),
            "draws_outside_oracle": thetas.len() - positions.len(),
            "ks_statistic": ks.as_ref().map(|r| r.statistic),
            "ks_p_value": ks.as_ref().map(|r| r.p_value),
        }),
    )?;
    let effective = match cfg.sampler {
        SamplerKind::AcceptReject => k,
        SamplerKind::SoftSign => ess.unwrap_or(0.0) / 100.0 * cfg.m as f64,
    };
    out.json("timing.json", "timing", &Timing::new(clock, effective))
}

/// One benchmark cell: averages over replications.
#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkRow {
    pub algorithm: String,
    pub omega_bar: Option<f64>,
    pub delta: Option<f64>,
    pub replications: usize,
    pub m: usize,
    pub mean_ess_percent: f64,
    pub mean_acceptance_rate: Option<f64>,
    pub plausibility_percent: Option<f64>,
    pub mean_seconds: f64,
    pub effective_draws_per_second: f64,
}

/// Fixed-φ grid over ω̄ × Δ, plus accept-reject per ω̄. Cells run one after
/// another so timings are comparable.
pub fn bivariate_benchmark(cfg: &RunConfig) -> Result<Vec<BenchmarkRow>> {
    let bench = cfg
        .benchmark
        .as_ref()
        .ok_or_else(|| SvarError::Config("no benchmark block".into()))?;
    let sigma = cfg.bivariate.as_ref().map_or([1.0, -0.5, 1.0], |b| b.sigma);
    let phi = BivariatePhi::new(sigma[0], sigma[1], sigma[2])?;
    let rf = phi.reduced_form();
    let irf = compute_irf_coefficients(&rf, 0);
    let ctx = MarginContext { irf: &irf, innovations: None };
    let m = cfg.m;
    let reps = bench.replications;
    let stream = |cell: usize, rep: usize| (cell * 1_000_000 + rep) as u64;
    let mut rows = Vec::new();
    let cells_per_omega = bench.deltas.len() + 1;
    for (oi, &omega) in bench.omega_bars.iter().enumerate() {
        let set = connected_restrictions(omega);
        let ar_prepared = set.with_mode(cfg.accept_reject.normalisation).prepare(&rf, &ctx)?;
        let unbounded = AcceptRejectConfig { max_attempts: u64::MAX };
        let (mut secs, mut rate) = (0.0, 0.0);
        for rep in 0..reps {
            let mut rng = RngStream::new(cfg.seed, stream(oi * cells_per_omega, rep));
            let t = Instant::now();
            let batch = accept_reject_sample(&ar_prepared, m, &unbounded, &mut rng)?;
            secs += t.elapsed().as_secs_f64();
            rate += batch.acceptance_rate();
        }
        let mean_secs = secs / reps as f64;
        rows.push(BenchmarkRow {
            algorithm: "accept-reject".into(),
            omega_bar: Some(omega),
            delta: None,
            replications: reps,
            m,
            mean_ess_percent: 100.0,
            mean_acceptance_rate: Some(rate / reps as f64),
            plausibility_percent: None,
            mean_seconds: mean_secs,
            effective_draws_per_second: m as f64 / mean_secs,
        });
        let prepared = set.prepare(&rf, &ctx)?;
        for (di, &delta) in bench.deltas.iter().enumerate() {
            let slice = SliceConfig {
                m,
                delta,
                ..cfg.slice_config()
            };
            let (mut secs, mut ess) = (0.0, 0.0);
            for rep in 0..reps {
                let mut rng = RngStream::new(cfg.seed, stream(oi * cells_per_omega + di + 1, rep));
                let t = Instant::now();
                let batch = soft_sign_sample(&prepared, &slice, &mut rng)?;
                secs += t.elapsed().as_secs_f64();
                ess += batch.ess_percent().unwrap_or(0.0);
            }
            let (mean_secs, mean_ess) = (secs / reps as f64, ess / reps as f64);
            rows.push(BenchmarkRow {
                algorithm: "soft-sign".into(),
                omega_bar: Some(omega),
                delta: Some(delta),
                replications: reps,
                m,
                mean_ess_percent: mean_ess,
                mean_acceptance_rate: None,
                plausibility_percent: None,
                mean_seconds: mean_secs,
                effective_draws_per_second: mean_ess / 100.0 * m as f64 / mean_secs,
            });
        }
    }
    Ok(rows)
}

/// Joint (φ, Q) runs on the configured dataset: accept-reject, then the soft
/// sampler at each Δ.
pub fn posterior_benchmark(cfg: &RunConfig) -> Result<Vec<BenchmarkRow>> {
    let bench = cfg
        .benchmark
        .as_ref()
        .ok_or_else(|| SvarError::Config("no benchmark block".into()))?;
    let inputs = load_posterior_inputs(cfg)?;
    let mut cells = vec![(SamplerKind::AcceptReject, cfg.delta)];
    cells.extend(bench.deltas.iter().map(|&d| (SamplerKind::SoftSign, d)));
    let mut rows = Vec::new();
    for (sampler, delta) in cells {
        let set = set_for_sampler(&inputs.set, sampler, cfg.accept_reject.normalisation);
        let jc = joint_config(cfg, sampler, cfg.m, cfg.k(), delta);
        let t = Instant::now();
        let run = run_joint_sampler(&inputs.posterior, &set, &jc)?;
        let secs = t.elapsed().as_secs_f64();
        let effective = effective_draws(&run, sampler, cfg.m);
        rows.push(BenchmarkRow {
            algorithm: sampler.name().into(),
            omega_bar: None,
            delta: (sampler == SamplerKind::SoftSign).then_some(delta),
            replications: 1,
            m: cfg.m,
            mean_ess_percent: run.mean_ess_percent().unwrap_or(100.0),
            mean_acceptance_rate: None,
            plausibility_percent: Some(run.plausibility_percent()?),
            mean_seconds: secs,
            effective_draws_per_second: effective / secs,
        });
    }
    Ok(rows)
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Rows per algorithm, columns per ω̄: seconds, then ESS.
pub fn format_bivariate_table(rows: &[BenchmarkRow], omegas: &[f64]) -> String {
    let mut s = String::new();
    let head: String = omegas.iter().map(|w| format!("{:>10}", format!("w={w}"))).collect();
    let width = 10 * omegas.len();
    s.push_str(&format!("{:<20}{:>width$}   {:>width$}\n", "", "speed (s)", "ESS (%)"));
    s.push_str(&format!("{:<20}{head}   {head}\n", "algorithm"));
    let mut labels: Vec<(String, Option<f64>)> = Vec::new();
    for r in rows {
        let key = (r.algorithm.clone(), r.delta);
        if !labels.contains(&key) {
            labels.push(key);
        }
    }
    for (alg, delta) in labels {
        let label = match delta {
            Some(d) => format!("delta = {d}"),
            None => alg.clone(),
        };
        let cells: Vec<&BenchmarkRow> = omegas
            .iter()
            .filter_map(|w| rows.iter().find(|r| r.algorithm == alg && r.delta == delta && r.omega_bar == Some(*w)))
            .collect();
        s.push_str(&format!(
            "{label:<20}{}   {}\n",
            cells.iter().map(|r| format!("{:>10.2}", r.mean_seconds)).collect::<String>(),
            cells.iter().map(|r| format!("{:>10.2}", r.mean_ess_percent)).collect::<String>()
        ));
    }
    s
}

/// One row per algorithm: hours, effective draws per hour ('000), plausibility, ESS.
pub fn format_posterior_table(rows: &[BenchmarkRow]) -> String {
    let mut s = format!(
        "{:<20}{:>14}{:>22}{:>16}{:>10}\n",
        "algorithm", "speed (hours)", "eff. draws/hour ('000)", "plausibility %", "ESS %"
    );
    for r in rows {
        let label = match r.delta {
            Some(d) => format!("delta = {d}"),
            None => r.algorithm.clone(),
        };
        s.push_str(&format!(
            "{label:<20}{:>14.3}{:>22.0}{:>16.2}{:>10.2}\n",
            r.mean_seconds / 3600.0,
            r.effective_draws_per_second * 3.6,
            r.plausibility_percent.unwrap_or(f64::NAN),
            r.mean_ess_percent
        ));
    }
    s
}

fn run_benchmark(cfg: &RunConfig, out: &mut OutputWriter, clock: Instant) -> Result<()> {
    let bench = cfg.benchmark.as_ref().expect("validated");
    let rows = match bench.design {
        BenchmarkDesign::Bivariate => bivariate_benchmark(cfg)?,
        BenchmarkDesign::Posterior => posterior_benchmark(cfg)?,
    };
    let mut table = out.table(
        "benchmark.csv",
        "benchmark",
        &[
            "algorithm",
            "omega_bar",
            "delta",
            "replications",
            "m",
            "mean_ess_percent",
            "mean_acceptance_rate",
            "plausibility_percent",
        ],
    )?;
    let mut timing = out.table(
        "benchmark_timing.csv",
        "benchmark-timing",
        &["algorithm", "omega_bar", "delta", "mean_seconds", "effective_draws_per_second"],
    )?;
    for r in &rows {
        table.row([
            r.algorithm.clone(),
            opt(r.omega_bar),
            opt(r.delta),
            r.replications.to_string(),
            r.m.to_string(),
            fmt_f64(r.mean_ess_percent),
            opt(r.mean_acceptance_rate),
            opt(r.plausibility_percent),
        ])?;
        timing.row([
            r.algorithm.clone(),
            opt(r.omega_bar),
            opt(r.delta),
            fmt_f64(r.mean_seconds),
            fmt_f64(r.effective_draws_per_second),
        ])?;
    }
    table.finish()?;
    timing.finish()?;
    let text = match bench.design {
        BenchmarkDesign::Bivariate => format_bivariate_table(&rows, &bench.omega_bars),
        BenchmarkDesign::Posterior => format_posterior_table(&rows),
    };
    out.text("benchmark_table.txt", "benchmark-table", &text)?;
    out.json(
        "run_summary.json",
        "run-summary",
        &json!({
            "mode": cfg.mode.name(),
            "design": bench.design,
            "seed": cfg.seed,
            "m": cfg.m,
            "replications": bench.replications,
            "cells": rows.len(),
        }),
    )?;
    out.json("timing.json", "timing", &json!({"wall_seconds": clock.elapsed().as_secs_f64()}))
}

/// Stand-in for the oil dataset: a VAR(2) in (REA, PROD, RPO) whose impact
/// matrix satisfies the oil sign and elasticity restrictions, with large
/// supply shocks planted on the narrative dates.
pub fn synthetic_oil_dataset(periods: usize, seed: u64) -> Dataset {
    let impact = Matrix::from_row_slice(3, 3, &[1.0, -0.3, -0.3, 0.01, 0.01, -1.0, 0.8, 1.0, 0.5]);
    let a1 = Matrix::from_row_slice(3, 3, &[0.8, 0.0, -0.05, 0.0, 0.1, 0.0, 0.05, 0.0, 0.9]);
    let a2 = Matrix::from_row_slice(3, 3, &[0.1, 0.0, 0.0, 0.0, 0.05, 0.0, 0.0, 0.0, 0.05]);
    let supply_dates = ["1978-12", "1979-01", "1980-09", "1980-10", "1990-08", "2002-12", "2003-03", "2011-02"];
    let calm_demand = ["1980-09", "1980-10", "1990-08"];
    let first = YearMonth::new(1971, 1);
    let mut dates = Vec::with_capacity(periods);
    let mut d = first;
    for _ in 0..periods {
        dates.push(d);
        d = d.next();
    }
    let is_in = |list: &[&str], ym: YearMonth| list.iter().any(|s| YearMonth::parse(s).ok() == Some(ym));
    let mut rng = RngStream::new(seed, 0);
    let mut y = Matrix::zeros(periods, 3);
    for (t, &date) in dates.iter().enumerate() {
        let mut e = crate::linalg::Vector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));
        if is_in(&supply_dates, date) {
            e[2] = 4.0;
        }
        if is_in(&calm_demand, date) {
            e[0] = 0.0;
        }
        let mut next = &impact * e;
        if t >= 1 {
            next += &a1 * y.row(t - 1).transpose();
        }
        if t >= 2 {
            next += &a2 * y.row(t - 2).transpose();
        }
        y.set_row(t, &next.transpose());
    }
    Dataset {
        names: vec!["REA".into(), "PROD".into(), "RPO".into()],
        dates,
        values: y,
    }
}

/// Resolve a CLI path against the working directory.
pub fn cli_path(p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.to_path_buf())
    }
}
