//! Run configuration documents.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{Transform, YearMonth};
use crate::error::{Result, SvarError};
use crate::restrictions::NormalisationMode;
use crate::robust::{grossed_up_draws, required_draws};
use crate::samplers::{AcceptRejectConfig, SamplerKind, SliceConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Standard,
    Robust,
    ConditionalCheck,
    BivariateDemo,
    Benchmark,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Robust => "robust",
            Mode::ConditionalCheck => "conditional-check",
            Mode::BivariateDemo => "bivariate-demo",
            Mode::Benchmark => "benchmark",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = SvarError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "standard" => Mode::Standard,
            "robust" => Mode::Robust,
            "conditional-check" => Mode::ConditionalCheck,
            "bivariate-demo" => Mode::BivariateDemo,
            "benchmark" => Mode::Benchmark,
            other => return Err(SvarError::Config(format!("unknown mode '{other}'"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub transforms: BTreeMap<String, Transform>,
    /// First and last dates kept, after transforms.
    #[serde(default)]
    pub start: Option<String>,
    #[serde(default)]
    pub end: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptRejectSettings {
    #[serde(default = "default_ar_budget")]
    pub max_attempts: u64,
    #[serde(default = "default_ar_mode")]
    pub normalisation: NormalisationMode,
}

fn default_ar_budget() -> u64 {
    1000
}

fn default_ar_mode() -> NormalisationMode {
    NormalisationMode::Mechanical
}

impl Default for AcceptRejectSettings {
    fn default() -> Self {
        Self {
            max_attempts: default_ar_budget(),
            normalisation: default_ar_mode(),
        }
    }
}

/// Draw count from the bound-accuracy formula, divided by an ESS share.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequiredDrawsConfig {
    pub d: usize,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default)]
    pub ess_percent: Option<f64>,
}

impl RequiredDrawsConfig {
    pub fn draws(&self) -> Result<u64> {
        let base = required_draws(self.d, self.epsilon, self.delta)?;
        Ok(match self.ess_percent {
            Some(ess) if ess > 0.0 && ess <= 100.0 => grossed_up_draws(base, ess),
            Some(ess) => return Err(SvarError::Config(format!("ess_percent must be in (0, 100], got {ess}"))),
            None => base,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustConfig {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// When set, replaces `m` for the robust run.
    #[serde(default)]
    pub required_draws: Option<RequiredDrawsConfig>,
    /// δ values for the iso-draw curve at the run's M.
    #[serde(default)]
    pub iso_draw_deltas: Vec<f64>,
}

fn default_alpha() -> f64 {
    0.68
}

impl Default for RobustConfig {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            required_draws: None,
            iso_draw_deltas: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionalCheckConfig {
    #[serde(default = "default_check_draws")]
    pub m: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_check_draws() -> usize {
    100_000
}

fn default_bins() -> usize {
    50
}

impl Default for ConditionalCheckConfig {
    fn default() -> Self {
        Self {
            m: default_check_draws(),
            bins: default_bins(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BivariateDesign {
    Connected,
    Disconnected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BivariateConfig {
    pub design: BivariateDesign,
    /// (σ₁₁, σ₂₁, σ₂₂)
    #[serde(default = "default_sigma")]
    pub sigma: [f64; 3],
    #[serde(default = "default_omega")]
    pub omega_bar: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_sigma() -> [f64; 3] {
    [1.0, -0.5, 1.0]
}

fn default_omega() -> f64 {
    1.0
}

fn default_lambda() -> f64 {
    0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkDesign {
    /// Fixed-φ grid over ω̄ and Δ on the connected bivariate model.
    Bivariate,
    /// Joint (φ, Q) runs on the configured dataset, one per Δ plus accept-reject.
    Posterior,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub design: BenchmarkDesign,
    #[serde(default = "default_omegas")]
    pub omega_bars: Vec<f64>,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
}

fn default_omegas() -> Vec<f64> {
    vec![1.0, 0.1, 0.01]
}

fn default_deltas() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4]
}

fn default_replications() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub restrictions: Option<PathBuf>,
    #[serde(default)]
    pub dataset: Option<DatasetConfig>,
    #[serde(default = "default_lags")]
    pub lags: usize,
    #[serde(default = "default_true")]
    pub constant: bool,
    /// Largest horizon reported in summaries.
    #[serde(default)]
    pub horizons: usize,
    /// Variables whose responses are reported cumulated.
    #[serde(default)]
    pub cumulative: Vec<String>,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerKind,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Δ₀ for the initialisation optimiser; max(0.1, 1000Δ) when absent.
    #[serde(default)]
    pub init_delta: Option<f64>,
    #[serde(default = "default_m")]
    pub m: usize,
    /// Resampled draws per φ; defaults to `m`.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "default_phi_kept")]
    pub phi_kept: usize,
    #[serde(default = "default_alphas")]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub burn_in: usize,
    /// Slice steps discarded between kept draws.
    #[serde(default)]
    pub thin: usize,
    #[serde(default)]
    pub accept_reject: AcceptRejectSettings,
    #[serde(default = "default_max_phi")]
    pub max_phi_attempts: usize,
    #[serde(default = "default_true")]
    pub write_draws: bool,
    #[serde(default)]
    pub robust: RobustConfig,
    #[serde(default)]
    pub conditional_check: ConditionalCheckConfig,
    #[serde(default)]
    pub bivariate: Option<BivariateConfig>,
    #[serde(default)]
    pub benchmark: Option<BenchmarkConfig>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_lags() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_sampler() -> SamplerKind {
    SamplerKind::SoftSign
}

fn default_delta() -> f64 {
    1e-5
}

fn default_m() -> usize {
    1000
}

fn default_phi_kept() -> usize {
    1000
}

fn default_alphas() -> Vec<f64> {
    vec![0.68]
}

fn default_max_phi() -> usize {
    100_000
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_yaml::from_str(text).map_err(|e| {
            let path = e
                .location()
                .map(|l| format!("line {}, column {}", l.line(), l.column()))
                .unwrap_or_else(|| "<document>".into());
            SvarError::schema(path, e.to_string())
        })
    }

    /// Read a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SvarError::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.out);
        if let Some(r) = self.restrictions.as_mut() {
            join(r);
        }
        if let Some(d) = self.dataset.as_mut() {
            join(&mut d.path);
        }
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(self.m)
    }

    pub fn slice_config(&self) -> SliceConfig {
        SliceConfig {
            m: self.m,
            delta: self.delta,
            init_delta: self.init_delta,
            burn_in: self.burn_in,
            thin: self.thin + 1,
            ..SliceConfig::default()
        }
    }

    pub fn accept_reject_config(&self) -> AcceptRejectConfig {
        AcceptRejectConfig {
            max_attempts: self.accept_reject.max_attempts,
        }
    }

    pub fn date_window(&self) -> Result<(Option<YearMonth>, Option<YearMonth>)> {
        let parse = |field: &str, v: &Option<String>| -> Result<Option<YearMonth>> {
            v.as_deref()
                .map(|s| YearMonth::parse(s).map_err(|e| SvarError::schema(format!("dataset.{field}"), e)))
                .transpose()
        };
        match &self.dataset {
            Some(d) => Ok((parse("start", &d.start)?, parse("end", &d.end)?)),
            None => Ok((None, None)),
        }
    }

    /// Range and presence checks; runs before any computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SvarError::Config(msg));
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if let Some(d0) = self.init_delta {
            if !(d0 > 0.0) || !d0.is_finite() {
                return bad(format!("init_delta must be positive, got {d0}"));
            }
        }
        if self.m == 0 || self.k() == 0 {
            return bad("m and k must be positive".into());
        }
        if self.phi_kept == 0 {
            return bad("phi_kept must be positive".into());
        }
        for &a in self.alpha.iter().chain(std::iter::once(&self.robust.alpha)) {
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("credibility level {a} is outside (0, 1]"));
            }
        }
        if let Some(r) = &self.robust.required_draws {
            r.draws()?;
        }
        for &d in &self.robust.iso_draw_deltas {
            if !(d > 0.0 && d < 1.0) {
                return bad(format!("iso-draw delta {d} is outside (0, 1)"));
            }
        }
        self.accept_reject_config().validate()?;
        self.slice_config().validate()?;
        if self.conditional_check.m == 0 || self.conditional_check.bins == 0 {
            return bad("conditional_check.m and bins must be positive".into());
        }
        self.date_window()?;
        let needs_data = match self.mode {
            Mode::Standard | Mode::Robust | Mode::ConditionalCheck => true,
            Mode::BivariateDemo => false,
            Mode::Benchmark => match &self.benchmark {
                Some(b) => b.design == BenchmarkDesign::Posterior,
                None => return bad("benchmark mode needs a 'benchmark' block".into()),
            },
        };
        if needs_data && (self.dataset.is_none() || self.restrictions.is_none()) {
            return bad(format!("mode {} needs 'dataset' and 'restrictions'", self.mode.name()));
        }
        if let Some(b) = &self.benchmark {
            if b.deltas.iter().any(|&d| !(d > 0.0)) {
                return bad("benchmark deltas must be positive".into());
            }
            if b.replications == 0 || b.omega_bars.iter().any(|&w| !(w >= 0.0)) {
                return bad("benchmark needs replications ≥ 1 and ω̄ ≥ 0".into());
            }
        }
        if self.mode == Mode::BivariateDemo {
            match &self.bivariate {
                None => return bad("bivariate-demo mode needs a 'bivariate' block".into()),
                Some(b) => {
                    if !(b.omega_bar >= 0.0) || !(b.lambda >= 0.0) {
                        return bad("omega_bar and lambda must be nonnegative".into());
                    }
                }
            }
        }
        Ok(())
    }
}
