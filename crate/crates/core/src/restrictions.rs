//! Inequality restrictions S(φ, Q) ≥ 0.
//!
//! Every restriction reduces to a scalar margin m(φ, Q) that is satisfied iff
//! m ≥ 0. A [`RestrictionSet`] is parsed once; [`RestrictionSet::prepare`] then
//! folds φ (and the innovations, for narrative restrictions) into a
//! [`PreparedRestrictions`] whose margins are cheap functions of Q alone.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::data::{SampleCalendar, YearMonth};
use crate::error::{Result, SvarError};
use crate::linalg::{Matrix, Vector};
use crate::model::{IrfCoefficients, InnovationSeries, ReducedFormParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    fn parse(s: &str, path: &str) -> Result<Self> {
        match s {
            "+" | "positive" | "nonnegative" => Ok(Sign::Positive),
            "-" | "negative" | "nonpositive" => Ok(Sign::Negative),
            other => Err(SvarError::schema(path, format!("unknown sign `{other}`"))),
        }
    }
}

/// Whether a ratio is bounded from above (ratio ≤ bound) or below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundDirection {
    Upper,
    Lower,
}

/// How diag(A₀) ≥ 0 is imposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalisationMode {
    /// Flip columns of Q before evaluating the remaining margins.
    Mechanical,
    /// Keep (Σ_tr⁻¹ e_j)ᵀ q_j ≥ 0 as ordinary margins, appended last.
    Soft,
}

/// One restriction with all names resolved to indices.
///
/// `period` fields index the innovation series (0 = first usable observation).
#[derive(Clone, Debug, PartialEq)]
pub enum Restriction {
    /// sign·η_ijh − threshold ≥ 0.
    IrfSign {
        variable: usize,
        shock: usize,
        horizon: usize,
        sign: Sign,
        threshold: f64,
        cumulative: bool,
    },
    /// η_ijh ≥ η_ijl.
    IrfRanking {
        variable: usize,
        shock: usize,
        horizon: usize,
        versus: usize,
        cumulative: bool,
    },
    /// sign·e_jᵀ A₀ e_i ≥ 0.
    StructuralSign {
        variable: usize,
        shock: usize,
        sign: Sign,
    },
    /// Impact-response ratio η_{num,j,0} / η_{den,j,0} bounded by `bound`.
    ElasticityBound {
        numerator: usize,
        denominator: usize,
        shock: usize,
        bound: f64,
        direction: BoundDirection,
        denominator_sign: Option<Sign>,
    },
    /// Ratio of (possibly cumulative) horizon-h responses bounded by `bound`.
    IrfRatioBound {
        numerator: usize,
        denominator: usize,
        shock: usize,
        horizon: usize,
        bound: f64,
        direction: BoundDirection,
        cumulative: bool,
        denominator_sign: Option<Sign>,
    },
    /// sign·ε_{j,period} ≥ 0.
    NarrativeShockSign {
        shock: usize,
        period: usize,
        sign: Sign,
    },
    /// |H_{i,j,k,k+h}| ≥ max_{l≠j} |H_{i,l,k,k+h}|.
    NarrativeHdMost {
        variable: usize,
        shock: usize,
        period: usize,
        span: usize,
    },
    /// |H_{i,j,k,k+h}| ≤ min_{l≠j} |H_{i,l,k,k+h}|.
    NarrativeHdLeast {
        variable: usize,
        shock: usize,
        period: usize,
        span: usize,
    },
    /// (Σ_tr⁻¹ e_j)ᵀ q_j ≥ 0.
    SignNormalisation { shock: usize },
}

impl Restriction {
    fn horizon_needed(&self) -> usize {
        match *self {
            Restriction::IrfSign { horizon, .. } => horizon,
            Restriction::IrfRanking {
                horizon, versus, ..
            } => horizon.max(versus),
            Restriction::IrfRatioBound { horizon, .. } => horizon,
            Restriction::NarrativeHdMost { span, .. }
            | Restriction::NarrativeHdLeast { span, .. } => span,
            _ => 0,
        }
    }

    fn is_narrative(&self) -> bool {
        matches!(
            self,
            Restriction::NarrativeShockSign { .. }
                | Restriction::NarrativeHdMost { .. }
                | Restriction::NarrativeHdLeast { .. }
        )
    }

    fn key(&self) -> String {
        format!("{self:?}")
    }
}

/// Ordered restriction list plus the sign-normalisation policy.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictionSet {
    variables: Vec<String>,
    shocks: Vec<String>,
    restrictions: Vec<Restriction>,
    normalised_shocks: Vec<usize>,
    mode: NormalisationMode,
}

impl RestrictionSet {
    /// Build a set directly. `normalised_shocks` lists the columns subject to
    /// diag(A₀) ≥ 0.
    pub fn new(
        variables: Vec<String>,
        shocks: Vec<String>,
        restrictions: Vec<Restriction>,
        normalised_shocks: Vec<usize>,
        mode: NormalisationMode,
    ) -> Result<Self> {
        if restrictions.is_empty() && normalised_shocks.is_empty() {
            return Err(SvarError::schema(
                "restrictions",
                "at least one restriction is required",
            ));
        }
        if variables.len() != shocks.len() {
            return Err(SvarError::schema(
                "shocks",
                "number of shocks must equal number of variables",
            ));
        }
        Ok(Self {
            variables,
            shocks,
            restrictions,
            normalised_shocks,
            mode,
        })
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn shocks(&self) -> &[String] {
        &self.shocks
    }

    pub fn restrictions(&self) -> &[Restriction] {
        &self.restrictions
    }

    pub fn normalised_shocks(&self) -> &[usize] {
        &self.normalised_shocks
    }

    pub fn mode(&self) -> NormalisationMode {
        self.mode
    }

    pub fn with_mode(&self, mode: NormalisationMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }

    /// Number of margins s under the current mode.
    pub fn margin_count(&self) -> usize {
        match self.mode {
            NormalisationMode::Soft => self.restrictions.len() + self.normalised_shocks.len(),
            NormalisationMode::Mechanical => self.restrictions.len(),
        }
    }

    /// Largest horizon any restriction needs from the IRF coefficients.
    pub fn required_horizon(&self) -> usize {
        self.restrictions
            .iter()
            .map(Restriction::horizon_needed)
            .max()
            .unwrap_or(0)
    }

    pub fn has_narrative(&self) -> bool {
        self.restrictions.iter().any(Restriction::is_narrative)
    }

    /// Fold φ and the margin context into linear (or near-linear) functions of Q.
    pub fn prepare(
        &self,
        phi: &ReducedFormParams,
        ctx: &MarginContext<'_>,
    ) -> Result<PreparedRestrictions> {
        let n = self.n();
        if phi.n() != n {
            return Err(SvarError::Config(format!(
                "restriction set has {n} variables, phi has {}",
                phi.n()
            )));
        }
        if ctx.irf.horizon() < self.required_horizon() {
            return Err(SvarError::OutOfSample(format!(
                "restrictions need IRF horizon {}, context has {}",
                self.required_horizon(),
                ctx.irf.horizon()
            )));
        }
        let inv_cols: Vec<Vector> = (0..n).map(|i| phi.sigma_tr_inv_column(i)).collect();
        let innovations = || ctx.innovations.ok_or(SvarError::MissingContext);
        let whitened = |u: &InnovationSeries, t: usize| -> Result<Vector> {
            if t >= u.len() {
                return Err(SvarError::OutOfSample(format!(
                    "period {t} beyond {} innovations",
                    u.len()
                )));
            }
            Ok(phi.sigma_tr_solve(&u.at(t)))
        };

        let mut margins = Vec::with_capacity(self.margin_count());
        for r in &self.restrictions {
            let prepared = match *r {
                Restriction::IrfSign {
                    variable,
                    shock,
                    horizon,
                    sign,
                    threshold,
                    cumulative,
                } => PreparedMargin::Linear {
                    shock,
                    coef: ctx.irf.row(variable, horizon, cumulative) * sign.factor(),
                    offset: -threshold,
                },
                Restriction::IrfRanking {
                    variable,
                    shock,
                    horizon,
                    versus,
                    cumulative,
                } => PreparedMargin::Linear {
                    shock,
                    coef: ctx.irf.row(variable, horizon, cumulative)
                        - ctx.irf.row(variable, versus, cumulative),
                    offset: 0.0,
                },
                Restriction::StructuralSign {
                    variable,
                    shock,
                    sign,
                } => PreparedMargin::Linear {
                    shock,
                    coef: &inv_cols[variable] * sign.factor(),
                    offset: 0.0,
                },
                Restriction::ElasticityBound {
                    numerator,
                    denominator,
                    shock,
                    bound,
                    direction,
                    denominator_sign,
                } => ratio_margin(
                    ctx.irf.row(numerator, 0, false),
                    ctx.irf.row(denominator, 0, false),
                    shock,
                    bound,
                    direction,
                    denominator_sign,
                ),
                Restriction::IrfRatioBound {
                    numerator,
                    denominator,
                    shock,
                    horizon,
                    bound,
                    direction,
                    cumulative,
                    denominator_sign,
                } => ratio_margin(
                    ctx.irf.row(numerator, horizon, cumulative),
                    ctx.irf.row(denominator, horizon, cumulative),
                    shock,
                    bound,
                    direction,
                    denominator_sign,
                ),
                Restriction::NarrativeShockSign {
                    shock,
                    period,
                    sign,
                } => PreparedMargin::Linear {
                    shock,
                    coef: whitened(innovations()?, period)? * sign.factor(),
                    offset: 0.0,
                },
                Restriction::NarrativeHdMost {
                    variable,
                    shock,
                    period,
                    span,
                }
                | Restriction::NarrativeHdLeast {
                    variable,
                    shock,
                    period,
                    span,
                } => {
                    let u = innovations()?;
                    let responses = (0..=span).map(|l| ctx.irf.row(variable, l, false)).collect();
                    let shocks = (0..=span)
                        .map(|l| whitened(u, period + span - l))
                        .collect::<Result<Vec<_>>>()?;
                    PreparedMargin::Decomposition {
                        shock,
                        responses,
                        shocks,
                        most: matches!(r, Restriction::NarrativeHdMost { .. }),
                    }
                }
                Restriction::SignNormalisation { shock } => PreparedMargin::Linear {
                    shock,
                    coef: inv_cols[shock].clone(),
                    offset: 0.0,
                },
            };
            margins.push(prepared);
        }
        let normalisers: Vec<(usize, Vector)> = self
            .normalised_shocks
            .iter()
            .map(|&j| (j, inv_cols[j].clone()))
            .collect();
        if self.mode == NormalisationMode::Soft {
            for (j, coef) in &normalisers {
                margins.push(PreparedMargin::Linear {
                    shock: *j,
                    coef: coef.clone(),
                    offset: 0.0,
                });
            }
        }
        Ok(PreparedRestrictions {
            n,
            margins,
            normalisers,
            mechanical: self.mode == NormalisationMode::Mechanical,
        })
    }
}

fn ratio_margin(
    num: Vector,
    den: Vector,
    shock: usize,
    bound: f64,
    direction: BoundDirection,
    denominator_sign: Option<Sign>,
) -> PreparedMargin {
    match denominator_sign {
        // ratio ≤ b ⇔ s·(b·den − num) ≥ 0 when sign(den) = s
        Some(s) => {
            let upper = &den * bound - &num;
            let coef = match direction {
                BoundDirection::Upper => upper * s.factor(),
                BoundDirection::Lower => upper * (-s.factor()),
            };
            PreparedMargin::Linear {
                shock,
                coef,
                offset: 0.0,
            }
        }
        None => PreparedMargin::Ratio {
            shock,
            num,
            den,
            bound,
            direction,
        },
    }
}

/// Inputs beyond φ that some margins need.
#[derive(Clone, Copy, Debug)]
pub struct MarginContext<'a> {
    pub irf: &'a IrfCoefficients,
    pub innovations: Option<&'a InnovationSeries>,
}

#[derive(Clone, Debug)]
enum PreparedMargin {
    Linear {
        shock: usize,
        coef: Vector,
        offset: f64,
    },
    Ratio {
        shock: usize,
        num: Vector,
        den: Vector,
        bound: f64,
        direction: BoundDirection,
    },
    Decomposition {
        shock: usize,
        /// c_il for l = 0..=span
        responses: Vec<Vector>,
        /// Σ_tr⁻¹ u_{k+span−l} for l = 0..=span
        shocks: Vec<Vector>,
        most: bool,
    },
}

fn dot_col(coef: &Vector, q: &Matrix, j: usize) -> f64 {
    coef.iter().zip(q.column(j).iter()).map(|(a, b)| a * b).sum()
}

impl PreparedMargin {
    fn eval(&self, q: &Matrix) -> f64 {
        match self {
            PreparedMargin::Linear {
                shock,
                coef,
                offset,
            } => dot_col(coef, q, *shock) + offset,
            PreparedMargin::Ratio {
                shock,
                num,
                den,
                bound,
                direction,
            } => {
                let ratio = dot_col(num, q, *shock) / dot_col(den, q, *shock);
                let m = match direction {
                    BoundDirection::Upper => bound - ratio,
                    BoundDirection::Lower => ratio - bound,
                };
                if m.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    m
                }
            }
            PreparedMargin::Decomposition {
                shock,
                responses,
                shocks,
                most,
            } => {
                let contribution = |l: usize| -> f64 {
                    responses
                        .iter()
                        .zip(shocks)
                        .map(|(c, v)| dot_col(c, q, l) * dot_col(v, q, l))
                        .sum::<f64>()
                        .abs()
                };
                let own = contribution(*shock);
                let others = (0..q.ncols()).filter(|l| l != shock).map(contribution);
                if *most {
                    own - others.fold(f64::NEG_INFINITY, f64::max)
                } else {
                    others.fold(f64::INFINITY, f64::min) - own
                }
            }
        }
    }
}

/// Margins of a restriction set at a fixed φ.
#[derive(Clone, Debug)]
pub struct PreparedRestrictions {
    n: usize,
    margins: Vec<PreparedMargin>,
    normalisers: Vec<(usize, Vector)>,
    mechanical: bool,
}

impl PreparedRestrictions {
    pub fn len(&self) -> usize {
        self.margins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.margins.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_mechanical(&self) -> bool {
        self.mechanical
    }

    /// Flip every normalised column whose diagonal A₀ entry is negative.
    pub fn normalize_in_place(&self, q: &mut Matrix) {
        for (j, coef) in &self.normalisers {
            if dot_col(coef, q, *j) < 0.0 {
                q.column_mut(*j).neg_mut();
            }
        }
    }

    /// Margins of Q as given. Callers in mechanical mode normalise Q first.
    pub fn margins_into(&self, q: &Matrix, out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.margins.iter().map(|m| m.eval(q)));
    }

    pub fn margins(&self, q: &Matrix) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.margins_into(q, &mut out);
        out
    }

    /// Strict hard check: every margin ≥ 0, no tolerance.
    pub fn is_feasible(&self, q: &Matrix) -> bool {
        self.margins.iter().all(|m| m.eval(q) >= 0.0)
    }

    /// Apply the mechanical normalisation when the set asks for it.
    pub fn canonical(&self, q: &mut Matrix) {
        if self.mechanical {
            self.normalize_in_place(q);
        }
    }
}

/// m_l(φ, Q) for l = 1..s.
pub fn margins(
    set: &RestrictionSet,
    phi: &ReducedFormParams,
    q: &Matrix,
    ctx: &MarginContext<'_>,
) -> Result<Vec<f64>> {
    Ok(set.prepare(phi, ctx)?.margins(q))
}

/// true iff min_l m_l ≥ 0.
pub fn is_feasible(
    set: &RestrictionSet,
    phi: &ReducedFormParams,
    q: &Matrix,
    ctx: &MarginContext<'_>,
) -> Result<bool> {
    Ok(set.prepare(phi, ctx)?.is_feasible(q))
}

/// Column j becomes sign((Σ_tr⁻¹ e_j)ᵀ q_j) q_j for every j; a zero product
/// leaves the column alone.
pub fn normalize_signs(phi: &ReducedFormParams, q: &Matrix) -> Matrix {
    let mut out = q.clone();
    for j in 0..q.ncols() {
        if phi.sigma_tr_inv_column(j).dot(&q.column(j)) < 0.0 {
            out.column_mut(j).neg_mut();
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Config document

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    variables: Vec<String>,
    shocks: Vec<String>,
    #[serde(default)]
    sign_normalisation: Option<String>,
    restrictions: Vec<RawEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    kind: String,
    variable: Option<String>,
    shock: Option<String>,
    numerator: Option<String>,
    denominator: Option<String>,
    horizon: Option<usize>,
    horizons: Option<Vec<usize>>,
    versus: Option<usize>,
    sign: Option<String>,
    threshold: Option<f64>,
    bound: Option<f64>,
    direction: Option<String>,
    cumulative: Option<bool>,
    date: Option<String>,
    dates: Option<Vec<String>>,
    span: Option<usize>,
}

struct Resolver<'a> {
    variables: &'a [String],
    shocks: &'a [String],
    calendar: Option<&'a SampleCalendar>,
}

impl Resolver<'_> {
    fn variable(&self, name: &Option<String>, path: &str, field: &str) -> Result<usize> {
        let name = name
            .as_deref()
            .ok_or_else(|| SvarError::schema(format!("{path}.{field}"), "missing field"))?;
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| SvarError::UnknownVariable(name.to_string()))
    }

    fn shock(&self, name: &Option<String>, path: &str) -> Result<usize> {
        let name = name
            .as_deref()
            .ok_or_else(|| SvarError::schema(format!("{path}.shock"), "missing field"))?;
        self.shocks
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| SvarError::UnknownShock(name.to_string()))
    }

    fn periods(&self, e: &RawEntry, path: &str) -> Result<Vec<usize>> {
        let dates: Vec<&String> = match (&e.date, &e.dates) {
            (Some(d), None) => vec![d],
            (None, Some(ds)) if !ds.is_empty() => ds.iter().collect(),
            _ => {
                return Err(SvarError::schema(
                    format!("{path}.dates"),
                    "narrative restrictions need `date` or a non-empty `dates`",
                ))
            }
        };
        let calendar = self.calendar.ok_or_else(|| {
            SvarError::schema(
                format!("{path}.dates"),
                "narrative restrictions need a dataset to resolve dates",
            )
        })?;
        dates
            .into_iter()
            .map(|d| {
                let ym = YearMonth::parse(d)
                    .map_err(|m| SvarError::schema(format!("{path}.dates"), m))?;
                calendar
                    .innovation_index(ym)
                    .ok_or_else(|| SvarError::UnknownDate(d.clone()))
            })
            .collect()
    }
}

fn horizons_of(e: &RawEntry, path: &str) -> Result<Vec<usize>> {
    match (e.horizon, &e.horizons) {
        (Some(h), None) => Ok(vec![h]),
        (None, Some(hs)) if !hs.is_empty() => Ok(hs.clone()),
        (None, None) => Ok(vec![0]),
        _ => Err(SvarError::schema(
            format!("{path}.horizons"),
            "give either `horizon` or a non-empty `horizons`",
        )),
    }
}

fn sign_of(e: &RawEntry, path: &str) -> Result<Sign> {
    match &e.sign {
        Some(s) => Sign::parse(s, &format!("{path}.sign")),
        None => Ok(Sign::Positive),
    }
}

fn direction_of(e: &RawEntry, path: &str) -> Result<BoundDirection> {
    match e.direction.as_deref() {
        None | Some("upper") | Some("<=") => Ok(BoundDirection::Upper),
        Some("lower") | Some(">=") => Ok(BoundDirection::Lower),
        Some(other) => Err(SvarError::schema(
            format!("{path}.direction"),
            format!("unknown direction `{other}`"),
        )),
    }
}

fn bound_of(e: &RawEntry, path: &str) -> Result<f64> {
    match e.bound {
        Some(b) if b.is_finite() => Ok(b),
        Some(_) => Err(SvarError::schema(format!("{path}.bound"), "bound must be finite")),
        None => Err(SvarError::schema(format!("{path}.bound"), "missing field")),
    }
}

/// Parse a restriction document.
///
/// Entries keep document order; horizon and date lists expand in place, one
/// margin per element. `calendar` resolves narrative dates against the dataset.
pub fn parse_restrictions(text: &str, calendar: Option<&SampleCalendar>) -> Result<RestrictionSet> {
    let raw: RawConfig = serde_yaml::from_str(text).map_err(|e| {
        let path = e
            .location()
            .map(|l| format!("line {}, column {}", l.line(), l.column()))
            .unwrap_or_else(|| "<document>".into());
        SvarError::schema(path, e.to_string())
    })?;
    if raw.variables.is_empty() {
        return Err(SvarError::schema("variables", "at least one variable is required"));
    }
    if raw.variables.len() != raw.shocks.len() {
        return Err(SvarError::schema(
            "shocks",
            "number of shocks must equal number of variables",
        ));
    }
    if raw.restrictions.is_empty() {
        return Err(SvarError::schema(
            "restrictions",
            "at least one restriction is required",
        ));
    }
    let mode = match raw.sign_normalisation.as_deref() {
        None | Some("soft") => NormalisationMode::Soft,
        Some("mechanical") => NormalisationMode::Mechanical,
        Some(other) => {
            return Err(SvarError::schema(
                "sign_normalisation",
                format!("expected `mechanical` or `soft`, got `{other}`"),
            ))
        }
    };
    let resolver = Resolver {
        variables: &raw.variables,
        shocks: &raw.shocks,
        calendar,
    };
    let n = raw.variables.len();

    let mut restrictions = Vec::new();
    let mut explicit_normalised = Vec::new();
    for (idx, e) in raw.restrictions.iter().enumerate() {
        let path = format!("restrictions[{idx}]");
        match e.kind.as_str() {
            "irf-sign" => {
                let variable = resolver.variable(&e.variable, &path, "variable")?;
                let shock = resolver.shock(&e.shock, &path)?;
                let sign = sign_of(e, &path)?;
                let threshold = e.threshold.unwrap_or(0.0);
                for horizon in horizons_of(e, &path)? {
                    restrictions.push(Restriction::IrfSign {
                        variable,
                        shock,
                        horizon,
                        sign,
                        threshold,
                        cumulative: e.cumulative.unwrap_or(false),
                    });
                }
            }
            "irf-ranking" => {
                let variable = resolver.variable(&e.variable, &path, "variable")?;
                let shock = resolver.shock(&e.shock, &path)?;
                let versus = e
                    .versus
                    .ok_or_else(|| SvarError::schema(format!("{path}.versus"), "missing field"))?;
                for horizon in horizons_of(e, &path)? {
                    if horizon == versus {
                        return Err(SvarError::schema(
                            format!("{path}.versus"),
                            "ranking horizons must differ",
                        ));
                    }
                    restrictions.push(Restriction::IrfRanking {
                        variable,
                        shock,
                        horizon,
                        versus,
                        cumulative: e.cumulative.unwrap_or(false),
                    });
                }
            }
            "structural-sign" => restrictions.push(Restriction::StructuralSign {
                variable: resolver.variable(&e.variable, &path, "variable")?,
                shock: resolver.shock(&e.shock, &path)?,
                sign: sign_of(e, &path)?,
            }),
            "elasticity-bound" => restrictions.push(Restriction::ElasticityBound {
                numerator: resolver.variable(&e.numerator, &path, "numerator")?,
                denominator: resolver.variable(&e.denominator, &path, "denominator")?,
                shock: resolver.shock(&e.shock, &path)?,
                bound: bound_of(e, &path)?,
                direction: direction_of(e, &path)?,
                denominator_sign: None,
            }),
            "irf-ratio-bound" => {
                let numerator = resolver.variable(&e.numerator, &path, "numerator")?;
                let denominator = resolver.variable(&e.denominator, &path, "denominator")?;
                let shock = resolver.shock(&e.shock, &path)?;
                let bound = bound_of(e, &path)?;
                let direction = direction_of(e, &path)?;
                for horizon in horizons_of(e, &path)? {
                    restrictions.push(Restriction::IrfRatioBound {
                        numerator,
                        denominator,
                        shock,
                        horizon,
                        bound,
                        direction,
                        cumulative: e.cumulative.unwrap_or(false),
                        denominator_sign: None,
                    });
                }
            }
            "narrative-shock-sign" => {
                let shock = resolver.shock(&e.shock, &path)?;
                let sign = sign_of(e, &path)?;
                for period in resolver.periods(e, &path)? {
                    restrictions.push(Restriction::NarrativeShockSign {
                        shock,
                        period,
                        sign,
                    });
                }
            }
            kind @ ("narrative-hd-most" | "narrative-hd-least") => {
                if n < 2 {
                    return Err(SvarError::schema(
                        path,
                        "historical-decomposition rankings need at least two shocks",
                    ));
                }
                let variable = resolver.variable(&e.variable, &path, "variable")?;
                let shock = resolver.shock(&e.shock, &path)?;
                let span = e.span.unwrap_or(0);
                for period in resolver.periods(e, &path)? {
                    restrictions.push(if kind == "narrative-hd-most" {
                        Restriction::NarrativeHdMost {
                            variable,
                            shock,
                            period,
                            span,
                        }
                    } else {
                        Restriction::NarrativeHdLeast {
                            variable,
                            shock,
                            period,
                            span,
                        }
                    });
                }
            }
            "sign-normalisation" => explicit_normalised.push(resolver.shock(&e.shock, &path)?),
            other => {
                return Err(SvarError::schema(
                    format!("{path}.kind"),
                    format!("unknown restriction kind `{other}`"),
                ))
            }
        }
    }

    // Cross-multiply ratio bounds where a sign restriction pins the denominator.
    let pinned: Vec<(usize, usize, usize, bool, Sign)> = restrictions
        .iter()
        .filter_map(|r| match *r {
            Restriction::IrfSign {
                variable,
                shock,
                horizon,
                sign,
                threshold,
                cumulative,
            } if threshold >= 0.0 || sign == Sign::Negative && threshold <= 0.0 => {
                Some((variable, shock, horizon, cumulative, sign))
            }
            _ => None,
        })
        .collect();
    let lookup = |var: usize, shock: usize, h: usize, cum: bool| {
        pinned
            .iter()
            .find(|p| p.0 == var && p.1 == shock && p.2 == h && p.3 == cum)
            .map(|p| p.4)
    };
    for r in restrictions.iter_mut() {
        match r {
            Restriction::ElasticityBound {
                denominator,
                shock,
                denominator_sign,
                ..
            } => *denominator_sign = lookup(*denominator, *shock, 0, false),
            Restriction::IrfRatioBound {
                denominator,
                shock,
                horizon,
                cumulative,
                denominator_sign,
                ..
            } => *denominator_sign = lookup(*denominator, *shock, *horizon, *cumulative),
            _ => {}
        }
        if matches!(
            r,
            Restriction::ElasticityBound {
                denominator_sign: None,
                ..
            } | Restriction::IrfRatioBound {
                denominator_sign: None,
                ..
            }
        ) {
            log::info!("ratio bound without a sign-restricted denominator uses the raw ratio margin: {r:?}");
        }
    }

    let mut seen = HashSet::new();
    for r in &restrictions {
        if !seen.insert(r.key()) {
            log::warn!("duplicate restriction {r:?}");
        }
    }

    let normalised_shocks = if explicit_normalised.is_empty() {
        (0..n).collect()
    } else {
        let mut v = explicit_normalised;
        v.sort_unstable();
        v.dedup();
        v
    };
    RestrictionSet::new(
        raw.variables.clone(),
        raw.shocks.clone(),
        restrictions,
        normalised_shocks,
        mode,
    )
}
