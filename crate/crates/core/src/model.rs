//! Reduced-form VAR quantities and the structural objects built from (φ, Q):
//! impulse responses, A₀ entries, structural shocks and historical decompositions.

use crate::error::{Result, SvarError};
use crate::linalg::{cholesky_lower, solve_lower, Matrix, Vector};

/// φ: VAR coefficients B = (B₁ … B_p, c) and the Cholesky factor Σ_tr.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedFormParams {
    n: usize,
    p: usize,
    has_constant: bool,
    /// n × (np + constant); lag blocks first, constant column last.
    b: Matrix,
    sigma_tr: Matrix,
}

impl ReducedFormParams {
    pub fn new(p: usize, has_constant: bool, b: Matrix, sigma_tr: Matrix) -> Result<Self> {
        let n = sigma_tr.nrows();
        if n == 0 || sigma_tr.ncols() != n {
            return Err(SvarError::Config("Sigma_tr must be square and non-empty".into()));
        }
        let k = n * p + usize::from(has_constant);
        if b.nrows() != n || b.ncols() != k {
            return Err(SvarError::Config(format!(
                "B must be {n}x{k}, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        for i in 0..n {
            if !(sigma_tr[(i, i)] > 0.0) {
                return Err(SvarError::Config("diag(Sigma_tr) must be positive".into()));
            }
            for j in i + 1..n {
                if sigma_tr[(i, j)] != 0.0 {
                    return Err(SvarError::Config("Sigma_tr must be lower triangular".into()));
                }
            }
        }
        if b.iter().chain(sigma_tr.iter()).any(|x| !x.is_finite()) {
            return Err(SvarError::Config("phi has non-finite entries".into()));
        }
        Ok(Self {
            n,
            p,
            has_constant,
            b,
            sigma_tr,
        })
    }

    /// SVAR(0) with no intercept: φ reduces to Σ_tr.
    pub fn static_model(sigma_tr: Matrix) -> Result<Self> {
        let n = sigma_tr.nrows();
        Self::new(0, false, Matrix::zeros(n, 0), sigma_tr)
    }

    /// Bivariate SVAR(0) with φ = (σ₁₁, σ₂₁, σ₂₂).
    pub fn bivariate(s11: f64, s21: f64, s22: f64) -> Result<Self> {
        Self::static_model(Matrix::from_row_slice(2, 2, &[s11, 0.0, s21, s22]))
    }

    /// Build φ from a covariance matrix rather than its Cholesky factor.
    pub fn from_covariance(p: usize, has_constant: bool, b: Matrix, sigma: &Matrix) -> Result<Self> {
        Self::new(p, has_constant, b, cholesky_lower(sigma)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lags(&self) -> usize {
        self.p
    }

    pub fn has_constant(&self) -> bool {
        self.has_constant
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn sigma_tr(&self) -> &Matrix {
        &self.sigma_tr
    }

    /// B_l for l = 1..=p.
    pub fn lag_matrix(&self, l: usize) -> Matrix {
        assert!(l >= 1 && l <= self.p);
        self.b.columns((l - 1) * self.n, self.n).into_owned()
    }

    /// Σ_tr⁻¹ v via forward substitution.
    pub fn sigma_tr_solve(&self, v: &[f64]) -> Vector {
        solve_lower(&self.sigma_tr, v)
    }

    /// Σ_tr⁻¹ e_i.
    pub fn sigma_tr_inv_column(&self, i: usize) -> Vector {
        let mut e = vec![0.0; self.n];
        e[i] = 1.0;
        self.sigma_tr_solve(&e)
    }
}

/// Rows c_ih of C_h Σ_tr for h = 0..=H.
#[derive(Clone, Debug)]
pub struct IrfCoefficients {
    /// `levels[h]` is C_h Σ_tr.
    levels: Vec<Matrix>,
    /// `cumulative[h]` is Σ_{l ≤ h} C_l Σ_tr.
    cumulative: Vec<Matrix>,
}

impl IrfCoefficients {
    pub fn horizon(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn n(&self) -> usize {
        self.levels[0].nrows()
    }

    /// c_ih as a slice-free row copy.
    pub fn row(&self, i: usize, h: usize, cumulative: bool) -> Vector {
        let m = if cumulative {
            &self.cumulative[h]
        } else {
            &self.levels[h]
        };
        m.row(i).transpose()
    }

    pub fn matrix(&self, h: usize) -> &Matrix {
        &self.levels[h]
    }

    pub fn cumulative_matrix(&self, h: usize) -> &Matrix {
        &self.cumulative[h]
    }
}

/// C₀ = I, C_h = Σ_{l=1}^{min(h,p)} B_l C_{h−l}. For p = 0 the sum is empty and
/// C_h = 0 for h ≥ 1.
pub fn compute_irf_coefficients(phi: &ReducedFormParams, horizon: usize) -> IrfCoefficients {
    let n = phi.n();
    let lag_mats: Vec<Matrix> = (1..=phi.lags()).map(|l| phi.lag_matrix(l)).collect();
    let mut c: Vec<Matrix> = Vec::with_capacity(horizon + 1);
    c.push(Matrix::identity(n, n));
    for h in 1..=horizon {
        let mut ch = Matrix::zeros(n, n);
        for l in 1..=h.min(phi.lags()) {
            ch += &lag_mats[l - 1] * &c[h - l];
        }
        c.push(ch);
    }
    let levels: Vec<Matrix> = c.iter().map(|ch| ch * phi.sigma_tr()).collect();
    let mut cumulative = Vec::with_capacity(levels.len());
    let mut acc = Matrix::zeros(n, n);
    for lv in &levels {
        acc += lv;
        cumulative.push(acc.clone());
    }
    IrfCoefficients { levels, cumulative }
}

/// η_ijh = c_ih · q_j (or its cumulative sum over horizons ≤ h).
pub fn impulse_response(
    irf: &IrfCoefficients,
    q: &Matrix,
    i: usize,
    j: usize,
    h: usize,
    cumulative: bool,
) -> f64 {
    let m = if cumulative {
        &irf.cumulative[h]
    } else {
        &irf.levels[h]
    };
    m.row(i).iter().zip(q.column(j).iter()).map(|(a, b)| a * b).sum()
}

/// e_jᵀ A₀ e_i = (Σ_tr⁻¹ e_i)ᵀ q_j with A₀ = Qᵀ Σ_tr⁻¹.
pub fn structural_coefficient(phi: &ReducedFormParams, q: &Matrix, j: usize, i: usize) -> f64 {
    phi.sigma_tr_inv_column(i).dot(&q.column(j))
}

/// ε = Qᵀ Σ_tr⁻¹ u.
pub fn structural_shock(phi: &ReducedFormParams, q: &Matrix, u: &[f64]) -> Vector {
    let v = phi.sigma_tr_solve(u);
    q.tr_mul(&v)
}

/// Reduced-form innovations u_t, one row per usable observation.
#[derive(Clone, Debug, PartialEq)]
pub struct InnovationSeries {
    u: Matrix,
}

impl InnovationSeries {
    pub fn new(u: Matrix) -> Self {
        Self { u }
    }

    pub fn len(&self) -> usize {
        self.u.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.u.nrows() == 0
    }

    pub fn at(&self, t: usize) -> Vec<f64> {
        self.u.row(t).iter().copied().collect()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.u
    }
}

/// H_{i,j,k,k+h} = Σ_{l=0}^{h} (c_il · q_j)(q_j · Σ_tr⁻¹ u_{k+h−l}).
#[allow(clippy::too_many_arguments)]
pub fn historical_decomposition(
    phi: &ReducedFormParams,
    q: &Matrix,
    irf: &IrfCoefficients,
    u: &InnovationSeries,
    i: usize,
    j: usize,
    k: usize,
    h: usize,
) -> Result<f64> {
    if k + h >= u.len() {
        return Err(SvarError::OutOfSample(format!(
            "period {} beyond {} innovations",
            k + h,
            u.len()
        )));
    }
    if h > irf.horizon() {
        return Err(SvarError::OutOfSample(format!(
            "span {h} beyond IRF horizon {}",
            irf.horizon()
        )));
    }
    let qj = q.column(j);
    let mut total = 0.0;
    for l in 0..=h {
        let shock = phi.sigma_tr_solve(&u.at(k + h - l)).dot(&qj);
        total += impulse_response(irf, q, i, j, l, false) * shock;
    }
    Ok(total)
}

/// Regression layout of a VAR(p): Y (T_eff × n) on X (T_eff × k).
#[derive(Clone, Debug)]
pub struct VarData {
    pub y: Matrix,
    pub x: Matrix,
    pub p: usize,
    pub has_constant: bool,
}

impl VarData {
    /// Stack lags: row t of X is (y_{t−1}ᵀ, …, y_{t−p}ᵀ, 1).
    pub fn from_levels(levels: &Matrix, p: usize, has_constant: bool) -> Result<Self> {
        let (t_total, n) = (levels.nrows(), levels.ncols());
        if t_total <= p {
            return Err(SvarError::InsufficientData(format!(
                "{t_total} observations for {p} lags"
            )));
        }
        let t_eff = t_total - p;
        let k = n * p + usize::from(has_constant);
        let mut x = Matrix::zeros(t_eff, k);
        for t in 0..t_eff {
            for l in 1..=p {
                for v in 0..n {
                    x[(t, (l - 1) * n + v)] = levels[(t + p - l, v)];
                }
            }
            if has_constant {
                x[(t, k - 1)] = 1.0;
            }
        }
        let y = levels.rows(p, t_eff).into_owned();
        Ok(Self {
            y,
            x,
            p,
            has_constant,
        })
    }

    pub fn n(&self) -> usize {
        self.y.ncols()
    }

    pub fn t_eff(&self) -> usize {
        self.y.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    /// u_t = y_t − B x_t under a given coefficient matrix.
    pub fn innovations(&self, b: &Matrix) -> InnovationSeries {
        InnovationSeries::new(&self.y - &self.x * b.transpose())
    }
}

/// OLS output retained for the posterior.
#[derive(Clone, Debug)]
pub struct SufficientStats {
    pub data: VarData,
    pub b_hat: Matrix,
    /// Cholesky factor of XᵀX.
    pub xtx_chol: Matrix,
    /// Residual cross-product ÛᵀÛ.
    pub scatter: Matrix,
    pub innovations: InnovationSeries,
}

/// Least-squares VAR fit. Requires more than np + n + 1 usable observations.
pub fn estimate_reduced_form(
    levels: &Matrix,
    p: usize,
    has_constant: bool,
) -> Result<(ReducedFormParams, SufficientStats)> {
    let n = levels.ncols();
    let data = VarData::from_levels(levels, p, has_constant)?;
    let t_eff = data.t_eff();
    if t_eff <= n * p + n + 1 {
        return Err(SvarError::InsufficientData(format!(
            "{t_eff} usable observations, need more than {}",
            n * p + n + 1
        )));
    }
    let k = data.k();
    let xtx = data.x.tr_mul(&data.x);
    let xtx_chol = cholesky_lower(&xtx)
        .map_err(|_| SvarError::InsufficientData("regressors are collinear".into()))?;
    let xty = data.x.tr_mul(&data.y);
    // (XᵀX) Bᵀ = XᵀY
    let chol = nalgebra::Cholesky::new(xtx).expect("checked above");
    let b_hat = chol.solve(&xty).transpose();
    let innovations = data.innovations(&b_hat);
    let scatter = innovations.matrix().tr_mul(innovations.matrix());
    let dof = (t_eff - k) as f64;
    let sigma_hat = &scatter / dof;
    let sigma_hat = (&sigma_hat + sigma_hat.transpose()) * 0.5;
    let phi = ReducedFormParams::from_covariance(p, has_constant, b_hat.clone(), &sigma_hat)?;
    Ok((
        phi,
        SufficientStats {
            data,
            b_hat,
            xtx_chol,
            scatter,
            innovations,
        },
    ))
}
