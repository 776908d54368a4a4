//! Gaussian mixture representation and EM fitting.
//!
//! A mixture with `k` components in `d` dimensions has density
//!
//! ```text
//! f(x) = Σ_k w_k · N(x; μ_k, Σ_k)
//! ```
//!
//! where the shape of the `Σ_k` is restricted by a [`CovarianceConstraint`].
//! All likelihood evaluations go through per-component log-densities combined
//! with log-sum-exp, and every covariance is factorized by Cholesky before use;
//! a failed factorization is how divergence is detected.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Structural restriction on component covariances.
///
/// Variants are declared in complexity order, so the derived `Ord` is
/// `Spherical < Diag < Tied < Full`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceConstraint {
    /// One variance per component.
    Spherical,
    /// One variance per component and coordinate.
    Diag,
    /// One full covariance shared by all components.
    Tied,
    /// Unconstrained covariance per component.
    Full,
}

impl CovarianceConstraint {
    pub const ALL: [CovarianceConstraint; 4] = [
        CovarianceConstraint::Spherical,
        CovarianceConstraint::Diag,
        CovarianceConstraint::Tied,
        CovarianceConstraint::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CovarianceConstraint::Spherical => "spherical",
            CovarianceConstraint::Diag => "diag",
            CovarianceConstraint::Tied => "tied",
            CovarianceConstraint::Full => "full",
        }
    }
}

impl fmt::Display for CovarianceConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CovarianceConstraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spherical" => Ok(Self::Spherical),
            "diag" | "diagonal" => Ok(Self::Diag),
            "tied" => Ok(Self::Tied),
            "full" => Ok(Self::Full),
            other => Err(Error::Input(format!(
                "unknown covariance constraint `{other}`"
            ))),
        }
    }
}

/// Constraint-shaped covariance storage. Matrices are row-major `d × d`.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariances {
    Full(Vec<Vec<f64>>),
    Tied(Vec<f64>),
    Diag(Vec<Vec<f64>>),
    Spherical(Vec<f64>),
}

impl Covariances {
    pub fn constraint(&self) -> CovarianceConstraint {
        match self {
            Covariances::Full(_) => CovarianceConstraint::Full,
            Covariances::Tied(_) => CovarianceConstraint::Tied,
            Covariances::Diag(_) => CovarianceConstraint::Diag,
            Covariances::Spherical(_) => CovarianceConstraint::Spherical,
        }
    }

    /// Dense `d × d` covariance of component `j`.
    pub fn component_matrix(&self, j: usize, d: usize) -> DMatrix<f64> {
        match self {
            Covariances::Full(m) => DMatrix::from_row_slice(d, d, &m[j]),
            Covariances::Tied(m) => DMatrix::from_row_slice(d, d, m),
            Covariances::Diag(v) => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&v[j]))
            }
            Covariances::Spherical(v) => DMatrix::identity(d, d) * v[j],
        }
    }

    fn check_shape(&self, k: usize, d: usize) -> Result<()> {
        let ok = match self {
            Covariances::Full(m) => m.len() == k && m.iter().all(|c| c.len() == d * d),
            Covariances::Tied(m) => m.len() == d * d,
            Covariances::Diag(v) => v.len() == k && v.iter().all(|c| c.len() == d),
            Covariances::Spherical(v) => v.len() == k,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!(
                "{} covariance storage does not match k={k}, d={d}",
                self.constraint()
            )))
        }
    }
}

/// A fitted (or initial) Gaussian mixture.
///
/// Stored covariances already include `reg_covar` on their diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covariances: Covariances,
    reg_covar: f64,
}

impl GmmModel {
    pub fn new(
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        covariances: Covariances,
        reg_covar: f64,
    ) -> Result<Self> {
        let k = weights.len();
        if k == 0 {
            return Err(Error::Input(
                "a mixture needs at least one component".into(),
            ));
        }
        if means.len() != k {
            return Err(Error::Input(format!(
                "{} means for {k} weights",
                means.len()
            )));
        }
        let d = means[0].len();
        if d == 0 || means.iter().any(|m| m.len() != d) {
            return Err(Error::Input(
                "means must share one positive dimension".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Input(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::Input(format!("weights sum to {total}, not 1")));
        }
        if !(reg_covar.is_finite() && reg_covar >= 0.0) {
            return Err(Error::Input(format!(
                "reg_covar must be nonnegative, got {reg_covar}"
            )));
        }
        covariances.check_shape(k, d)?;
        Ok(Self {
            weights,
            means,
            covariances,
            reg_covar,
        })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn d(&self) -> usize {
        self.means[0].len()
    }

    pub fn constraint(&self) -> CovarianceConstraint {
        self.covariances.constraint()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn covariances(&self) -> &Covariances {
        &self.covariances
    }

    pub fn reg_covar(&self) -> f64 {
        self.reg_covar
    }
}

/// Knobs of a single EM run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmSettings {
    pub max_iter: usize,
    /// Threshold on the change of the mean per-sample log-likelihood.
    pub tol: f64,
    pub reg_covar: f64,
}

impl Default for EmSettings {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-3,
            reg_covar: 0.0,
        }
    }
}

impl EmSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::Input("max_iter must be at least 1".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Input(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !(self.reg_covar.is_finite() && self.reg_covar >= 0.0) {
            return Err(Error::Input(format!(
                "reg_covar must be nonnegative, got {}",
                self.reg_covar
            )));
        }
        Ok(())
    }
}

/// Outcome of [`em_fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: GmmModel,
    /// Hard assignment: most responsible component per sample.
    pub labels: Vec<usize>,
    /// Total log-likelihood `ln L̂` of `model` on the fitted data, in nats.
    pub log_likelihood: f64,
    /// Number of M-steps performed.
    pub n_iter: usize,
    /// Whether the tolerance was met before `max_iter`.
    pub converged: bool,
    /// Total log-likelihood of the initial parameters and after every M-step.
    pub log_likelihood_trace: Vec<f64>,
}

/// Per-component log-density evaluator with factorized covariances.
struct Densities<'m> {
    model: &'m GmmModel,
    /// `ln w_j - d/2 ln 2π - 1/2 ln |Σ_j|`
    log_norm: Vec<f64>,
    factors: Vec<Factor>,
}

enum Factor {
    /// Lower Cholesky factor, row-major.
    Cholesky(Vec<f64>),
    InvDiag(Vec<f64>),
    InvScalar(f64),
}

impl<'m> Densities<'m> {
    fn new(model: &'m GmmModel) -> Result<Self> {
        let k = model.k();
        let d = model.d();
        let base = -0.5 * d as f64 * (2.0 * PI).ln();
        let mut factors = Vec::new();
        let mut half_log_det = Vec::with_capacity(k);
        match &model.covariances {
            Covariances::Full(mats) => {
                for (j, m) in mats.iter().enumerate() {
                    let (l, hld) = cholesky(m, d).ok_or_else(|| not_pd(j))?;
                    factors.push(Factor::Cholesky(l));
                    half_log_det.push(hld);
                }
            }
            Covariances::Tied(m) => {
                let (l, hld) = cholesky(m, d).ok_or_else(|| not_pd(0))?;
                factors.push(Factor::Cholesky(l));
                half_log_det = vec![hld; k];
            }
            Covariances::Diag(vars) => {
                for (j, v) in vars.iter().enumerate() {
                    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                        return Err(not_pd(j));
                    }
                    half_log_det.push(0.5 * v.iter().map(|x| x.ln()).sum::<f64>());
                    factors.push(Factor::InvDiag(v.iter().map(|x| 1.0 / x).collect()));
                }
            }
            Covariances::Spherical(vars) => {
                for (j, &v) in vars.iter().enumerate() {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(not_pd(j));
                    }
                    half_log_det.push(0.5 * d as f64 * v.ln());
                    factors.push(Factor::InvScalar(1.0 / v));
                }
            }
        }
        let log_norm = model
            .weights
            .iter()
            .zip(&half_log_det)
            .map(|(w, hld)| w.ln() + base - hld)
            .collect();
        Ok(Self {
            model,
            log_norm,
            factors,
        })
    }

    /// `ln w_j + ln N(x; μ_j, Σ_j)` for every component, written into `out`.
    fn weighted_log_probs(&self, x: &[f64], diff: &mut [f64], out: &mut [f64]) {
        let d = x.len();
        let tied = self.factors.len() == 1 && self.model.k() > 1;
        for (j, slot) in out.iter_mut().enumerate() {
            let mean = &self.model.means[j];
            for ((t, xi), mi) in diff.iter_mut().zip(x).zip(mean) {
                *t = xi - mi;
            }
            let factor = &self.factors[if tied { 0 } else { j }];
            let maha = match factor {
                Factor::Cholesky(l) => {
                    // Forward substitution L z = diff, in place.
                    let mut acc = 0.0;
                    for r in 0..d {
                        let row = &l[r * d..r * d + r];
                        let s: f64 = row.iter().zip(&diff[..r]).map(|(a, b)| a * b).sum();
                        let z = (diff[r] - s) / l[r * d + r];
                        diff[r] = z;
                        acc += z * z;
                    }
                    acc
                }
                Factor::InvDiag(inv) => diff.iter().zip(inv).map(|(t, p)| t * t * p).sum(),
                Factor::InvScalar(p) => diff.iter().map(|t| t * t).sum::<f64>() * p,
            };
            *slot = self.log_norm[j] - 0.5 * maha;
        }
    }
}

fn not_pd(component: usize) -> Error {
    Error::Numeric(format!(
        "covariance of component {component} is not positive definite"
    ))
}

/// Cholesky factorization of a row-major `d × d` matrix that is positive
/// definite beyond rounding noise.
///
/// A rank-deficient scatter matrix (for example from fewer than `d + 1`
/// points) often factorizes with pivots of order `ε · scale`, which would
/// inflate the likelihood without bound. Any squared pivot at or below
/// `d · ε` times the largest diagonal entry is treated as singular.
pub(crate) fn spd_cholesky(m: &[f64], d: usize) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if m.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let scale = (0..d).map(|i| m[i * d + i]).fold(0.0, f64::max);
    let chol = DMatrix::from_row_slice(d, d, m).cholesky()?;
    let floor = d as f64 * f64::EPSILON * scale;
    let l = chol.l_dirty();
    if (0..d).any(|i| !(l[(i, i)] * l[(i, i)] > floor)) {
        return None;
    }
    Some(chol)
}

/// Lower Cholesky factor (row-major) and `½ ln |Σ|`, or `None` if `Σ` is not SPD.
fn cholesky(m: &[f64], d: usize) -> Option<(Vec<f64>, f64)> {
    let chol = spd_cholesky(m, d)?;
    let l = chol.l();
    let mut flat = vec![0.0; d * d];
    let mut half_log_det = 0.0;
    for r in 0..d {
        for c in 0..=r {
            flat[r * d + c] = l[(r, c)];
        }
        let diag = l[(r, r)];
        if !(diag.is_finite() && diag > 0.0) {
            return None;
        }
        half_log_det += diag.ln();
    }
    Some((flat, half_log_det))
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn check_dims(data: &DataMatrix, model: &GmmModel) -> Result<()> {
    if data.ncols() != model.d() {
        return Err(Error::Input(format!(
            "data has {} columns but the model has dimension {}",
            data.ncols(),
            model.d()
        )));
    }
    Ok(())
}

/// E-step: row-normalized responsibilities (n × k, row-major) and total log-likelihood.
fn e_step(data: &DataMatrix, dens: &Densities<'_>) -> (Vec<f64>, f64) {
    let k = dens.model.k();
    let mut resp = vec![0.0; data.nrows() * k];
    let mut diff = vec![0.0; data.ncols()];
    let mut total = 0.0;
    for (row, out) in data.rows().zip(resp.chunks_exact_mut(k)) {
        dens.weighted_log_probs(row, &mut diff, out);
        let lse = log_sum_exp(out);
        total += lse;
        out.iter_mut().for_each(|v| *v = (*v - lse).exp());
    }
    (resp, total)
}

/// First index of the maximum; `NaN`s never win.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = j;
        }
    }
    best
}

/// Total log-likelihood `Σ_i ln f(x_i)`.
pub fn log_likelihood(data: &DataMatrix, model: &GmmModel) -> Result<f64> {
    check_dims(data, model)?;
    let dens = Densities::new(model)?;
    let k = model.k();
    let mut buf = vec![0.0; k];
    let mut diff = vec![0.0; data.ncols()];
    let mut total = 0.0;
    for row in data.rows() {
        dens.weighted_log_probs(row, &mut diff, &mut buf);
        total += log_sum_exp(&buf);
    }
    if !total.is_finite() {
        return Err(Error::Numeric("log-likelihood is not finite".into()));
    }
    Ok(total)
}

/// Posterior component probabilities, one row per sample.
pub fn responsibilities(data: &DataMatrix, model: &GmmModel) -> Result<Vec<Vec<f64>>> {
    check_dims(data, model)?;
    let dens = Densities::new(model)?;
    let (resp, _) = e_step(data, &dens);
    Ok(resp.chunks_exact(model.k()).map(<[f64]>::to_vec).collect())
}

/// Most probable component per sample; ties go to the lowest component index.
pub fn predict_labels(data: &DataMatrix, model: &GmmModel) -> Result<Vec<usize>> {
    check_dims(data, model)?;
    let dens = Densities::new(model)?;
    let mut buf = vec![0.0; model.k()];
    let mut diff = vec![0.0; data.ncols()];
    Ok(data
        .rows()
        .map(|row| {
            dens.weighted_log_probs(row, &mut diff, &mut buf);
            argmax(&buf)
        })
        .collect())
}

/// One-hot responsibilities for a hard labeling.
pub(crate) fn hard_responsibilities(labels: &[usize], k: usize) -> Vec<f64> {
    let mut resp = vec![0.0; labels.len() * k];
    for (i, &l) in labels.iter().enumerate() {
        resp[i * k + l] = 1.0;
    }
    resp
}

/// M-step: maximum-likelihood parameters under `constraint` given responsibilities,
/// with `reg` added to every covariance diagonal.
pub(crate) fn m_step(
    data: &DataMatrix,
    resp: &[f64],
    k: usize,
    constraint: CovarianceConstraint,
    reg: f64,
) -> Result<GmmModel> {
    let n = data.nrows();
    let d = data.ncols();
    let mut nk = vec![0.0; k];
    let mut means = vec![vec![0.0; d]; k];
    for (row, r) in data.rows().zip(resp.chunks_exact(k)) {
        for j in 0..k {
            if r[j] != 0.0 {
                nk[j] += r[j];
                for (m, x) in means[j].iter_mut().zip(row) {
                    *m += r[j] * x;
                }
            }
        }
    }
    // Empty components divide by a tiny floor instead of zero.
    let denom: Vec<f64> = nk.iter().map(|w| w.max(10.0 * f64::EPSILON)).collect();
    for (m, &w) in means.iter_mut().zip(&denom) {
        m.iter_mut().for_each(|v| *v /= w);
    }

    let covariances = match constraint {
        CovarianceConstraint::Full | CovarianceConstraint::Tied => {
            let mut scatter = vec![vec![0.0; d * d]; k];
            let mut diff = vec![0.0; d];
            for (row, r) in data.rows().zip(resp.chunks_exact(k)) {
                for j in 0..k {
                    if r[j] == 0.0 {
                        continue;
                    }
                    for ((t, x), m) in diff.iter_mut().zip(row).zip(&means[j]) {
                        *t = x - m;
                    }
                    let s = &mut scatter[j];
                    for a in 0..d {
                        let ra = r[j] * diff[a];
                        for b in 0..=a {
                            s[a * d + b] += ra * diff[b];
                        }
                    }
                }
            }
            let symmetrize = |s: &mut Vec<f64>, scale: f64| {
                for a in 0..d {
                    for b in 0..=a {
                        let v = s[a * d + b] / scale;
                        s[a * d + b] = v;
                        s[b * d + a] = v;
                    }
                    s[a * d + a] += reg;
                }
            };
            if constraint == CovarianceConstraint::Full {
                for (s, &w) in scatter.iter_mut().zip(&denom) {
                    symmetrize(s, w);
                }
                Covariances::Full(scatter)
            } else {
                let mut pooled = vec![0.0; d * d];
                for s in &scatter {
                    for (p, v) in pooled.iter_mut().zip(s) {
                        *p += v;
                    }
                }
                let total: f64 = nk.iter().sum();
                symmetrize(&mut pooled, total);
                Covariances::Tied(pooled)
            }
        }
        CovarianceConstraint::Diag | CovarianceConstraint::Spherical => {
            let mut vars = vec![vec![0.0; d]; k];
            for (row, r) in data.rows().zip(resp.chunks_exact(k)) {
                for j in 0..k {
                    if r[j] == 0.0 {
                        continue;
                    }
                    for ((v, x), m) in vars[j].iter_mut().zip(row).zip(&means[j]) {
                        *v += r[j] * (x - m) * (x - m);
                    }
                }
            }
            for (v, &w) in vars.iter_mut().zip(&denom) {
                v.iter_mut().for_each(|s| *s = *s / w + reg);
            }
            if constraint == CovarianceConstraint::Diag {
                Covariances::Diag(vars)
            } else {
                Covariances::Spherical(
                    vars.iter()
                        .map(|v| v.iter().sum::<f64>() / d as f64)
                        .collect(),
                )
            }
        }
    };

    let total: f64 = nk.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Numeric(format!(
            "responsibilities of {n} samples sum to {total}"
        )));
    }
    let weights: Vec<f64> = nk.iter().map(|w| w / total).collect();
    GmmModel::new(weights, means, covariances, reg)
}

/// Fits a `k`-component mixture by EM starting from `init`.
///
/// Without `init` only `k = 1` is accepted; it starts from (and immediately
/// converges to) the closed-form single Gaussian. Iteration stops once the mean
/// per-sample log-likelihood changes by less than `settings.tol`, or after
/// `settings.max_iter` M-steps. Reaching the cap is reported through
/// `converged = false`, not as an error.
pub fn em_fit(
    data: &DataMatrix,
    k: usize,
    constraint: CovarianceConstraint,
    settings: &EmSettings,
    init: Option<&GmmModel>,
) -> Result<FitResult> {
    settings.validate()?;
    let n = data.nrows();
    if k == 0 {
        return Err(Error::Input("k must be at least 1".into()));
    }
    if n < k {
        return Err(Error::Input(format!(
            "{n} samples cannot support {k} components"
        )));
    }
    let mut model = match init {
        Some(m) => {
            if m.k() != k || m.d() != data.ncols() || m.constraint() != constraint {
                return Err(Error::Input(format!(
                    "initial model is (k={}, d={}, {}), expected (k={k}, d={}, {constraint})",
                    m.k(),
                    m.d(),
                    m.constraint(),
                    data.ncols()
                )));
            }
            m.clone()
        }
        None if k == 1 => {
            let resp = vec![1.0; n];
            m_step(data, &resp, 1, constraint, settings.reg_covar).map_err(em_error)?
        }
        None => {
            return Err(Error::Input(
                "em_fit needs initial parameters when k > 1".into(),
            ))
        }
    };

    let nf = n as f64;
    let (mut resp, mut ll) = evaluate(data, &model)?;
    let mut trace = vec![ll];
    let mut converged = false;
    let mut n_iter = 0;
    while n_iter < settings.max_iter {
        n_iter += 1;
        model = m_step(data, &resp, k, constraint, settings.reg_covar).map_err(em_error)?;
        let prev = ll;
        (resp, ll) = evaluate(data, &model)?;
        trace.push(ll);
        if ((ll - prev) / nf).abs() < settings.tol {
            converged = true;
            break;
        }
    }

    let labels = resp.chunks_exact(k).map(argmax).collect();
    Ok(FitResult {
        model,
        labels,
        log_likelihood: ll,
        n_iter,
        converged,
        log_likelihood_trace: trace,
    })
}

fn evaluate(data: &DataMatrix, model: &GmmModel) -> Result<(Vec<f64>, f64)> {
    let dens = Densities::new(model).map_err(em_error)?;
    let (resp, ll) = e_step(data, &dens);
    if !ll.is_finite() || resp.iter().any(|r| !r.is_finite()) {
        return Err(Error::EmFailure("log-likelihood is not finite".into()));
    }
    Ok((resp, ll))
}

fn em_error(e: Error) -> Error {
    match e {
        Error::Numeric(msg) | Error::Input(msg) => Error::EmFailure(msg),
        other => other,
    }
}

/// Number of free parameters of a `k`-component mixture in `d` dimensions.
pub fn param_count(k: usize, d: usize, constraint: CovarianceConstraint) -> usize {
    let cov = match constraint {
        CovarianceConstraint::Full => k * d * (d + 1) / 2,
        CovarianceConstraint::Tied => d * (d + 1) / 2,
        CovarianceConstraint::Diag => k * d,
        CovarianceConstraint::Spherical => k,
    };
    (k - 1) + k * d + cov
}

/// Information criterion used to rank fitted models. Both are larger-is-better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// `2 ln L̂ − p ln n`
    #[default]
    Bic,
    /// `2 ln L̂ − 2p`
    Aic,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Bic => "bic",
            Criterion::Aic => "aic",
        }
    }

    pub fn evaluate(self, log_likelihood: f64, params: usize, n: usize) -> Result<f64> {
        if !log_likelihood.is_finite() {
            return Err(Error::Numeric("log-likelihood is not finite".into()));
        }
        if n == 0 {
            return Err(Error::Input("criterion needs n >= 1".into()));
        }
        let p = params as f64;
        Ok(match self {
            Criterion::Bic => 2.0 * log_likelihood - p * (n as f64).ln(),
            Criterion::Aic => 2.0 * log_likelihood - 2.0 * p,
        })
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bic" => Ok(Criterion::Bic),
            "aic" => Ok(Criterion::Aic),
            other => Err(Error::Input(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Criterion value of a fit on `n` samples.
pub fn criterion_value(fit: &FitResult, n: usize, criterion: Criterion) -> Result<f64> {
    let m = &fit.model;
    criterion.evaluate(
        fit.log_likelihood,
        param_count(m.k(), m.d(), m.constraint()),
        n,
    )
}
