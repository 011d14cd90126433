//! The pseudodistance family between multivariate normal models, its
//! normalizing constant, the empirical estimation objective and the
//! estimating-equation residuals.
//!
//! For two normal densities all integrals involved have closed Gaussian
//! forms; everything is evaluated in log space so that high dimensions and
//! large tuning parameters do not underflow.

use crate::error::{Error, Result};
use crate::estimators::Sample;
use crate::linalg::{cholesky, SymMatrix};

/// Raw exponential weight mass below which the estimating equations are
/// declared degenerate instead of silently propagating zeros.
pub const DEGENERATE_WEIGHT_SUM: f64 = 1e-300;

/// Nonnegative tuning parameter trading efficiency (small values) against
/// robustness (large values). Zero selects the exact maximum-likelihood
/// branch of every formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha(f64);

impl Alpha {
    pub const ZERO: Alpha = Alpha(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha must be finite and nonnegative, got {value}"
            )));
        }
        Ok(Alpha(value))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

/// Mean vector and covariance matrix of a multivariate normal model.
///
/// The covariance must be positive definite; this is enforced by the
/// Cholesky factorization wherever the matrix is actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub mu: Vec<f64>,
    pub sigma: SymMatrix,
}

impl ModelParams {
    pub fn new(mu: Vec<f64>, sigma: SymMatrix) -> Result<Self> {
        if mu.len() != sigma.dim() {
            return Err(Error::DimensionMismatch { expected: sigma.dim(), actual: mu.len() });
        }
        if mu.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
        }
        if !mu.iter().all(|v| v.is_finite()) || !sigma.all_finite() {
            return Err(Error::InvalidArgument("model parameters must be finite".into()));
        }
        Ok(Self { mu, sigma })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// `ln \int p^{alpha+1} d lambda` for a normal density with covariance
/// log-determinant `log_det` in dimension `n`.
fn log_power_integral(log_det: f64, n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    -(alpha * nf / 2.0) * (2.0 * std::f64::consts::PI).ln()
        - (alpha / 2.0) * log_det
        - (nf / 2.0) * (alpha + 1.0).ln()
}

/// Pseudodistance between two normal models.
///
/// For positive `alpha` the three defining Gaussian integrals are evaluated
/// in closed form and combined; at `alpha = 0` the modified Kullback-Leibler
/// divergence is returned. The result is nonnegative and vanishes exactly
/// when `p == q`; values within rounding noise of zero are clamped to zero.
pub fn r_alpha_normals(p: &ModelParams, q: &ModelParams, alpha: Alpha) -> Result<f64> {
    let n = p.dim();
    if q.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: q.dim() });
    }
    if p == q {
        return Ok(0.0);
    }
    let chol_p = cholesky(&p.sigma)?;
    let chol_q = cholesky(&q.sigma)?;
    let log_det_p = chol_p.log_det();
    let log_det_q = chol_q.log_det();
    let a = alpha.value();
    let nf = n as f64;

    let value = if alpha.is_zero() {
        // int ln(q/p) dQ: closed-form Gaussian Kullback-Leibler divergence
        let trace = {
            let p_inv = chol_p.inverse();
            let mut t = 0.0;
            for i in 0..n {
                for j in 0..n {
                    t += p_inv.get(i, j) * q.sigma.get(j, i);
                }
            }
            t
        };
        let diff: Vec<f64> = q.mu.iter().zip(&p.mu).map(|(a, b)| a - b).collect();
        let mut scratch = vec![0.0; n];
        let quad = chol_p.quad_form_inv(&diff, &mut scratch);
        0.5 * (log_det_p - log_det_q + trace + quad - nf)
    } else {
        let l1 = log_power_integral(log_det_p, n, a);
        let l2 = log_power_integral(log_det_q, n, a);
        // int p^alpha dQ: scale the p-kernel into a Gaussian and convolve
        let mixed = SymMatrix::from_fn(n, |i, j| p.sigma.get(i, j) / a + q.sigma.get(i, j));
        let chol_m = cholesky(&mixed)?;
        let diff: Vec<f64> = p.mu.iter().zip(&q.mu).map(|(a, b)| a - b).collect();
        let mut scratch = vec![0.0; n];
        let quad = chol_m.quad_form_inv(&diff, &mut scratch);
        let l3 = -(a * nf / 2.0) * (2.0 * std::f64::consts::PI).ln()
            + ((1.0 - a) / 2.0) * log_det_p
            - (nf / 2.0) * a.ln()
            - 0.5 * chol_m.log_det()
            - 0.5 * quad;
        l1 / (a + 1.0) + l2 / (a * (a + 1.0)) - l3 / a
    };
    // tiny negatives are rounding noise around the p = q minimum
    if value < 0.0 && value > -1e-9 {
        Ok(0.0)
    } else {
        Ok(value)
    }
}

/// Normalizing constant `C_alpha(theta) = (int p_theta^{alpha+1})^{alpha/(alpha+1)}`,
/// evaluated in log space.
pub fn c_alpha(theta: &ModelParams, alpha: Alpha) -> Result<f64> {
    let chol = cholesky(&theta.sigma)?;
    let a = alpha.value();
    let log_c = a / (a + 1.0) * log_power_integral(chol.log_det(), theta.dim(), a);
    Ok(log_c.exp())
}

/// Empirical estimation objective.
///
/// For `alpha > 0` this is `(det Sigma^{-1})^{alpha/(2(alpha+1))}` times the
/// sum of exponentially downweighted Mahalanobis terms; estimation maximizes
/// it. At `alpha = 0` it is the mean Gaussian log-likelihood of the sample.
pub fn objective(sample: &Sample, theta: &ModelParams, alpha: Alpha) -> Result<f64> {
    let n = theta.dim();
    if sample.n_assets() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: sample.n_assets() });
    }
    let chol = cholesky(&theta.sigma)?;
    let log_det = chol.log_det();
    let a = alpha.value();
    let mut scratch = vec![0.0; n];
    let mut diff = vec![0.0; n];
    if alpha.is_zero() {
        let mut acc = 0.0;
        for i in 0..sample.n_obs() {
            sub_into(sample.row(i), &theta.mu, &mut diff);
            acc += chol.quad_form_inv(&diff, &mut scratch);
        }
        let t = sample.n_obs() as f64;
        let nf = n as f64;
        Ok(-(nf / 2.0) * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det - acc / (2.0 * t))
    } else {
        let mut sum = 0.0;
        for i in 0..sample.n_obs() {
            sub_into(sample.row(i), &theta.mu, &mut diff);
            let d = chol.quad_form_inv(&diff, &mut scratch);
            sum += (-0.5 * a * d).exp();
        }
        let log_prefactor = -(a / (2.0 * (a + 1.0))) * log_det;
        Ok(log_prefactor.exp() * sum)
    }
}

#[inline]
fn sub_into(x: &[f64], mu: &[f64], out: &mut [f64]) {
    for ((o, a), b) in out.iter_mut().zip(x).zip(mu) {
        *o = a - b;
    }
}

/// Residuals of the estimating-equation system: the self-normalized
/// exponentially weighted mean minus `mu`, and the weighted scatter
/// (recentered at the input `mu`, scaled by `alpha + 1`) minus `sigma`.
/// Both components vanish at a minimum pseudodistance estimate.
pub fn fixed_point_residual(
    sample: &Sample,
    theta: &ModelParams,
    alpha: Alpha,
) -> Result<(Vec<f64>, SymMatrix)> {
    let n = theta.dim();
    let t = sample.n_obs();
    if sample.n_assets() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: sample.n_assets() });
    }
    if t < 2 {
        return Err(Error::TooFewRows { required: 2, actual: t });
    }
    let chol = cholesky(&theta.sigma)?;
    let a = alpha.value();
    let mut scratch = vec![0.0; n];
    let mut diff = vec![0.0; n];
    let mut raw = vec![0.0; t];
    let mut total = 0.0;
    for i in 0..t {
        sub_into(sample.row(i), &theta.mu, &mut diff);
        let d = chol.quad_form_inv(&diff, &mut scratch);
        let w = (-0.5 * a * d).exp();
        raw[i] = w;
        total += w;
    }
    if total < DEGENERATE_WEIGHT_SUM {
        return Err(Error::DegenerateWeights);
    }
    let mut rhs_mu = vec![0.0; n];
    let mut rhs_sigma = SymMatrix::zeros(n);
    for i in 0..t {
        let w = raw[i] / total;
        let row = sample.row(i);
        for k in 0..n {
            rhs_mu[k] += w * row[k];
        }
        let wf = (a + 1.0) * w;
        for k in 0..n {
            let dk = row[k] - theta.mu[k];
            for l in 0..=k {
                let v = rhs_sigma.get(k, l) + wf * dk * (row[l] - theta.mu[l]);
                rhs_sigma.set(k, l, v);
            }
        }
    }
    for k in 0..n {
        rhs_mu[k] -= theta.mu[k];
    }
    Ok((rhs_mu, rhs_sigma.sub(&theta.sigma)))
}
