//! Closed-form influence functions for the location, covariance and
//! portfolio-weight estimators, plus the per-observation data influence
//! measure used to rank observations by their leverage on the optimized
//! portfolio.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, dot, mahalanobis_sq, SymMatrix};
use crate::portfolio::optimal_weights;
use crate::pseudodistance::{Alpha, ModelParams};

/// Evaluation context for the influence functions: model parameters, the
/// tuning parameter, and the risk aversion (used only by the weight
/// influence function).
#[derive(Debug, Clone)]
pub struct InfluenceContext {
    pub params: ModelParams,
    pub alpha: Alpha,
    pub lambda: f64,
}

impl InfluenceContext {
    pub fn new(params: ModelParams, alpha: Alpha, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "risk aversion must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self { params, alpha, lambda })
    }
}

fn check_dim(x: &[f64], params: &ModelParams) -> Result<()> {
    if x.len() != params.dim() {
        return Err(Error::DimensionMismatch { expected: params.dim(), actual: x.len() });
    }
    Ok(())
}

/// Influence function of the location estimator:
/// `(sqrt(alpha+1))^{N+2} (x - mu) exp(-alpha/2 ||x - mu||^2_{Sigma^{-1}})`.
///
/// Bounded in `x` for every positive `alpha`; reduces to `x - mu` at zero.
pub fn if_location(x: &[f64], ctx: &InfluenceContext) -> Result<Vec<f64>> {
    check_dim(x, &ctx.params)?;
    let n = ctx.params.dim();
    let a = ctx.alpha.value();
    let d = mahalanobis_sq(x, &ctx.params.mu, &ctx.params.sigma)?;
    let factor = (a + 1.0).sqrt().powi(n as i32 + 2) * (-0.5 * a * d).exp();
    Ok(x.iter().zip(&ctx.params.mu).map(|(xi, mi)| factor * (xi - mi)).collect())
}

/// Influence function of the covariance estimator:
/// `(sqrt(alpha+1))^{N+4} [(x-mu)(x-mu)^t - Sigma/(alpha+1)] exp(-alpha/2 d)`.
pub fn if_covariance(x: &[f64], ctx: &InfluenceContext) -> Result<SymMatrix> {
    check_dim(x, &ctx.params)?;
    let n = ctx.params.dim();
    let a = ctx.alpha.value();
    let d = mahalanobis_sq(x, &ctx.params.mu, &ctx.params.sigma)?;
    let factor = (a + 1.0).sqrt().powi(n as i32 + 4) * (-0.5 * a * d).exp();
    let diff: Vec<f64> = x.iter().zip(&ctx.params.mu).map(|(xi, mi)| xi - mi).collect();
    Ok(SymMatrix::from_fn(n, |i, j| {
        factor * (diff[i] * diff[j] - ctx.params.sigma.get(i, j) / (a + 1.0))
    }))
}

/// Assembles the weight influence function from given location and
/// covariance influence values. This is the linear map the weight estimator
/// inherits from the plug-in formula; [`if_weights`] feeds it the
/// closed-form component influences.
///
/// The output is tangent to the budget constraint: its entries sum to zero.
pub fn assemble_weight_if(
    if_mu: &[f64],
    if_sigma: &SymMatrix,
    params: &ModelParams,
    lambda: f64,
) -> Result<Vec<f64>> {
    let n = params.dim();
    if if_mu.len() != n || if_sigma.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: if_mu.len() });
    }
    let chol = cholesky(&params.sigma)?;
    let ones = vec![1.0; n];
    let sinv_e = chol.solve(&ones);
    let sinv_mu = chol.solve(&params.mu);
    let e_sinv_e: f64 = sinv_e.iter().sum();
    let e_sinv_mu: f64 = sinv_mu.iter().sum();
    let weights = optimal_weights(params, lambda)?;

    // -Sigma^{-1} IF_Sigma p*
    let if_sigma_p = if_sigma.mul_vec(&weights);
    let lead: Vec<f64> = chol.solve(&if_sigma_p).iter().map(|v| -v).collect();

    // scalar coefficients of the e_N corrections inside the braces
    let if_sigma_sinv_mu = if_sigma.mul_vec(&sinv_mu);
    let c_mu = (dot(&sinv_e, &if_sigma_sinv_mu) - dot(&sinv_e, if_mu)) / e_sinv_e;
    let if_sigma_sinv_e = if_sigma.mul_vec(&sinv_e);
    let c_e = dot(&sinv_e, &if_sigma_sinv_e) * (e_sinv_mu - lambda) / (e_sinv_e * e_sinv_e);

    let braces: Vec<f64> = if_mu.iter().map(|v| v + c_mu - c_e).collect();
    let correction = chol.solve(&braces);
    Ok(lead
        .iter()
        .zip(&correction)
        .map(|(l, c)| l + c / lambda)
        .collect())
}

/// Influence function of the optimal portfolio-weight estimator, assembled
/// from [`if_location`] and [`if_covariance`].
pub fn if_weights(x: &[f64], ctx: &InfluenceContext) -> Result<Vec<f64>> {
    let loc = if_location(x, ctx)?;
    let cov = if_covariance(x, ctx)?;
    assemble_weight_if(&loc, &cov, &ctx.params, ctx.lambda)
}

/// Data influence measure: the Euclidean norm of the weight influence
/// function with the maximum-likelihood (`alpha = 0`) influence forms,
/// evaluated at robustly estimated parameter values so that outliers do not
/// mask themselves.
pub fn dim_measure(x: &[f64], robust_params: &ModelParams, lambda: f64) -> Result<f64> {
    dim_measure_alpha(x, robust_params, lambda, Alpha::ZERO)
}

/// Variant of [`dim_measure`] with the influence forms taken at an arbitrary
/// tuning parameter, for inspecting how much a robust fit mutes each
/// observation.
pub fn dim_measure_alpha(
    x: &[f64],
    robust_params: &ModelParams,
    lambda: f64,
    alpha: Alpha,
) -> Result<f64> {
    let ctx = InfluenceContext::new(robust_params.clone(), alpha, lambda)?;
    let iw = if_weights(x, &ctx)?;
    Ok(dot(&iw, &iw).sqrt())
}

/// DIM series for every observation of a sample.
pub fn dim_series(
    sample: &crate::estimators::Sample,
    robust_params: &ModelParams,
    lambda: f64,
) -> Result<Vec<f64>> {
    sample.rows().map(|row| dim_measure(row, robust_params, lambda)).collect()
}
