//! Markowitz mean-variance optimization: closed-form weights, a no-short
//! active-set variant, efficient frontiers and variance-targeted selection.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, SymMatrix};
use crate::pseudodistance::ModelParams;

/// A mean-variance problem: model parameters, risk aversion, and whether
/// short positions are allowed.
#[derive(Debug, Clone)]
pub struct PortfolioProblem {
    pub params: ModelParams,
    pub lambda: f64,
    pub allow_short: bool,
}

impl PortfolioProblem {
    pub fn new(params: ModelParams, lambda: f64, allow_short: bool) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { params, lambda, allow_short })
    }

    /// Solves for the optimal weights with the configured constraint set.
    pub fn solve(&self) -> Result<Vec<f64>> {
        if self.allow_short {
            optimal_weights(&self.params, self.lambda)
        } else {
            optimal_weights_no_short(&self.params, self.lambda)
        }
    }
}

/// One optimal portfolio along the frontier.
#[derive(Debug, Clone)]
pub struct FrontierPoint {
    pub lambda: f64,
    pub weights: Vec<f64>,
    pub expected_return: f64,
    pub variance: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "risk aversion must be positive and finite, got {lambda}"
        )));
    }
    Ok(())
}

/// Closed-form optimal weights with short selling allowed:
/// `p = Sigma^{-1} (mu - eta e) / lambda` with the multiplier `eta` chosen
/// so the weights sum to one.
pub fn optimal_weights(params: &ModelParams, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let chol = cholesky(&params.sigma)?;
    let ones = vec![1.0; params.dim()];
    let sinv_mu = chol.solve(&params.mu);
    let sinv_e = chol.solve(&ones);
    let e_sinv_mu: f64 = sinv_mu.iter().sum();
    let e_sinv_e: f64 = sinv_e.iter().sum();
    let eta = (e_sinv_mu - lambda) / e_sinv_e;
    Ok(sinv_mu
        .iter()
        .zip(&sinv_e)
        .map(|(m, e)| (m - eta * e) / lambda)
        .collect())
}

/// Closed-form solve restricted to a free index set; clamped assets get
/// exactly zero weight.
fn restricted_weights(params: &ModelParams, lambda: f64, free: &[usize]) -> Result<Vec<f64>> {
    let k = free.len();
    let sub_sigma = SymMatrix::from_fn(k, |i, j| params.sigma.get(free[i], free[j]));
    let sub_mu: Vec<f64> = free.iter().map(|&i| params.mu[i]).collect();
    let sub = ModelParams::new(sub_mu, sub_sigma)?;
    let w = optimal_weights(&sub, lambda)?;
    let mut full = vec![0.0; params.dim()];
    for (&slot, value) in free.iter().zip(w) {
        full[slot] = value;
    }
    Ok(full)
}

const KKT_TOL: f64 = 1e-9;

/// Optimal weights under the additional no-short-selling constraint.
///
/// Active-set iteration on the closed form: starting from all assets free,
/// the most negative weight is clamped to zero each pass; a clamped asset
/// whose reduced gradient exceeds the free-set multiplier is released. The
/// returned weights satisfy the KKT conditions to `1e-9`.
pub fn optimal_weights_no_short(params: &ModelParams, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let n = params.dim();
    let mut free: Vec<usize> = (0..n).collect();
    // each pass clamps or releases one asset; the generous cap only trips on
    // cycling, which the KKT error reports as a solver defect
    let max_passes = 4 * n * n + 8;
    for _ in 0..max_passes {
        let weights = restricted_weights(params, lambda, &free)?;
        // clamp phase: most negative free weight goes to zero
        let mut worst: Option<(usize, f64)> = None;
        for &i in &free {
            if weights[i] < -KKT_TOL && worst.is_none_or(|(_, w)| weights[i] < w) {
                worst = Some((i, weights[i]));
            }
        }
        if let Some((idx, _)) = worst {
            free.retain(|&i| i != idx);
            continue;
        }
        // release phase: a clamped asset whose reduced gradient exceeds the
        // multiplier would improve the objective if freed
        let sigma_p = params.sigma.mul_vec(&weights);
        let kappa = free
            .iter()
            .map(|&i| params.mu[i] - lambda * sigma_p[i])
            .sum::<f64>()
            / free.len() as f64;
        let mut release: Option<(usize, f64)> = None;
        for i in 0..n {
            if free.contains(&i) {
                continue;
            }
            let gradient = params.mu[i] - lambda * sigma_p[i];
            if gradient > kappa + KKT_TOL && release.is_none_or(|(_, g)| gradient > g) {
                release = Some((i, gradient));
            }
        }
        match release {
            Some((idx, _)) => {
                free.push(idx);
                free.sort_unstable();
            }
            None => {
                let weights: Vec<f64> = weights.iter().map(|w| w.max(0.0)).collect();
                verify_kkt(params, lambda, &weights)?;
                return Ok(weights);
            }
        }
    }
    Err(Error::InfeasibleKkt)
}

fn verify_kkt(params: &ModelParams, lambda: f64, weights: &[f64]) -> Result<()> {
    let n = params.dim();
    let sigma_p = params.sigma.mul_vec(weights);
    let free: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
    if free.is_empty() {
        return Err(Error::InfeasibleKkt);
    }
    let kappa = free
        .iter()
        .map(|&i| params.mu[i] - lambda * sigma_p[i])
        .sum::<f64>()
        / free.len() as f64;
    let scale = 1.0 + kappa.abs();
    for i in 0..n {
        let gradient = params.mu[i] - lambda * sigma_p[i];
        if weights[i] > 0.0 {
            if (gradient - kappa).abs() > KKT_TOL * scale {
                return Err(Error::InfeasibleKkt);
            }
        } else if gradient > kappa + KKT_TOL * scale {
            return Err(Error::InfeasibleKkt);
        }
    }
    Ok(())
}

/// Expected return `p^t mu` and variance `p^t Sigma p` of a weight vector.
pub fn portfolio_stats(weights: &[f64], params: &ModelParams) -> Result<(f64, f64)> {
    let n = params.dim();
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: weights.len() });
    }
    let ret = crate::linalg::dot(weights, &params.mu);
    let sigma_p = params.sigma.mul_vec(weights);
    let var = crate::linalg::dot(weights, &sigma_p);
    Ok((ret, var))
}

/// One frontier point per risk-aversion value, sorted by ascending lambda.
pub fn efficient_frontier(
    params: &ModelParams,
    lambda_grid: &[f64],
    allow_short: bool,
) -> Result<Vec<FrontierPoint>> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidArgument("lambda grid must be nonempty".into()));
    }
    let mut grid = lambda_grid.to_vec();
    for &l in &grid {
        check_lambda(l)?;
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.iter().map(|&lambda| frontier_point(params, lambda, allow_short)).collect()
}

fn frontier_point(params: &ModelParams, lambda: f64, allow_short: bool) -> Result<FrontierPoint> {
    let weights = if allow_short {
        optimal_weights(params, lambda)?
    } else {
        optimal_weights_no_short(params, lambda)?
    };
    let (expected_return, variance) = portfolio_stats(&weights, params)?;
    Ok(FrontierPoint { lambda, weights, expected_return, variance })
}

/// Log-spaced risk-aversion grid, the default the command line uses.
pub fn log_lambda_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    check_lambda(min)?;
    check_lambda(max)?;
    if max <= min || max.is_nan() || min.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "lambda range must satisfy min < max, got [{min}, {max}]"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidArgument("lambda grid needs at least 2 points".into()));
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

const LAMBDA_LO: f64 = 1e-4;
const LAMBDA_HI: f64 = 1e6;
const VARIANCE_REL_TOL: f64 = 1e-6;

/// Finds the frontier portfolio with the requested variance by bisecting on
/// the risk-aversion parameter, for which the variance is monotone.
pub fn portfolio_for_variance(
    params: &ModelParams,
    target_variance: f64,
    allow_short: bool,
) -> Result<FrontierPoint> {
    if !target_variance.is_finite() || target_variance <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "target variance must be positive, got {target_variance}"
        )));
    }
    let rel = |v: f64| (v - target_variance).abs() / target_variance;
    let point_hi = frontier_point(params, LAMBDA_HI, allow_short)?;
    if rel(point_hi.variance) < VARIANCE_REL_TOL {
        return Ok(point_hi);
    }
    if target_variance < point_hi.variance {
        return Err(Error::TargetBelowMinimumVariance {
            target: target_variance,
            minimum: point_hi.variance,
        });
    }
    let point_lo = frontier_point(params, LAMBDA_LO, allow_short)?;
    if rel(point_lo.variance) < VARIANCE_REL_TOL {
        return Ok(point_lo);
    }
    if target_variance > point_lo.variance {
        return Err(Error::BisectionRangeExhausted { target: target_variance });
    }
    let mut lo = LAMBDA_LO.ln();
    let mut hi = LAMBDA_HI.ln();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let point = frontier_point(params, mid.exp(), allow_short)?;
        if rel(point.variance) < VARIANCE_REL_TOL {
            return Ok(point);
        }
        if point.variance > target_variance {
            // variance falls as risk aversion rises
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::BisectionRangeExhausted { target: target_variance })
}
