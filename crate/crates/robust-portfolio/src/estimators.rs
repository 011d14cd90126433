//! Maximum likelihood and minimum pseudodistance estimation of the mean
//! vector and covariance matrix via iterative reweighting.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, vech, SymMatrix};
use crate::pseudodistance::{objective, Alpha, ModelParams};

/// Observation matrix: `t` rows of `n` asset returns each.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    t: usize,
    n: usize,
    data: Vec<f64>, // row-major
}

impl Sample {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let t = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if t == 0 || n == 0 {
            return Err(Error::TooFewRows { required: 1, actual: 0 });
        }
        let mut data = Vec::with_capacity(t * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { line: i + 1, column: j + 1 });
                }
                data.push(*v);
            }
        }
        Ok(Self { t, n, data })
    }

    /// Takes ownership of a row-major buffer of length `t * n`.
    pub fn from_flat(t: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if t == 0 || n == 0 || data.len() != t * n {
            return Err(Error::DimensionMismatch { expected: t * n, actual: data.len() });
        }
        for (k, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { line: k / n + 1, column: k % n + 1 });
            }
        }
        Ok(Self { t, n, data })
    }

    pub fn n_obs(&self) -> usize {
        self.t
    }

    pub fn n_assets(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.t).map(move |i| self.row(i))
    }
}

/// How the reweighting iteration is initialized.
#[derive(Debug, Clone)]
pub enum Init {
    /// Maximum likelihood estimates, the standard starting point.
    Mle,
    /// Caller-supplied starting parameters, for heavily contaminated data
    /// where the likelihood start may sit in a poor basin.
    Explicit(ModelParams),
}

/// Estimation settings for [`mpd_estimate`].
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub alpha: Alpha,
    /// Scale-free convergence threshold on parameter changes.
    pub tol: f64,
    /// Iteration cap for the reweighting loop.
    pub max_iter: usize,
    pub init: Init,
}

impl EstimatorConfig {
    pub fn new(alpha: Alpha) -> Self {
        Self { alpha, tol: 1e-8, max_iter: 500, init: Init::Mle }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// A converged (or capped) estimate together with its observation weights.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub mu: Vec<f64>,
    pub sigma: SymMatrix,
    /// Self-normalized observation weights at the returned parameters; they
    /// sum to one.
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub objective_value: f64,
}

impl Estimate {
    pub fn params(&self) -> ModelParams {
        ModelParams { mu: self.mu.clone(), sigma: self.sigma.clone() }
    }
}

/// Maximum likelihood estimates: sample mean and `1/T`-normalized scatter.
pub fn mle(sample: &Sample) -> Result<Estimate> {
    let t = sample.n_obs();
    let n = sample.n_assets();
    if t < 2 {
        return Err(Error::SingularScatter);
    }
    let tf = t as f64;
    let mut mu = vec![0.0; n];
    for row in sample.rows() {
        for (m, v) in mu.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mu {
        *m /= tf;
    }
    let mut sigma = SymMatrix::zeros(n);
    for row in sample.rows() {
        for k in 0..n {
            let dk = row[k] - mu[k];
            for l in 0..=k {
                let v = sigma.get(k, l) + dk * (row[l] - mu[l]);
                sigma.set(k, l, v);
            }
        }
    }
    sigma = sigma.scale(1.0 / tf);
    if cholesky(&sigma).is_err() {
        return Err(Error::SingularScatter);
    }
    let theta = ModelParams { mu: mu.clone(), sigma: sigma.clone() };
    let objective_value = objective(sample, &theta, Alpha::ZERO)?;
    Ok(Estimate {
        mu,
        sigma,
        weights: vec![1.0 / tf; t],
        iterations: 0,
        converged: true,
        objective_value,
    })
}

/// Self-normalized exponential observation weights at `theta`.
///
/// The largest weight is computed with the smallest Mahalanobis distance
/// subtracted, so normalization cannot underflow. At `alpha = 0` every
/// observation receives `1/T`.
pub fn observation_weights(sample: &Sample, theta: &ModelParams, alpha: Alpha) -> Result<Vec<f64>> {
    let t = sample.n_obs();
    let n = theta.dim();
    if sample.n_assets() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: sample.n_assets() });
    }
    if alpha.is_zero() {
        return Ok(vec![1.0 / t as f64; t]);
    }
    let chol = cholesky(&theta.sigma)?;
    let a = alpha.value();
    let mut dist = vec![0.0; t];
    let mut diff = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut min_d = f64::INFINITY;
    for i in 0..t {
        for (d, (x, m)) in diff.iter_mut().zip(sample.row(i).iter().zip(&theta.mu)) {
            *d = x - m;
        }
        let d = chol.quad_form_inv(&diff, &mut scratch);
        dist[i] = d;
        min_d = min_d.min(d);
    }
    let mut weights = vec![0.0; t];
    let mut total = 0.0;
    for (w, d) in weights.iter_mut().zip(&dist) {
        *w = (-0.5 * a * (d - min_d)).exp();
        total += *w;
    }
    if total <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// One pass of the reweighting iteration: weights are computed from the
/// input parameters, the new mean feeds directly into the new scatter, and
/// the scatter is inflated by `alpha + 1`.
pub fn reweight_step(sample: &Sample, theta: &ModelParams, alpha: Alpha) -> Result<ModelParams> {
    let weights = observation_weights(sample, theta, alpha)?;
    weighted_update(sample, &weights, alpha)
}

fn weighted_update(sample: &Sample, weights: &[f64], alpha: Alpha) -> Result<ModelParams> {
    let n = sample.n_assets();
    let mut mu = vec![0.0; n];
    for (i, row) in sample.rows().enumerate() {
        let w = weights[i];
        for (m, v) in mu.iter_mut().zip(row) {
            *m += w * v;
        }
    }
    let factor = alpha.value() + 1.0;
    let mut sigma = SymMatrix::zeros(n);
    for (i, row) in sample.rows().enumerate() {
        let wf = factor * weights[i];
        for k in 0..n {
            let dk = row[k] - mu[k];
            for l in 0..=k {
                let v = sigma.get(k, l) + wf * dk * (row[l] - mu[l]);
                sigma.set(k, l, v);
            }
        }
    }
    if cholesky(&sigma).is_err() {
        // one jitter pass survives benign rounding; real degeneracy still fails
        sigma.add_scaled_identity(1e-12 * sigma.trace() / n as f64);
        if cholesky(&sigma).is_err() {
            return Err(Error::SingularScatter);
        }
    }
    ModelParams::new(mu, sigma)
}

/// Minimum pseudodistance estimation by iterative reweighting.
///
/// Starting from the configured initialization, [`reweight_step`] is applied
/// until the maximum scale-free parameter change drops below `config.tol`
/// and the estimating-equation residual at the returned parameters is below
/// `config.tol` in max-norm, or `config.max_iter` passes have run. Failure
/// to converge is reported through the `converged` flag, not as an error.
pub fn mpd_estimate(sample: &Sample, config: &EstimatorConfig) -> Result<Estimate> {
    config.validate()?;
    if sample.n_obs() < 2 {
        return Err(Error::TooFewRows { required: 2, actual: sample.n_obs() });
    }
    if config.alpha.is_zero() {
        // the objective branch at zero is the likelihood; its maximizer is
        // the MLE no matter where the iteration starts
        return mle(sample);
    }
    let mut theta = match &config.init {
        Init::Mle => mle(sample)?.params(),
        Init::Explicit(params) => {
            if params.dim() != sample.n_assets() {
                return Err(Error::DimensionMismatch {
                    expected: sample.n_assets(),
                    actual: params.dim(),
                });
            }
            params.clone()
        }
    };
    let alpha = config.alpha;
    let factor = alpha.value() + 1.0;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=config.max_iter {
        let next = reweight_step(sample, &theta, alpha)?;
        // Residual of the estimating equations at `theta`: the mean part is
        // the step change; the scatter part needs recentering from the new
        // mean back to the old one.
        let mut resid_max = 0.0f64;
        let mut delta_max = 0.0f64;
        for (new, old) in next.mu.iter().zip(&theta.mu) {
            resid_max = resid_max.max((new - old).abs());
            delta_max = delta_max.max((new - old).abs() / (1.0 + new.abs()));
        }
        let n = theta.dim();
        for k in 0..n {
            let dk = next.mu[k] - theta.mu[k];
            for l in 0..=k {
                let recenter = factor * dk * (next.mu[l] - theta.mu[l]);
                let r = next.sigma.get(k, l) + recenter - theta.sigma.get(k, l);
                resid_max = resid_max.max(r.abs());
                let d = next.sigma.get(k, l) - theta.sigma.get(k, l);
                delta_max = delta_max.max(d.abs() / (1.0 + next.sigma.get(k, l).abs()));
            }
        }
        if resid_max < config.tol && delta_max < config.tol {
            converged = true;
            iterations = iter - 1;
            break;
        }
        theta = next;
        iterations = iter;
    }
    let weights = observation_weights(sample, &theta, alpha)?;
    let objective_value = objective(sample, &theta, alpha)?;
    Ok(Estimate {
        mu: theta.mu,
        sigma: theta.sigma,
        weights,
        iterations,
        converged,
        objective_value,
    })
}

/// Scale-free distance between two parameter sets, the same metric the
/// convergence test uses. Handy for equivariance checks.
pub fn param_distance(a: &ModelParams, b: &ModelParams) -> f64 {
    let mut d = 0.0f64;
    for (x, y) in a.mu.iter().zip(&b.mu) {
        d = d.max((x - y).abs() / (1.0 + x.abs()));
    }
    for (x, y) in vech(&a.sigma).iter().zip(vech(&b.sigma)) {
        d = d.max((x - y).abs() / (1.0 + x.abs()));
    }
    d
}
