//! Shared oracle machinery for the integration suites. Everything here is
//! deliberately independent of the code paths it checks: quadrature instead
//! of closed forms, population fixed points instead of influence formulas,
//! and raw Monte Carlo for sampling distributions.
#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use robust_portfolio::estimators::{mle, mpd_estimate, EstimatorConfig, Sample};
use robust_portfolio::linalg::{cholesky, vecs, Matrix, SymMatrix};
use robust_portfolio::pseudodistance::{Alpha, ModelParams};

/// Gauss-Hermite rule for integrals against `exp(-x^2)`.
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the rule by bisecting the sign changes of the orthonormal
    /// Hermite polynomial; weights come from the Christoffel function.
    pub fn new(order: usize) -> Self {
        let poly = |x: f64| -> f64 { orthonormal_hermite(order, x).0 };
        let bound = (2.0 * order as f64 + 1.0).sqrt() + 1.0;
        let mut positive_roots = Vec::new();
        let step = 0.005;
        let mut prev_x = 0.0;
        let mut prev_v = poly(0.0);
        let mut x = step;
        while x <= bound {
            let v = poly(x);
            if prev_v == 0.0 {
                positive_roots.push(prev_x);
            } else if prev_v.signum() != v.signum() {
                let (mut lo, mut hi) = (prev_x, x);
                for _ in 0..90 {
                    let mid = 0.5 * (lo + hi);
                    if poly(mid).signum() == poly(lo).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                positive_roots.push(0.5 * (lo + hi));
            }
            prev_x = x;
            prev_v = v;
            x += step;
        }
        assert_eq!(
            positive_roots.len(),
            order / 2 + order % 2,
            "missed Hermite roots at order {order}"
        );
        let mut nodes = Vec::with_capacity(order);
        if order % 2 == 1 {
            nodes.push(0.0);
        }
        for r in &positive_roots {
            if *r > 0.0 {
                nodes.push(*r);
                nodes.push(-*r);
            }
        }
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let weights = nodes
            .iter()
            .map(|&x| {
                let (_, sum_sq) = orthonormal_hermite(order, x);
                1.0 / sum_sq
            })
            .collect();
        GaussHermite { nodes, weights }
    }

    /// Expectation of `f` under the one-dimensional standard normal.
    pub fn expect_normal(&self, f: impl Fn(f64) -> f64) -> f64 {
        let scale = 1.0 / std::f64::consts::PI.sqrt();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(std::f64::consts::SQRT_2 * x))
            .sum::<f64>()
            * scale
    }

    /// Expectation of `f(z1, z2)` under the two-dimensional standard normal.
    pub fn expect_normal_2d(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let scale = 1.0 / std::f64::consts::PI;
        let mut acc = 0.0;
        for (&x1, &w1) in self.nodes.iter().zip(&self.weights) {
            let z1 = std::f64::consts::SQRT_2 * x1;
            let mut inner = 0.0;
            for (&x2, &w2) in self.nodes.iter().zip(&self.weights) {
                inner += w2 * f(z1, std::f64::consts::SQRT_2 * x2);
            }
            acc += w1 * inner;
        }
        acc * scale
    }
}

/// Value of the degree-`order` orthonormal Hermite polynomial at `x`, plus
/// the Christoffel sum `sum_{k<order} p_k(x)^2`.
fn orthonormal_hermite(order: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0f64;
    let mut current = 1.0 / std::f64::consts::PI.powf(0.25);
    let mut sum_sq = current * current;
    for k in 0..order {
        let next = (x * current - (k as f64 / 2.0).sqrt() * prev)
            / (((k + 1) as f64) / 2.0).sqrt();
        prev = current;
        current = next;
        if k + 1 < order {
            sum_sq += current * current;
        }
    }
    (current, sum_sq)
}

/// Adaptive Simpson quadrature over a finite interval.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        // a non-finite panel estimate cannot be repaired by splitting;
        // surface it instead of recursing forever
        if depth == 0 || !delta.is_finite() || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 30)
}

/// Solves the population estimating equations under the contaminated
/// measure `(1 - eps) * N(model) + eps * delta_{x0}` by the population
/// analogue of the reweighting pass. All Gaussian moments are closed-form,
/// so the only approximation is the fixed-point tolerance.
pub fn population_contaminated_fit(
    model: &ModelParams,
    x0: &[f64],
    eps: f64,
    alpha: f64,
) -> (Vec<f64>, SymMatrix) {
    let n = model.dim();
    let chol0 = cholesky(&model.sigma).unwrap();
    let prec0 = chol0.inverse(); // Sigma_0^{-1}
    let log_det0 = chol0.log_det();
    let prec0_mu0 = prec0.mul_vec(&model.mu);

    let mut mean = model.mu.clone();
    let mut cov = model.sigma.clone();
    for _ in 0..5000 {
        let chol = cholesky(&cov).unwrap();
        let inv = chol.inverse();
        // combined precision of the model density and the weight kernel
        let combined = SymMatrix::from_fn(n, |i, j| prec0.get(i, j) + alpha * inv.get(i, j));
        let chol_c = cholesky(&combined).unwrap();
        let tilde_cov = chol_c.inverse();
        let mut rhs = prec0_mu0.clone();
        let kernel_mean = inv.mul_vec(&mean);
        for i in 0..n {
            rhs[i] += alpha * kernel_mean[i];
        }
        let tilde_mu = chol_c.solve(&rhs);
        // log of E[w(X)] under the model
        let quad_m = {
            let d: Vec<f64> = mean.to_vec();
            let id = inv.mul_vec(&d);
            alpha * robust_portfolio::linalg::dot(&d, &id)
        };
        let quad_mu0 = robust_portfolio::linalg::dot(&model.mu, &prec0_mu0);
        let combined_tilde = combined.mul_vec(&tilde_mu);
        let quad_tilde = robust_portfolio::linalg::dot(&tilde_mu, &combined_tilde);
        let log_c = 0.5 * (-chol_c.log_det() - log_det0) - 0.5 * (quad_m + quad_mu0 - quad_tilde);
        let c = log_c.exp();

        // point-mass weight
        let diff0: Vec<f64> = x0.iter().zip(&mean).map(|(a, b)| a - b).collect();
        let mut scratch = vec![0.0; n];
        let d0 = chol.quad_form_inv(&diff0, &mut scratch);
        let w0 = (-0.5 * alpha * d0).exp();

        let total = (1.0 - eps) * c + eps * w0;
        let mut new_mean = vec![0.0; n];
        for i in 0..n {
            new_mean[i] = ((1.0 - eps) * c * tilde_mu[i] + eps * w0 * x0[i]) / total;
        }
        let new_cov = SymMatrix::from_fn(n, |i, j| {
            let gauss = tilde_cov.get(i, j)
                + (tilde_mu[i] - new_mean[i]) * (tilde_mu[j] - new_mean[j]);
            let point = (x0[i] - new_mean[i]) * (x0[j] - new_mean[j]);
            (alpha + 1.0) * ((1.0 - eps) * c * gauss + eps * w0 * point) / total
        });
        let delta = new_mean
            .iter()
            .zip(&mean)
            .map(|(a, b)| (a - b).abs())
            .fold(new_cov.sub(&cov).max_abs(), f64::max);
        mean = new_mean;
        cov = new_cov;
        if delta < 1e-13 {
            break;
        }
    }
    (mean, cov)
}

/// Multivariate normal sample with a dedicated generator substream.
pub fn normal_sample(params: &ModelParams, t: usize, seed: u64, stream: u64) -> Sample {
    let n = params.dim();
    let chol = cholesky(&params.sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut data = Vec::with_capacity(t * n);
    let mut z = vec![0.0; n];
    for _ in 0..t {
        for zi in z.iter_mut() {
            *zi = rng.sample::<f64, _>(StandardNormal);
        }
        let x = chol.factor_mul_vec(&z);
        for (xi, mi) in x.iter().zip(&params.mu) {
            data.push(xi + mi);
        }
    }
    Sample::from_flat(t, n, data).unwrap()
}

/// Sampling covariances of the estimator at the model: covariance of
/// `sqrt(T)(mu_hat - mu)`, of `sqrt(T)(vecs Sigma_hat - vecs Sigma)`, and
/// their cross-covariance, over `reps` independent replicates.
pub fn sampling_covariances(
    params: &ModelParams,
    t: usize,
    reps: usize,
    alpha: f64,
    seed: u64,
) -> (Matrix, Matrix, Matrix) {
    let n = params.dim();
    let m = n * (n + 1) / 2;
    let vecs_truth = vecs(&params.sigma);
    let sqrt_t = (t as f64).sqrt();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let sample = normal_sample(params, t, seed, r as u64);
            let fit = if alpha == 0.0 {
                mle(&sample).unwrap()
            } else {
                mpd_estimate(&sample, &EstimatorConfig::new(Alpha::new(alpha).unwrap()))
                    .unwrap()
            };
            let dev_mu: Vec<f64> = fit
                .mu
                .iter()
                .zip(&params.mu)
                .map(|(a, b)| sqrt_t * (a - b))
                .collect();
            let dev_sigma: Vec<f64> = vecs(&fit.sigma)
                .iter()
                .zip(&vecs_truth)
                .map(|(a, b)| sqrt_t * (a - b))
                .collect();
            (dev_mu, dev_sigma)
        })
        .collect();
    let mean_mu = column_means(rows.iter().map(|(a, _)| a.as_slice()), n, reps);
    let mean_sigma = column_means(rows.iter().map(|(_, b)| b.as_slice()), m, reps);
    let mut cov_mu = Matrix::zeros(n, n);
    let mut cov_sigma = Matrix::zeros(m, m);
    let mut cross = Matrix::zeros(n, m);
    for (a, b) in &rows {
        for i in 0..n {
            for j in 0..n {
                let v = cov_mu.get(i, j) + (a[i] - mean_mu[i]) * (a[j] - mean_mu[j]);
                cov_mu.set(i, j, v);
            }
            for j in 0..m {
                let v = cross.get(i, j) + (a[i] - mean_mu[i]) * (b[j] - mean_sigma[j]);
                cross.set(i, j, v);
            }
        }
        for i in 0..m {
            for j in 0..m {
                let v = cov_sigma.get(i, j) + (b[i] - mean_sigma[i]) * (b[j] - mean_sigma[j]);
                cov_sigma.set(i, j, v);
            }
        }
    }
    let denom = (reps - 1) as f64;
    (
        cov_mu.scale(1.0 / denom),
        cov_sigma.scale(1.0 / denom),
        cross.scale(1.0 / denom),
    )
}

fn column_means<'a>(
    rows: impl Iterator<Item = &'a [f64]>,
    width: usize,
    count: usize,
) -> Vec<f64> {
    let mut mean = vec![0.0; width];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= count as f64;
    }
    mean
}

/// Synthetic monthly-return market with a fraction of crash rows, for the
/// frontier and influence-diagnostic suites. Returns the observation rows
/// and the indices of the contaminated ones.
pub fn synthetic_market(
    n: usize,
    t: usize,
    contaminated: usize,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let sigma = SymMatrix::from_fn(n, |i, j| {
        let vol_i = 0.04 + 0.003 * i as f64;
        let vol_j = 0.04 + 0.003 * j as f64;
        if i == j {
            vol_i * vol_i
        } else {
            0.4 * vol_i * vol_j
        }
    });
    let mu: Vec<f64> = (0..n).map(|i| 0.004 + 0.0008 * i as f64).collect();
    let core = ModelParams::new(mu, sigma.clone()).unwrap();
    let crash =
        ModelParams::new(vec![-0.08; n], sigma.scale(4.0)).unwrap();
    let mut rows = Vec::with_capacity(t);
    let core_sample = normal_sample(&core, t - contaminated, seed, 0);
    for row in core_sample.rows() {
        rows.push(row.to_vec());
    }
    let crash_sample = normal_sample(&crash, contaminated.max(1), seed, 1);
    for i in 0..contaminated {
        rows.push(crash_sample.row(i).to_vec());
    }
    // deterministic interleave: spread contaminated rows through the series
    let mut order: Vec<usize> = (0..t).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD1B54A32D192ED03);
    order.shuffle(&mut rng);
    let mut shuffled = vec![Vec::new(); t];
    let mut planted = Vec::new();
    for (from, &to) in order.iter().enumerate() {
        shuffled[to] = rows[from].clone();
        if from >= t - contaminated {
            planted.push(to);
        }
    }
    planted.sort_unstable();
    (shuffled, planted)
}

/// Clean synthetic market with unambiguous crash rows planted at the given
/// indices: the crashes sit many core standard deviations out, with a tight
/// spread, so they are the influential observations by construction.
pub fn planted_market(n: usize, t: usize, indices: &[usize], seed: u64) -> Vec<Vec<f64>> {
    let sigma = SymMatrix::from_fn(n, |i, j| {
        let vol_i = 0.04 + 0.003 * i as f64;
        let vol_j = 0.04 + 0.003 * j as f64;
        if i == j {
            vol_i * vol_i
        } else {
            0.4 * vol_i * vol_j
        }
    });
    let mu: Vec<f64> = (0..n).map(|i| 0.004 + 0.0008 * i as f64).collect();
    let core = ModelParams::new(mu, sigma.clone()).unwrap();
    // a parallel market-wide drop moves along the high-variance common
    // direction and barely changes relative weights; the planted crashes are
    // therefore differential across assets, which is both what historical
    // crisis months look like and what makes them influential observations
    let crash_center: Vec<f64> =
        (0..n).map(|i| -0.30 + 0.03 * i as f64 * 8.0 / n as f64).collect();
    let crash = ModelParams::new(crash_center, sigma.scale(0.1)).unwrap();
    let base = normal_sample(&core, t, seed, 0);
    let crashes = normal_sample(&crash, indices.len(), seed, 1);
    let mut rows: Vec<Vec<f64>> = base.rows().map(|r| r.to_vec()).collect();
    for (k, &idx) in indices.iter().enumerate() {
        rows[idx] = crashes.row(k).to_vec();
    }
    rows
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn frobenius_rel_error(estimate: &Matrix, reference: &Matrix) -> f64 {
    estimate.sub(reference).frobenius_norm() / reference.frobenius_norm()
}
