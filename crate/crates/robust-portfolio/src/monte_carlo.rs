//! Contaminated-normal sampling and the Monte Carlo contamination study:
//! repeated estimation over mixture samples with mean-square-error
//! accounting per tuning parameter.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{mle, mpd_estimate, EstimatorConfig, Sample};
use crate::linalg::{cholesky, vech, Cholesky, SymMatrix};
use crate::pseudodistance::{Alpha, ModelParams};

/// Configuration of one contamination study.
#[derive(Debug, Clone)]
pub struct SimulationScenario {
    pub n: usize,
    pub t: usize,
    /// Contamination fraction in `[0, 1)`.
    pub eps: f64,
    pub core: ModelParams,
    pub contaminant: ModelParams,
    pub alphas: Vec<Alpha>,
    /// Replicates per cell.
    pub n_s: usize,
    pub seed: u64,
}

impl SimulationScenario {
    pub fn new(
        core: ModelParams,
        contaminant: ModelParams,
        t: usize,
        eps: f64,
        alphas: Vec<Alpha>,
        n_s: usize,
        seed: u64,
    ) -> Result<Self> {
        let n = core.dim();
        if contaminant.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: contaminant.dim() });
        }
        if !(0.0..1.0).contains(&eps) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "contamination fraction must lie in [0, 1), got {eps}"
            )));
        }
        if n_s == 0 {
            return Err(Error::InvalidArgument("replicate count must be at least 1".into()));
        }
        if t < n + 1 {
            return Err(Error::TooFewRows { required: n + 1, actual: t });
        }
        if alphas.is_empty() {
            return Err(Error::InvalidArgument("at least one alpha is required".into()));
        }
        Ok(Self { n, t, eps, core, contaminant, alphas, n_s, seed })
    }

    /// Standard study setup: a core with unit variances and all covariances
    /// equal to 0.2, a contaminant shifted to -4 with four times the spread.
    pub fn contamination_defaults(
        n: usize,
        t: usize,
        eps: f64,
        alphas: Vec<Alpha>,
        n_s: usize,
        seed: u64,
    ) -> Result<Self> {
        let sigma0 = SymMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { 0.2 });
        let core = ModelParams::new(vec![0.0; n], sigma0.clone())?;
        let contaminant = ModelParams::new(vec![-4.0; n], sigma0.scale(4.0))?;
        Self::new(core, contaminant, t, eps, alphas, n_s, seed)
    }

    /// Exact contaminated row count: `round(eps * t)`.
    pub fn contaminated_rows(&self) -> usize {
        (self.eps * self.t as f64).round() as usize
    }
}

fn draw_normal(rng: &mut ChaCha8Rng, mu: &[f64], chol: &Cholesky) -> Vec<f64> {
    let z: Vec<f64> = (0..mu.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut x = chol.factor_mul_vec(&z);
    for (xi, mi) in x.iter_mut().zip(mu) {
        *xi += mi;
    }
    x
}

/// Draws one replicate: `round(eps t)` contaminant rows and the remainder
/// from the core, shuffled. Fully determined by `(scenario.seed,
/// replicate_index)` through a dedicated generator substream.
pub fn sample_contaminated(scenario: &SimulationScenario, replicate_index: usize) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(replicate_index as u64);
    let chol_core = cholesky(&scenario.core.sigma)?;
    let chol_cont = cholesky(&scenario.contaminant.sigma)?;
    let contaminated = scenario.contaminated_rows();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(scenario.t);
    for _ in 0..scenario.t - contaminated {
        rows.push(draw_normal(&mut rng, &scenario.core.mu, &chol_core));
    }
    for _ in 0..contaminated {
        rows.push(draw_normal(&mut rng, &scenario.contaminant.mu, &chol_cont));
    }
    rows.shuffle(&mut rng);
    Sample::from_rows(&rows)
}

/// Mean squared Euclidean distance between stacked `(mu, vech Sigma)`
/// estimates and the stacked truth.
pub fn mse_hat(estimates: &[(Vec<f64>, SymMatrix)], truth: &ModelParams) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
    }
    let mut acc = 0.0;
    for (mu, sigma) in estimates {
        acc += squared_distance(mu, sigma, truth)?;
    }
    Ok(acc / estimates.len() as f64)
}

fn squared_distance(mu: &[f64], sigma: &SymMatrix, truth: &ModelParams) -> Result<f64> {
    let n = truth.dim();
    if mu.len() != n || sigma.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: mu.len() });
    }
    let mut acc = 0.0;
    for (a, b) in mu.iter().zip(&truth.mu) {
        acc += (a - b) * (a - b);
    }
    for (a, b) in vech(sigma).iter().zip(vech(&truth.sigma)) {
        acc += (a - b) * (a - b);
    }
    Ok(acc)
}

/// One `(n, t, eps, alpha)` cell of the study output.
#[derive(Debug, Clone, PartialEq)]
pub struct MseCell {
    pub n: usize,
    pub t: usize,
    pub eps: f64,
    pub alpha: f64,
    pub mse: f64,
    /// Replicates that errored or hit the iteration cap. Errored replicates
    /// are excluded from the mean; capped ones are included but counted.
    pub failures: usize,
}

/// Study output, one cell per tuning parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MseTable {
    pub cells: Vec<MseCell>,
}

impl MseTable {
    pub fn cell(&self, alpha: f64) -> Option<&MseCell> {
        self.cells.iter().find(|c| (c.alpha - alpha).abs() < 1e-12)
    }
}

/// Runs the full study: for every replicate one shared sample, estimated at
/// each tuning parameter (maximum likelihood at zero), accumulated into
/// per-cell mean squared errors.
///
/// Replicates run in parallel over deterministic substreams and are reduced
/// in replicate order, so the result depends only on the scenario and the
/// estimator settings.
pub fn run_study(scenario: &SimulationScenario, template: &EstimatorConfig) -> Result<MseTable> {
    let outcomes: Vec<Vec<Option<(f64, bool)>>> = (0..scenario.n_s)
        .into_par_iter()
        .map(|replicate| -> Result<Vec<Option<(f64, bool)>>> {
            let sample = sample_contaminated(scenario, replicate)?;
            let mut row = Vec::with_capacity(scenario.alphas.len());
            for &alpha in &scenario.alphas {
                let fit = if alpha.is_zero() {
                    mle(&sample)
                } else {
                    let config = EstimatorConfig {
                        alpha,
                        tol: template.tol,
                        max_iter: template.max_iter,
                        init: template.init.clone(),
                    };
                    mpd_estimate(&sample, &config)
                };
                row.push(match fit {
                    Ok(est) => Some((
                        squared_distance(&est.mu, &est.sigma, &scenario.core)?,
                        est.converged,
                    )),
                    Err(_) => None,
                });
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let cells = scenario
        .alphas
        .iter()
        .enumerate()
        .map(|(j, &alpha)| {
            let mut sum = 0.0;
            let mut used = 0usize;
            let mut failures = 0usize;
            for row in &outcomes {
                match row[j] {
                    Some((sq, converged)) => {
                        sum += sq;
                        used += 1;
                        if !converged {
                            failures += 1;
                        }
                    }
                    None => failures += 1,
                }
            }
            MseCell {
                n: scenario.n,
                t: scenario.t,
                eps: scenario.eps,
                alpha: alpha.value(),
                mse: if used > 0 { sum / used as f64 } else { f64::NAN },
                failures,
            }
        })
        .collect();
    Ok(MseTable { cells })
}
