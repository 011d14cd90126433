//! Estimate location and covariance on contaminated returns, comparing the
//! maximum likelihood fit against robust fits at several tuning parameters.
//!
//! Run with: cargo run --example robust_estimate

use robust_portfolio::estimators::{mle, mpd_estimate, EstimatorConfig};
use robust_portfolio::monte_carlo::{sample_contaminated, SimulationScenario};
use robust_portfolio::pseudodistance::Alpha;

fn main() {
    // 10% of the rows come from a shifted, inflated distribution
    let scenario = SimulationScenario::contamination_defaults(
        3,
        200,
        0.10,
        vec![Alpha::ZERO],
        1,
        20_240_517,
    )
    .expect("valid scenario");
    let sample = sample_contaminated(&scenario, 0).expect("sampling succeeds");

    let classical = mle(&sample).expect("maximum likelihood fit");
    println!("true mean is zero, true variances are one, covariances 0.2\n");
    println!("maximum likelihood (alpha = 0):");
    print_fit(&classical.mu, &classical.sigma);

    for alpha in [0.1, 0.2, 0.5] {
        let config = EstimatorConfig::new(Alpha::new(alpha).unwrap());
        let fit = mpd_estimate(&sample, &config).expect("robust fit");
        println!(
            "\nminimum pseudodistance, alpha = {alpha} ({} iterations, converged = {}):",
            fit.iterations, fit.converged
        );
        print_fit(&fit.mu, &fit.sigma);
        let mut weights: Vec<(usize, f64)> =
            fit.weights.iter().cloned().enumerate().collect();
        weights.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let uniform = 1.0 / sample.n_obs() as f64;
        println!(
            "  five smallest observation weights (relative to uniform): {}",
            weights[..5]
                .iter()
                .map(|(i, w)| format!("#{i}: {:.3}", w / uniform))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
}

fn print_fit(mu: &[f64], sigma: &robust_portfolio::SymMatrix) {
    let mean = mu.iter().map(|v| format!("{v:8.4}")).collect::<Vec<_>>().join(" ");
    println!("  mean     [{mean}]");
    for i in 0..sigma.dim() {
        let row = (0..sigma.dim())
            .map(|j| format!("{:8.4}", sigma.get(i, j)))
            .collect::<Vec<_>>()
            .join(" ");
        let label = if i == 0 { "covar" } else { "     " };
        println!("  {label}    [{row}]");
    }
}
