//! Profile the influence functions along a ray: bounded and redescending
//! for positive tuning parameters, unbounded at zero.
//!
//! Run with: cargo run --example influence_curves

use robust_portfolio::influence::{if_covariance, if_location, if_weights, InfluenceContext};
use robust_portfolio::linalg::SymMatrix;
use robust_portfolio::pseudodistance::{Alpha, ModelParams};

fn main() {
    let params = ModelParams::new(
        vec![0.0, 0.0],
        SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 1.0]]).unwrap(),
    )
    .unwrap();
    let alphas = [0.0, 0.1, 0.5];
    println!("norms of the influence functions at x = (r, -r/2), lambda = 2\n");
    print!("{:>6}", "r");
    for a in alphas {
        print!(" {:>12} {:>12} {:>12}", format!("loc a={a}"), format!("cov a={a}"), format!("wts a={a}"));
    }
    println!();
    for k in 0..=12 {
        let r = k as f64;
        print!("{r:>6.1}");
        for a in alphas {
            let ctx = InfluenceContext::new(params.clone(), Alpha::new(a).unwrap(), 2.0)
                .expect("valid context");
            let x = [r, -0.5 * r];
            let loc = if_location(&x, &ctx).unwrap();
            let loc_norm = loc.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cov_norm = if_covariance(&x, &ctx).unwrap().max_abs();
            let wts = if_weights(&x, &ctx).unwrap();
            let wts_norm = wts.iter().map(|v| v * v).sum::<f64>().sqrt();
            print!(" {loc_norm:>12.4} {cov_norm:>12.4} {wts_norm:>12.4}");
        }
        println!();
    }
    println!("\nwith a positive tuning parameter every curve peaks and redescends;");
    println!("at zero they grow without bound (linearly, quadratically, quadratically)");
}
