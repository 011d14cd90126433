//! Analytic asymptotic covariance matrices of the estimators, the
//! M-estimation weight functions they correspond to, asymptotic relative
//! efficiency, and the Delta-method covariance of the portfolio weights.

use crate::error::{Error, Result};
use crate::linalg::{unvecs, vecs, Matrix, SymMatrix};
use crate::portfolio::optimal_weights;
use crate::pseudodistance::{Alpha, ModelParams};

/// The four radial weight functions of the estimating equations, evaluated
/// at one argument.
#[derive(Debug, Clone, Copy)]
pub struct WeightFunctions {
    pub w_mu: f64,
    pub w_eta: f64,
    pub w_delta: f64,
    pub w_tau: f64,
}

/// Evaluates the M-estimation weight functions at radius `t` in dimension `n`.
pub fn weight_funcs(t: f64, alpha: Alpha, n: usize) -> WeightFunctions {
    let a = alpha.value();
    let envelope = (-0.5 * a * t * t).exp();
    let base = (a + 1.0).sqrt();
    let low = base.powi(n as i32 + 2) * envelope;
    let high = base.powi(n as i32 + 4) * envelope;
    WeightFunctions {
        w_mu: low,
        w_eta: high,
        w_delta: low,
        w_tau: high * (t * t - n as f64 / (a + 1.0)),
    }
}

/// Scalar factor of the location estimator's asymptotic covariance.
pub fn d_mu(alpha: Alpha, n: usize) -> f64 {
    let a = alpha.value();
    ((a + 1.0) / (2.0 * a + 1.0).sqrt()).powi(n as i32 + 2)
}

/// Isotropic part of the covariance estimator's asymptotic covariance at
/// the standard normal.
pub fn d_eta(alpha: Alpha, n: usize) -> f64 {
    let a = alpha.value();
    ((a + 1.0) / (2.0 * a + 1.0).sqrt()).powi(n as i32 + 4)
}

/// Coefficient along the replicated-diagonal direction.
pub fn d_tau(alpha: Alpha, n: usize) -> f64 {
    let a = alpha.value();
    let nf = n as f64;
    nf * a * a * (a + 1.0).powi(n as i32 + 2) / (2.0 * (2.0 * a + 1.0).sqrt().powi(n as i32 + 4))
        + d_eta(alpha, n)
}

/// Asymptotic covariance matrix of the location estimator under the normal
/// model with covariance `sigma`: the closed-form scalar times `sigma`.
pub fn v_location(alpha: Alpha, sigma: &SymMatrix) -> SymMatrix {
    sigma.scale(d_mu(alpha, sigma.dim()))
}

fn indicator_w(n: usize) -> Vec<f64> {
    let m = n * (n + 1) / 2;
    let mut w = vec![0.0; m];
    for slot in w.iter_mut().take(n) {
        *slot = 1.0;
    }
    w
}

/// Asymptotic covariance of the vectorized covariance estimator at the
/// standard normal, on `vecs` coordinates.
pub fn v_covariance_p0(alpha: Alpha, n: usize) -> Matrix {
    let a = alpha.value();
    let m = n * (n + 1) / 2;
    let iso = d_eta(alpha, n);
    let rank_one =
        a * a * (a + 1.0).powi(n as i32 + 2) / (2.0 * (2.0 * a + 1.0).sqrt().powi(n as i32 + 4));
    let w = indicator_w(n);
    let mut v = Matrix::zeros(m, m);
    for i in 0..m {
        v.set(i, i, iso);
        for j in 0..m {
            let val = v.get(i, j) + rank_one * w[i] * w[j];
            v.set(i, j, val);
        }
    }
    v
}

/// Symmetric positive-semidefinite square root via a Jacobi eigensolve.
fn sym_sqrt(sigma: &SymMatrix) -> Result<SymMatrix> {
    let n = sigma.dim();
    let (values, vectors) = jacobi_eigen(sigma);
    let floor = -1e-10 * values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut root = SymMatrix::zeros(n);
    for (k, lam) in values.iter().enumerate() {
        if *lam < floor {
            return Err(Error::NotPositiveDefinite);
        }
        let s = lam.max(0.0).sqrt();
        for i in 0..n {
            for j in 0..=i {
                let val = root.get(i, j) + s * vectors.get(i, k) * vectors.get(j, k);
                root.set(i, j, val);
            }
        }
    }
    Ok(root)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns the
/// eigenvalues and the matrix whose columns are the eigenvectors.
fn jacobi_eigen(m: &SymMatrix) -> (Vec<f64>, Matrix) {
    let n = m.dim();
    let mut a = m.to_dense();
    let mut v = Matrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a.get(i, j).abs());
            }
        }
        if off < 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    ((0..n).map(|i| a.get(i, i)).collect(), v)
}

/// The operator that carries `vecs` coordinates through the congruence
/// `M -> Sigma^{1/2} M Sigma^{1/2}`, built column by column on the `vecs`
/// basis. It maps `vecs(I)` to `vecs(Sigma)`.
pub fn transport_operator(sigma: &SymMatrix) -> Result<Matrix> {
    let n = sigma.dim();
    let m = n * (n + 1) / 2;
    let root = sym_sqrt(sigma)?.to_dense();
    let mut k = Matrix::zeros(m, m);
    let mut basis = vec![0.0; m];
    for col in 0..m {
        basis.iter_mut().for_each(|v| *v = 0.0);
        basis[col] = 1.0;
        let unit = unvecs(&basis, n).to_dense();
        let mapped = root.mul(&unit).mul(&root);
        let image = vecs(&SymMatrix::from_fn(n, |i, j| mapped.get(i, j)));
        for row in 0..m {
            k.set(row, col, image[row]);
        }
    }
    Ok(k)
}

/// Asymptotic covariance of the vectorized covariance estimator under the
/// normal model with covariance `sigma`, transported from the standard
/// normal by the congruence operator.
pub fn v_covariance(alpha: Alpha, sigma: &SymMatrix) -> Result<Matrix> {
    let k = transport_operator(sigma)?;
    let v0 = v_covariance_p0(alpha, sigma.dim());
    Ok(k.mul(&v0).mul(&k.transpose()))
}

/// Asymptotic relative efficiency of the joint estimator against maximum
/// likelihood: one at zero, strictly below one for positive `alpha`.
pub fn are(alpha: Alpha, n: usize) -> f64 {
    let a = alpha.value();
    let nf = n as f64;
    let base = (a + 1.0) / (2.0 * a + 1.0).sqrt();
    let exponent = (nf * nf + 7.0 * nf + 8.0) / (nf + 3.0);
    let tail = 1.0 + nf * a * a / (2.0 * (a + 1.0) * (a + 1.0));
    1.0 / (base.powf(exponent) * tail.powf(2.0 / (nf * (nf + 3.0))))
}

/// Efficiency table over a grid of tuning parameters and dimensions.
#[derive(Debug, Clone)]
pub struct AreTable {
    pub alphas: Vec<f64>,
    pub n_values: Vec<usize>,
    /// `values[i][j]` is the efficiency at `n_values[i]`, `alphas[j]`.
    pub values: Vec<Vec<f64>>,
}

pub fn are_table(alphas: &[f64], n_max: usize) -> Result<AreTable> {
    if alphas.is_empty() || n_max == 0 {
        return Err(Error::InvalidArgument("efficiency table needs alphas and n_max >= 1".into()));
    }
    let mut parsed = Vec::with_capacity(alphas.len());
    for &a in alphas {
        parsed.push(Alpha::new(a)?);
    }
    let n_values: Vec<usize> = (1..=n_max).collect();
    let values = n_values
        .iter()
        .map(|&n| parsed.iter().map(|&a| are(a, n)).collect())
        .collect();
    Ok(AreTable { alphas: alphas.to_vec(), n_values, values })
}

/// Summary of the asymptotic behavior at one `(alpha, sigma)` pair.
#[derive(Debug, Clone)]
pub struct AsymptoticReport {
    pub v_mu: SymMatrix,
    pub v_sigma: Matrix,
    pub are: f64,
    pub d_mu: f64,
    pub d_eta: f64,
    pub d_tau: f64,
}

impl AsymptoticReport {
    pub fn compute(alpha: Alpha, sigma: &SymMatrix) -> Result<Self> {
        let n = sigma.dim();
        Ok(Self {
            v_mu: v_location(alpha, sigma),
            v_sigma: v_covariance(alpha, sigma)?,
            are: are(alpha, n),
            d_mu: d_mu(alpha, n),
            d_eta: d_eta(alpha, n),
            d_tau: d_tau(alpha, n),
        })
    }
}

/// Delta-method asymptotic covariance of the optimal portfolio weights.
///
/// The Jacobian of the weight map over `(mu, vecs Sigma)` coordinates is
/// taken by central finite differences with a coordinate-scaled step; the
/// parameter covariance is block diagonal by asymptotic independence of the
/// location and covariance estimators.
pub fn v_weights(params: &ModelParams, lambda: f64, alpha: Alpha) -> Result<Matrix> {
    let n = params.dim();
    let m = n * (n + 1) / 2;
    let dim = n + m;
    let v_mu = v_location(alpha, &params.sigma);
    let v_sigma = v_covariance(alpha, &params.sigma)?;
    let mut block = Matrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            block.set(i, j, v_mu.get(i, j));
        }
    }
    for i in 0..m {
        for j in 0..m {
            block.set(n + i, n + j, v_sigma.get(i, j));
        }
    }

    let weights_at = |coords: &[f64]| -> Result<Vec<f64>> {
        let mu = coords[..n].to_vec();
        let sigma = unvecs(&coords[n..], n);
        optimal_weights(&ModelParams::new(mu, sigma)?, lambda)
    };
    let mut coords = Vec::with_capacity(dim);
    coords.extend_from_slice(&params.mu);
    coords.extend(vecs(&params.sigma));

    let mut jacobian = Matrix::zeros(n, dim);
    for j in 0..dim {
        let h = 1e-6 * (1.0 + coords[j].abs());
        let mut plus = coords.clone();
        plus[j] += h;
        let mut minus = coords.clone();
        minus[j] -= h;
        let wp = weights_at(&plus)?;
        let wm = weights_at(&minus)?;
        for i in 0..n {
            jacobian.set(i, j, (wp[i] - wm[i]) / (2.0 * h));
        }
    }
    let product = jacobian.mul(&block).mul(&jacobian.transpose());
    // symmetrize away finite-difference asymmetry
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, 0.5 * (product.get(i, j) + product.get(j, i)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cholesky;
    use approx::assert_relative_eq;

    fn alpha(a: f64) -> Alpha {
        Alpha::new(a).unwrap()
    }

    #[test]
    fn weight_funcs_reduce_to_mle() {
        for t in [0.0, 0.7, 2.5, 10.0] {
            let w = weight_funcs(t, Alpha::ZERO, 3);
            assert_eq!(w.w_mu, 1.0);
            assert_eq!(w.w_eta, 1.0);
            assert_eq!(w.w_delta, 1.0);
        }
    }

    #[test]
    fn w_tau_root_sits_at_bracket_zero() {
        for (n, a) in [(2usize, 0.2), (5, 0.5), (1, 1.0)] {
            let t = (n as f64 / (a + 1.0)).sqrt();
            let w = weight_funcs(t, alpha(a), n);
            assert!(w.w_tau.abs() < 1e-14);
        }
    }

    #[test]
    fn v_location_identity_at_zero_alpha() {
        let sigma = SymMatrix::from_rows(&[vec![1.3, 0.4], vec![0.4, 0.9]]).unwrap();
        let v = v_location(Alpha::ZERO, &sigma);
        assert!(v.sub(&sigma).max_abs() < 1e-15);
    }

    #[test]
    fn v_location_frozen_factor() {
        // N=2, alpha=0.2: d_mu confirmed by Gauss-Hermite quadrature
        let sigma = SymMatrix::identity(2);
        let v = v_location(alpha(0.2), &sigma);
        assert_relative_eq!(v.get(0, 0), 1.0579591836734694, max_relative = 1e-12);
        assert_relative_eq!(v.get(1, 1), 1.0579591836734694, max_relative = 1e-12);
        assert_eq!(v.get(0, 1), 0.0);
    }

    #[test]
    fn v_location_scales_linearly() {
        let sigma = SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 1.0]]).unwrap();
        let a = alpha(0.3);
        let base = v_location(a, &sigma);
        let scaled = v_location(a, &sigma.scale(3.0));
        assert!(scaled.sub(&base.scale(3.0)).max_abs() < 1e-14);
    }

    #[test]
    fn v_covariance_p0_identity_at_zero_alpha() {
        let v = v_covariance_p0(Alpha::ZERO, 2);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(v.get(i, j), expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn v_covariance_p0_determinant_closed_form() {
        for (n, a) in [(2usize, 0.2), (3, 0.5), (5, 0.1)] {
            let v = v_covariance_p0(alpha(a), n);
            let m = n * (n + 1) / 2;
            let sym = SymMatrix::from_fn(m, |i, j| v.get(i, j));
            let det = cholesky(&sym).unwrap().log_det().exp();
            let nf = n as f64;
            let expect = ((a + 1.0) / (2.0 * a + 1.0).sqrt())
                .powf(nf * (nf + 1.0) * (nf + 4.0) / 2.0)
                * (1.0 + nf * a * a / (2.0 * (a + 1.0) * (a + 1.0)));
            assert_relative_eq!(det, expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn transport_is_identity_for_standard_normal() {
        let k = transport_operator(&SymMatrix::identity(3)).unwrap();
        assert!(k.sub(&Matrix::identity(6)).max_abs() < 1e-12);
        let v = v_covariance(alpha(0.3), &SymMatrix::identity(3)).unwrap();
        let v0 = v_covariance_p0(alpha(0.3), 3);
        assert!(v.sub(&v0).max_abs() < 1e-12);
    }

    #[test]
    fn transport_maps_identity_to_sigma() {
        let sigma =
            SymMatrix::from_rows(&[vec![1.5, 0.3], vec![0.3, 0.8]]).unwrap();
        let k = transport_operator(&sigma).unwrap();
        let image = k.mul_vec(&vecs(&SymMatrix::identity(2)));
        let expect = vecs(&sigma);
        for (a, b) in image.iter().zip(&expect) {
            assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn are_golden_values() {
        assert_eq!(are(Alpha::ZERO, 4), 1.0);
        assert!((are(alpha(0.5), 1) - 0.76904).abs() < 2e-4);
        assert!((are(alpha(1.0), 10) - 0.13779).abs() < 2e-4);
        assert!((are(alpha(0.2), 2) - 0.92429).abs() < 2e-4);
    }

    #[test]
    fn are_decreases_in_alpha_and_dimension() {
        let grid = [0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0];
        for n in 1..=10usize {
            let mut prev = are(Alpha::ZERO, n);
            for &a in &grid {
                let current = are(alpha(a), n);
                assert!(current < prev, "n={n}, alpha={a}");
                prev = current;
            }
        }
        for &a in &grid {
            for n in 2..=10usize {
                assert!(are(alpha(a), n) < are(alpha(a), n - 1), "n={n}, alpha={a}");
            }
        }
    }

    #[test]
    fn are_consistent_with_constructed_determinants() {
        let sigma = SymMatrix::from_rows(&[vec![1.2, 0.3], vec![0.3, 0.7]]).unwrap();
        let n = 2usize;
        let a = alpha(0.2);
        let log_det_v = |al: Alpha| -> f64 {
            let vm = v_location(al, &sigma);
            let vs = v_covariance(al, &sigma).unwrap();
            let m = n * (n + 1) / 2;
            let vs_sym = SymMatrix::from_fn(m, |i, j| 0.5 * (vs.get(i, j) + vs.get(j, i)));
            cholesky(&vm).unwrap().log_det() + cholesky(&vs_sym).unwrap().log_det()
        };
        let ratio = (log_det_v(Alpha::ZERO) - log_det_v(a))
            * (2.0 / (n as f64 * (n as f64 + 3.0)));
        assert_relative_eq!(ratio.exp(), are(a, n), max_relative = 1e-10);
    }

    #[test]
    fn are_table_matches_pointwise() {
        let table = are_table(&[0.0, 0.2, 0.5], 4).unwrap();
        assert_eq!(table.n_values, vec![1, 2, 3, 4]);
        for (i, &n) in table.n_values.iter().enumerate() {
            for (j, &a) in table.alphas.iter().enumerate() {
                assert_eq!(table.values[i][j], are(alpha(a), n));
            }
        }
    }

    #[test]
    fn v_weights_is_symmetric_psd_with_zero_sums() {
        let sigma = SymMatrix::from_rows(&[
            vec![1.0, 0.2, 0.1],
            vec![0.2, 1.3, -0.2],
            vec![0.1, -0.2, 0.8],
        ])
        .unwrap();
        let params = ModelParams::new(vec![0.08, 0.03, 0.05], sigma).unwrap();
        let v = v_weights(&params, 2.0, alpha(0.2)).unwrap();
        let n = 3;
        for i in 0..n {
            for j in 0..n {
                assert_relative_eq!(v.get(i, j), v.get(j, i), epsilon = 1e-12);
            }
            let row_sum: f64 = (0..n).map(|j| v.get(i, j)).sum();
            assert!(row_sum.abs() < 5e-6, "row {i} sums to {row_sum}");
        }
        // quadratic form nonnegative on a few directions
        let probes = [
            vec![1.0, -1.0, 0.0],
            vec![0.3, 0.3, -0.6],
            vec![1.0, 2.0, -3.0],
        ];
        for z in probes {
            let vz = v.mul_vec(&z);
            assert!(crate::linalg::dot(&z, &vz) >= -1e-10);
        }
    }

    #[test]
    fn report_collects_consistent_pieces() {
        let sigma = SymMatrix::from_rows(&[vec![1.1, 0.3], vec![0.3, 0.9]]).unwrap();
        let report = AsymptoticReport::compute(alpha(0.2), &sigma).unwrap();
        assert!(report.are > 0.0 && report.are < 1.0);
        assert_eq!(report.are, are(alpha(0.2), 2));
        assert_eq!(report.d_mu, d_mu(alpha(0.2), 2));
        assert!(report.d_tau > report.d_eta);
        assert!(report.v_mu.sub(&v_location(alpha(0.2), &sigma)).max_abs() == 0.0);
        assert_eq!(report.v_sigma.rows(), 3);
        let at_zero = AsymptoticReport::compute(Alpha::ZERO, &sigma).unwrap();
        assert_eq!(at_zero.are, 1.0);
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let sigma = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let (mut values, _) = jacobi_eigen(&sigma);
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(values[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(values[1], 3.0, max_relative = 1e-12);
        let root = sym_sqrt(&sigma).unwrap();
        let square = root.to_dense().mul(&root.to_dense());
        assert!(square.sub(&sigma.to_dense()).max_abs() < 1e-12);
    }
}
