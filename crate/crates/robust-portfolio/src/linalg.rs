//! Small dense linear algebra for symmetric positive-definite matrices:
//! Cholesky factorization, Mahalanobis distances and the `vecs`/`vech`
//! vectorization conventions used throughout the crate.

use crate::error::{Error, Result};

/// Dense row-major matrix. General rectangular storage; used for factors,
/// Jacobians and covariance blocks where symmetry is not structural.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch { expected: c, actual: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect()
    }

    pub fn scale(&self, c: f64) -> Matrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= c;
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= *b;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Dot product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Symmetric matrix with the lower triangle as authoritative storage.
///
/// Entries are kept packed column by column (`m11, m21, .., mN1, m22, ..`),
/// which is exactly the `vech` ordering. The upper triangle always mirrors
/// the lower one, so symmetry cannot drift across iterative updates.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    lower: Vec<f64>,
}

#[inline]
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    // requires i >= j
    j * n - j * (j + 1) / 2 + i
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, lower: vec![0.0; n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, c);
        }
        m
    }

    /// Builds from a callback evaluated on the lower triangle (`i >= j`).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for j in 0..n {
            for i in j..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from dense rows, reading only the lower triangle.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.lower[packed_index(self.n, i, j)]
        } else {
            self.lower[packed_index(self.n, j, i)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        if i >= j {
            self.lower[packed_index(self.n, i, j)] = v;
        } else {
            self.lower[packed_index(self.n, j, i)] = v;
        }
    }

    /// Packed lower triangle in `vech` order.
    pub fn packed(&self) -> &[f64] {
        &self.lower
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.lower.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        let mut out = self.clone();
        for v in &mut out.lower {
            *v *= c;
        }
        out
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, b) in out.lower.iter_mut().zip(&other.lower) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, b) in out.lower.iter_mut().zip(&other.lower) {
            *a -= *b;
        }
        out
    }

    pub fn add_scaled_identity(&mut self, c: f64) {
        for i in 0..self.n {
            let v = self.get(i, i);
            self.set(i, i, v + c);
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Congruence transform `A * self * A^t` for a square `A`.
    pub fn congruence(&self, a: &Matrix) -> SymMatrix {
        assert_eq!(a.cols(), self.n);
        let dense = self.to_dense();
        let asa = a.mul(&dense).mul(&a.transpose());
        SymMatrix::from_fn(a.rows(), |i, j| asa.get(i, j))
    }

    pub fn all_finite(&self) -> bool {
        self.lower.iter().all(|v| v.is_finite())
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>, // packed lower triangle
}

/// Factors `m = L * L^t`.
///
/// Positive definiteness is decided by pivot positivity: a pivot at or below
/// `n * eps * max_diag` fails with [`Error::NotPositiveDefinite`].
pub fn cholesky(m: &SymMatrix) -> Result<Cholesky> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, actual: 0 });
    }
    let max_diag = (0..n).map(|i| m.get(i, i).abs()).fold(0.0f64, f64::max);
    let threshold = n as f64 * f64::EPSILON * max_diag;
    let mut l = vec![0.0; n * (n + 1) / 2];
    for j in 0..n {
        let mut pivot = m.get(j, j);
        for k in 0..j {
            let v = l[packed_index(n, j, k)];
            pivot -= v * v;
        }
        if !pivot.is_finite() || pivot <= threshold {
            return Err(Error::NotPositiveDefinite);
        }
        let diag = pivot.sqrt();
        l[packed_index(n, j, j)] = diag;
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[packed_index(n, i, k)] * l[packed_index(n, j, k)];
            }
            l[packed_index(n, i, j)] = s / diag;
        }
    }
    Ok(Cholesky { n, l })
}

impl Cholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[packed_index(self.n, i, j)]
    }

    /// The factor `L` as a dense lower-triangular matrix.
    pub fn factor(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for i in j..self.n {
                m.set(i, j, self.at(i, j));
            }
        }
        m
    }

    /// Solves `L y = b` in place.
    pub fn forward_into(&self, b: &[f64], out: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for i in 0..self.n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.at(i, k) * out[k];
            }
            out[i] = s / self.at(i, i);
        }
    }

    /// Solves `L^t x = y` in place, overwriting `y`.
    pub fn backward_in_place(&self, y: &mut [f64]) {
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for k in (i + 1)..self.n {
                s -= self.at(k, i) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
    }

    /// Solves `(L L^t) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.forward_into(b, &mut y);
        self.backward_in_place(&mut y);
        y
    }

    /// `ln det(L L^t)`.
    pub fn log_det(&self) -> f64 {
        (0..self.n).map(|i| self.at(i, i).ln()).sum::<f64>() * 2.0
    }

    /// Inverse of the factored matrix, as a symmetric matrix.
    pub fn inverse(&self) -> SymMatrix {
        let mut inv = SymMatrix::zeros(self.n);
        let mut e = vec![0.0; self.n];
        for j in 0..self.n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in j..self.n {
                inv.set(i, j, col[i]);
            }
        }
        inv
    }

    /// `L * z`, used to map standard normal draws to correlated ones.
    pub fn factor_mul_vec(&self, z: &[f64]) -> Vec<f64> {
        debug_assert_eq!(z.len(), self.n);
        (0..self.n)
            .map(|i| (0..=i).map(|k| self.at(i, k) * z[k]).sum())
            .collect()
    }

    /// Squared Mahalanobis norm `d^t (L L^t)^{-1} d` via a forward solve.
    pub fn quad_form_inv(&self, d: &[f64], scratch: &mut [f64]) -> f64 {
        self.forward_into(d, scratch);
        scratch.iter().map(|v| v * v).sum()
    }
}

/// Squared Mahalanobis distance `(x - mu)^t sigma^{-1} (x - mu)`.
pub fn mahalanobis_sq(x: &[f64], mu: &[f64], sigma: &SymMatrix) -> Result<f64> {
    if x.len() != mu.len() || x.len() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), actual: x.len() });
    }
    let chol = cholesky(sigma)?;
    let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
    let mut scratch = vec![0.0; x.len()];
    Ok(chol.quad_form_inv(&diff, &mut scratch))
}

/// Stacks the non-redundant elements of a symmetric matrix: the diagonal
/// scaled by `1/sqrt(2)` first, then the strict lower triangle column by
/// column. The result has length `n + n(n-1)/2`.
pub fn vecs(m: &SymMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    let inv_sqrt2 = 1.0 / std::f64::consts::SQRT_2;
    for i in 0..n {
        out.push(m.get(i, i) * inv_sqrt2);
    }
    for j in 0..n {
        for i in (j + 1)..n {
            out.push(m.get(i, j));
        }
    }
    out
}

/// Inverse of [`vecs`]: rebuilds the symmetric matrix of dimension `n`.
pub fn unvecs(v: &[f64], n: usize) -> SymMatrix {
    assert_eq!(v.len(), n * (n + 1) / 2, "vecs length mismatch");
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        m.set(i, i, v[i] * std::f64::consts::SQRT_2);
    }
    let mut k = n;
    for j in 0..n {
        for i in (j + 1)..n {
            m.set(i, j, v[k]);
            k += 1;
        }
    }
    m
}

/// The vector half: stacks the columns of the lower triangle, diagonal
/// included, one below the other. Length `n(n+1)/2`.
pub fn vech(m: &SymMatrix) -> Vec<f64> {
    m.packed().to_vec()
}
