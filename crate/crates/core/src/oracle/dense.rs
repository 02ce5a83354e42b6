//! Dense matrices and exact largest singular values.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Real row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMat<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Validation(format!(
                "matrix dims must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    /// Panics on zero dims, like the other infallible constructors.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dims must be positive");
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// The exchange matrix: ones on the anti-diagonal.
    pub fn anti_identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i + j + 1 == n { T::one() } else { T::zero() })
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// I.i.d. standard normal entries.
    pub fn random(rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(rows, cols, |_, _| {
            T::from_f64_lossy(StandardNormal.sample(&mut rng))
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub(crate) fn add_at(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] += v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::DimMismatch(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// `[A_1, …, A_p]`, all with the same number of rows.
    pub fn hcat(mats: &[Self]) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::Parameter("nothing to concatenate".into()))?;
        if let Some(bad) = mats.iter().find(|m| m.rows != first.rows) {
            return Err(Error::DimMismatch(format!(
                "cannot concatenate {} rows with {} rows",
                first.rows, bad.rows
            )));
        }
        let cols: usize = mats.iter().map(|m| m.cols).sum();
        let mut out = Self::zeros(first.rows, cols);
        for i in 0..first.rows {
            let mut offset = 0;
            for m in mats {
                out.data[i * cols + offset..i * cols + offset + m.cols]
                    .copy_from_slice(&m.data[i * m.cols..(i + 1) * m.cols]);
                offset += m.cols;
            }
        }
        Ok(out)
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|x| x.to_f64_lossy()),
        )
    }
}

/// Largest singular value, computed in f64 as `√λ_max` of the Gram matrix
/// on the smaller side. Relative error is at the level of f64 rounding.
pub fn sigma_max_dense<T: Scalar>(m: &DenseMat<T>) -> Result<T> {
    if m.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    let a = m.to_nalgebra();
    let gram = if a.nrows() <= a.ncols() {
        &a * a.transpose()
    } else {
        a.transpose() * &a
    };
    let top = symmetric_eigenvalues(gram)
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v));
    Ok(T::from_f64_lossy(top.max(0.0).sqrt()))
}

fn symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
}

/// Smallest eigenvalue of the symmetric part `(M + Mᵀ)/2`.
pub fn min_eigenvalue_symmetric<T: Scalar>(m: &DenseMat<T>) -> Result<T> {
    if m.rows != m.cols {
        return Err(Error::DimMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let a = m.to_nalgebra();
    let sym = (&a + a.transpose()) * 0.5;
    let min = symmetric_eigenvalues(sym)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(T::from_f64_lossy(min))
}

/// `σ1([A_1, …, A_p])` and `√(Σ σ1(A_i)²)`; the first never exceeds the
/// second.
pub fn concat_bound_check<T: Scalar>(mats: &[DenseMat<T>]) -> Result<(T, T)> {
    let joined = DenseMat::hcat(mats)?;
    let lhs = sigma_max_dense(&joined)?;
    let mut sq = T::zero();
    for m in mats {
        let s = sigma_max_dense(m)?;
        sq += s * s;
    }
    Ok((lhs, sq.sqrt()))
}

/// Largest eigenvalue of a symmetric positive semi-definite operator by
/// Lanczos with full reorthogonalization.
///
/// Stops once the Ritz residual `β_k·|s_k|` is below `tol·θ`, which bounds
/// the distance from `θ` to an eigenvalue, or when the Krylov space is
/// exhausted.
/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal `a`
/// and off-diagonal `b`, and the magnitude of the last component of its unit
/// eigenvector. Sturm bisection then shifted inverse iteration, both O(k).
fn top_ritz_pair(a: &[f64], b: &[f64]) -> (f64, f64) {
    let k = a.len();
    if k == 1 {
        return (a[0], 1.0);
    }
    let radius = |i: usize| {
        (if i > 0 { b[i - 1].abs() } else { 0.0 }) + (if i + 1 < k { b[i].abs() } else { 0.0 })
    };
    let mut lo = (0..k).map(|i| a[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..k).map(|i| a[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    // number of eigenvalues below x
    let below = |x: f64| {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..k {
            let off = if i > 0 { b[i - 1] * b[i - 1] } else { 0.0 };
            q = a[i] - x - if i > 0 { off / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * scale;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
        if below(mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);

    // Inverse iteration on T - (theta + delta) I with partial pivoting.
    let shift = theta + 64.0 * f64::EPSILON * scale;
    let mut x = vec![1.0; k];
    for _ in 0..3 {
        solve_tridiagonal_shifted(a, b, shift, &mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return (theta, 1.0);
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    (theta, x[k - 1].abs())
}

/// Overwrites `x` with the solution of `(T - shift I) y = x`, using
/// Gaussian elimination with partial pivoting on the banded system.
fn solve_tridiagonal_shifted(a: &[f64], b: &[f64], shift: f64, x: &mut [f64]) {
    let k = a.len();
    // Row i holds (diag, super, super-super) after pivoting.
    let mut d: Vec<f64> = a.iter().map(|v| v - shift).collect();
    let mut u1: Vec<f64> = (0..k).map(|i| if i + 1 < k { b[i] } else { 0.0 }).collect();
    let mut u2 = vec![0.0; k];
    let mut sub: Vec<f64> = b.to_vec();
    let tiny = f64::MIN_POSITIVE.sqrt();
    for i in 0..k - 1 {
        if sub[i].abs() > d[i].abs() {
            // swap rows i and i+1
            let (ri, ri1) = ((d[i], u1[i], u2[i]), (sub[i], d[i + 1], u1[i + 1]));
            d[i] = ri1.0;
            u1[i] = ri1.1;
            u2[i] = ri1.2;
            sub[i] = ri.0;
            d[i + 1] = ri.1;
            u1[i + 1] = ri.2;
            x.swap(i, i + 1);
        }
        if d[i] == 0.0 {
            d[i] = tiny;
        }
        let m = sub[i] / d[i];
        d[i + 1] -= m * u1[i];
        if i + 2 < k {
            u1[i + 1] -= m * u2[i];
        }
        x[i + 1] -= m * x[i];
    }
    if d[k - 1] == 0.0 {
        d[k - 1] = tiny;
    }
    for i in (0..k).rev() {
        let mut v = x[i];
        if i + 1 < k {
            v -= u1[i] * x[i + 1];
        }
        if i + 2 < k {
            v -= u2[i] * x[i + 2];
        }
        x[i] = v / d[i];
    }
}

pub fn lanczos_max_eigenvalue(
    dim: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
    tol: f64,
    seed: u64,
) -> f64 {
    const CHECK_EVERY: usize = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|v| *v /= norm);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut theta = 0.0;

    loop {
        let j = basis.len() - 1;
        apply(&basis[j], &mut w);
        let alpha = dot(&basis[j], &w);
        alphas.push(alpha);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = dot(&w, &w).sqrt();
        let k = alphas.len();
        let exhausted = k == dim || beta <= 1e-14 * alpha.abs().max(f64::MIN_POSITIVE);

        if exhausted || k.is_multiple_of(CHECK_EVERY) {
            let (value, last) = top_ritz_pair(&alphas, &betas);
            theta = value;
            let residual = beta * last;
            if exhausted || residual <= tol * theta.abs() {
                return theta.max(0.0);
            }
        }

        betas.push(beta);
        basis.push(w.iter().map(|v| v / beta).collect());
        if basis.len() > dim {
            return theta.max(0.0);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
