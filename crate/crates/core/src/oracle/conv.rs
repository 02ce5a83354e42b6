//! Stride-1 zero-padded multi-channel convolution: direct application, its
//! adjoint, the materialized operator matrix and the matrix-free power
//! method.
//!
//! Output pixel `(r, c)` of channel `o` is
//! `Σ_{i,a,b} k[o][i][a][b] · x[i][r + a - p][c + (s - 1 - b) - p]`,
//! out-of-range input pixels being zero. Kernel rows slide as a
//! correlation and kernel columns as a convolution; this is the layout of
//! the tridiagonal doubly-block Toeplitz matrix for a 3×3 kernel with
//! padding 1, where block offset `+1` carries kernel row 2 and in-block
//! offset `+1` carries kernel column 0.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::dense::{lanczos_max_eigenvalue, sigma_max_dense, DenseMat};
use crate::error::{Error, Result};
use crate::kernel::Kernel4;
use crate::scalar::Scalar;

/// Largest operator the oracle will materialize, in matrix entries.
pub const MATERIALIZE_LIMIT: usize = 1 << 26;

/// Above this Gram dimension [`sigma_max_exact`] switches from the dense
/// eigensolver to Lanczos.
pub const DENSE_GRAM_LIMIT: usize = 256;

/// Relative tolerance of the Lanczos path of [`sigma_max_exact`], on σ².
pub const LANCZOS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvOperatorSpec<T> {
    kernel: Kernel4<T>,
    n: usize,
    padding: usize,
}

impl<T: Scalar> ConvOperatorSpec<T> {
    /// "Same" convolution of an `n × n` input, padding `⌊s/2⌋`.
    pub fn new(kernel: Kernel4<T>, n: usize) -> Result<Self> {
        let p = kernel.degree();
        Self::with_padding(kernel, n, p)
    }

    pub fn with_padding(kernel: Kernel4<T>, n: usize, padding: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("input size n must be >= 1".into()));
        }
        if n + 2 * padding < kernel.size() {
            return Err(Error::Parameter(format!(
                "input {n}x{n} with padding {padding} is smaller than the {}x{} kernel",
                kernel.size(),
                kernel.size()
            )));
        }
        Ok(Self { kernel, n, padding })
    }

    pub fn kernel(&self) -> &Kernel4<T> {
        &self.kernel
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    /// Output side `n - s + 2p + 1`.
    pub fn out_size(&self) -> usize {
        self.n + 2 * self.padding + 1 - self.kernel.size()
    }

    pub fn input_len(&self) -> usize {
        self.kernel.cin() * self.n * self.n
    }

    pub fn output_len(&self) -> usize {
        let q = self.out_size();
        self.kernel.cout() * q * q
    }

    /// Calls `f(out, inp, w, dr, dc)` for every non-zero tap, where output
    /// pixel `(r, c)` reads input pixel `(r + dr, c + dc)`.
    fn for_each_tap(&self, mut f: impl FnMut(usize, usize, T, isize, isize)) {
        let k = &self.kernel;
        let s = k.size() as isize;
        let p = self.padding as isize;
        for out in 0..k.cout() {
            for inp in 0..k.cin() {
                for a in 0..k.size() {
                    for b in 0..k.size() {
                        let w = k.get(out, inp, a, b);
                        if !w.is_zero() {
                            f(out, inp, w, a as isize - p, s - 1 - b as isize - p);
                        }
                    }
                }
            }
        }
    }

    /// Output rows `r` (or columns) with `r + shift` a valid input index.
    #[inline]
    fn valid_range(&self, shift: isize) -> std::ops::Range<usize> {
        let q = self.out_size() as isize;
        let n = self.n as isize;
        let lo = (-shift).max(0);
        let hi = q.min(n - shift).max(lo);
        lo as usize..hi as usize
    }
}

/// Applies the convolution to `x` (`cin × n × n`, row-major); returns
/// `cout × q × q`.
pub fn conv_apply<T: Scalar>(spec: &ConvOperatorSpec<T>, x: &[T]) -> Result<Vec<T>> {
    if x.len() != spec.input_len() {
        return Err(Error::DimMismatch(format!(
            "input has {} values, operator expects cin·n² = {}",
            x.len(),
            spec.input_len()
        )));
    }
    let (n, q) = (spec.n, spec.out_size());
    let mut y = vec![T::zero(); spec.output_len()];
    spec.for_each_tap(|out, inp, w, dr, dc| {
        let cols = spec.valid_range(dc);
        for r in spec.valid_range(dr) {
            let src = inp * n * n + (r as isize + dr) as usize * n;
            let dst = out * q * q + r * q;
            for c in cols.clone() {
                y[dst + c] += w * x[src + (c as isize + dc) as usize];
            }
        }
    });
    Ok(y)
}

/// Transpose of [`conv_apply`]: maps `cout × q × q` back to `cin × n × n`.
pub fn adjoint_apply<T: Scalar>(spec: &ConvOperatorSpec<T>, y: &[T]) -> Result<Vec<T>> {
    if y.len() != spec.output_len() {
        return Err(Error::DimMismatch(format!(
            "adjoint input has {} values, operator expects cout·q² = {}",
            y.len(),
            spec.output_len()
        )));
    }
    let (n, q) = (spec.n, spec.out_size());
    let mut x = vec![T::zero(); spec.input_len()];
    spec.for_each_tap(|out, inp, w, dr, dc| {
        let cols = spec.valid_range(dc);
        for r in spec.valid_range(dr) {
            let dst = inp * n * n + (r as isize + dr) as usize * n;
            let src = out * q * q + r * q;
            for c in cols.clone() {
                x[dst + (c as isize + dc) as usize] += w * y[src + c];
            }
        }
    });
    Ok(x)
}

/// The `cout·q² × cin·n²` operator matrix. Block `(o, i)` is the
/// doubly-block Toeplitz matrix of the `(o, i)` kernel slice.
pub fn materialize<T: Scalar>(spec: &ConvOperatorSpec<T>) -> Result<DenseMat<T>> {
    let (rows, cols) = (spec.output_len(), spec.input_len());
    let entries = rows.saturating_mul(cols);
    if entries > MATERIALIZE_LIMIT {
        return Err(Error::TooLarge {
            entries,
            limit: MATERIALIZE_LIMIT,
        });
    }
    let (n, q) = (spec.n, spec.out_size());
    let mut m = DenseMat::zeros(rows, cols);
    spec.for_each_tap(|out, inp, w, dr, dc| {
        let cols_range = spec.valid_range(dc);
        for r in spec.valid_range(dr) {
            for c in cols_range.clone() {
                let row = out * q * q + r * q + c;
                let col = inp * n * n + (r as isize + dr) as usize * n + (c as isize + dc) as usize;
                m.add_at(row, col, w);
            }
        }
    });
    Ok(m)
}

fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Every estimate produced by the convolutional power method, one per
/// iteration.
///
/// Each step normalizes `x`, records `‖A x‖` and replaces `x` by `Aᵀ A x`.
/// The recorded values are Rayleigh quotients of `AᵀA` and never decrease.
pub fn power_method_trace<T: Scalar>(
    spec: &ConvOperatorSpec<T>,
    iters: usize,
    tol: T,
    seed: u64,
) -> Result<Vec<T>> {
    if iters == 0 {
        return Err(Error::Parameter("power method needs at least one iteration".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<T> = (0..spec.input_len())
        .map(|_| T::from_f64_lossy(StandardNormal.sample(&mut rng)))
        .collect();
    let mut trace = Vec::with_capacity(iters);
    for _ in 0..iters {
        let nx = norm(&x);
        if nx.is_zero() {
            trace.push(T::zero());
            break;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let u = conv_apply(spec, &x)?;
        let sigma = norm(&u);
        let prev = trace.last().copied();
        trace.push(sigma);
        if sigma.is_zero() {
            break;
        }
        if let Some(prev) = prev {
            if (sigma - prev).abs() < tol * sigma {
                break;
            }
        }
        x = adjoint_apply(spec, &u)?;
    }
    Ok(trace)
}

/// `(σ estimate, iterations used)`; a zero kernel gives `(0, 1)`.
pub fn power_method_conv<T: Scalar>(
    spec: &ConvOperatorSpec<T>,
    iters: usize,
    tol: T,
    seed: u64,
) -> Result<(T, usize)> {
    let trace = power_method_trace(spec, iters, tol, seed)?;
    Ok((*trace.last().unwrap(), trace.len()))
}

/// Exact largest singular value of the operator: dense eigensolve of the
/// smaller Gram matrix when it has at most [`DENSE_GRAM_LIMIT`] rows,
/// matrix-free Lanczos (tolerance [`LANCZOS_TOL`]) otherwise.
pub fn sigma_max_exact<T: Scalar>(spec: &ConvOperatorSpec<T>) -> Result<T> {
    let gram_dim = spec.input_len().min(spec.output_len());
    if gram_dim <= DENSE_GRAM_LIMIT {
        if let Ok(m) = materialize(spec) {
            return sigma_max_dense(&m);
        }
    }
    sigma_max_lanczos(spec, LANCZOS_TOL).map(T::from_f64_lossy)
}

/// Matrix-free largest singular value in f64 via Lanczos on the smaller of
/// `AᵀA` and `AAᵀ`.
pub fn sigma_max_lanczos<T: Scalar>(spec: &ConvOperatorSpec<T>, tol: f64) -> Result<f64> {
    if spec.kernel.is_zero() {
        return Ok(0.0);
    }
    let spec64 = ConvOperatorSpec {
        kernel: spec.kernel.cast::<f64>(),
        n: spec.n,
        padding: spec.padding,
    };
    let lam = if spec64.input_len() <= spec64.output_len() {
        lanczos_max_eigenvalue(
            spec64.input_len(),
            |x, out| {
                let y = conv_apply(&spec64, x).expect("shape checked");
                out.copy_from_slice(&adjoint_apply(&spec64, &y).expect("shape checked"));
            },
            tol,
            0x5eed,
        )
    } else {
        lanczos_max_eigenvalue(
            spec64.output_len(),
            |y, out| {
                let x = adjoint_apply(&spec64, y).expect("shape checked");
                out.copy_from_slice(&conv_apply(&spec64, &x).expect("shape checked"));
            },
            tol,
            0x5eed,
        )
    };
    Ok(lam.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{random_kernel, KernelDist};

    fn spec(k: Kernel4<f64>, n: usize) -> ConvOperatorSpec<f64> {
        ConvOperatorSpec::new(k, n).unwrap()
    }

    #[test]
    fn identity_kernel_is_identity() {
        let s = spec(Kernel4::identity(3).unwrap(), 5);
        let x: Vec<f64> = (0..25).map(|v| v as f64).collect();
        assert_eq!(conv_apply(&s, &x).unwrap(), x);
        assert_eq!(adjoint_apply(&s, &x).unwrap(), x);
        let m = materialize(&s).unwrap();
        assert_eq!(m, DenseMat::identity(25));
    }

    #[test]
    fn zero_kernel_outputs_zero() {
        let s = spec(Kernel4::zeros(2, 3, 3).unwrap(), 4);
        let x = vec![1.0; s.input_len()];
        assert!(conv_apply(&s, &x).unwrap().iter().all(|v| *v == 0.0));
        let y = vec![1.0; s.output_len()];
        assert!(adjoint_apply(&s, &y).unwrap().iter().all(|v| *v == 0.0));
        assert_eq!(power_method_conv(&s, 10, 1e-9, 0).unwrap(), (0.0, 1));
    }

    #[test]
    fn all_ones_counts_overlap() {
        let s = spec(Kernel4::new(1, 1, 3, vec![1.0; 9]).unwrap(), 4);
        let y = conv_apply(&s, &[1.0; 16]).unwrap();
        #[rustfmt::skip]
        let expected = [
            4.0, 6.0, 6.0, 4.0,
            6.0, 9.0, 9.0, 6.0,
            6.0, 9.0, 9.0, 6.0,
            4.0, 6.0, 6.0, 4.0,
        ];
        assert_eq!(y, expected);
    }

    #[test]
    fn shape_errors() {
        let s = spec(Kernel4::zeros(2, 3, 3).unwrap(), 4);
        assert!(matches!(conv_apply(&s, &[0.0; 5]), Err(Error::DimMismatch(_))));
        assert!(matches!(adjoint_apply(&s, &[0.0; 5]), Err(Error::DimMismatch(_))));
        assert!(ConvOperatorSpec::new(Kernel4::<f64>::zeros(1, 1, 5).unwrap(), 0).is_err());
        assert!(ConvOperatorSpec::with_padding(Kernel4::<f64>::zeros(1, 1, 5).unwrap(), 2, 0).is_err());
    }

    #[test]
    fn materialize_guard() {
        let k = Kernel4::<f64>::zeros(8, 8, 3).unwrap();
        let s = spec(k, 64);
        assert!(matches!(materialize(&s), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn valid_padding_shrinks_output() {
        let k = random_kernel::<f64>(5, 2, 1, 3, KernelDist::default()).unwrap();
        let s = ConvOperatorSpec::with_padding(k, 6, 0).unwrap();
        assert_eq!(s.out_size(), 4);
        let x: Vec<f64> = (0..36).map(|v| (v as f64 * 0.37).sin()).collect();
        let direct = conv_apply(&s, &x).unwrap();
        let via_matrix = materialize(&s).unwrap().matvec(&x).unwrap();
        let err = direct
            .iter()
            .zip(&via_matrix)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn identity_power_method_converges_immediately() {
        let s = spec(Kernel4::identity(3).unwrap(), 8);
        let (sigma, used) = power_method_conv(&s, 50, 1e-12, 4).unwrap();
        assert!((sigma - 1.0).abs() < 1e-14);
        assert!(used <= 2);
    }

    #[test]
    fn exact_paths_agree() {
        let k = random_kernel::<f64>(2, 2, 3, 3, KernelDist::default()).unwrap();
        let s = spec(k, 7);
        let dense = sigma_max_dense(&materialize(&s).unwrap()).unwrap();
        let lanczos = sigma_max_lanczos(&s, 1e-13).unwrap();
        assert!((dense - lanczos).abs() < 1e-10 * dense, "{dense} vs {lanczos}");
    }
}
