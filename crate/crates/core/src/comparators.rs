//! Competing estimators of a convolution's spectral norm: the circulant
//! (FFT) approximation and reshaped-kernel norm bounds.

use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Kernel4;
use crate::oracle::{sigma_max_dense, DenseMat};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparatorMethod {
    Sedghi,
    Frobenius,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparatorResult<T> {
    pub method: ComparatorMethod,
    pub value: T,
    /// Input size, for the size-dependent circulant method only.
    pub n: Option<usize>,
    /// Milliseconds.
    pub wall_time: f64,
}

/// Largest singular value of the circulant approximation on `n × n` inputs.
///
/// Every `s × s` slice is zero-padded to `n × n` and transformed with a 2-D
/// DFT; the result is the maximum over the `n²` frequencies of σ1 of the
/// `cout × cin` matrix of transformed values. This is the exact norm of the
/// periodic (wrap-around) convolution, not a bound on the zero-padded one.
pub fn sedghi_estimate<T: Scalar>(kernel: &Kernel4<T>, n: usize) -> Result<ComparatorResult<T>> {
    let start = Instant::now();
    let s = kernel.size();
    if n < s {
        return Err(Error::Parameter(format!(
            "circulant approximation needs n >= s, got n = {n}, s = {s}"
        )));
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let (cout, cin) = (kernel.cout(), kernel.cin());

    // spectra[(o * cin + i) * n² + freq]
    let mut spectra = Vec::with_capacity(cout * cin * n * n);
    for out in 0..cout {
        for inp in 0..cin {
            let mut buf = vec![Complex::new(0.0, 0.0); n * n];
            for (idx, w) in kernel.slice(out, inp).iter().enumerate() {
                buf[(idx / s) * n + idx % s] = Complex::new(w.to_f64_lossy(), 0.0);
            }
            fft2_in_place(&mut buf, n, fft.as_ref());
            spectra.extend(buf);
        }
    }

    let nn = n * n;
    let mut best = 0.0f64;
    for freq in 0..nn {
        let sigma = if cout == 1 && cin == 1 {
            spectra[freq].norm()
        } else {
            let p = DMatrix::from_fn(cout, cin, |o, i| spectra[(o * cin + i) * nn + freq]);
            p.singular_values().iter().fold(0.0, |m: f64, v| m.max(*v))
        };
        best = best.max(sigma);
    }
    Ok(ComparatorResult {
        method: ComparatorMethod::Sedghi,
        value: T::from_f64_lossy(best),
        n: Some(n),
        wall_time: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn fft2_in_place(buf: &mut [Complex<f64>], n: usize, fft: &dyn Fft<f64>) {
    for row in buf.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = buf[r * n + c];
        }
        fft.process(&mut col);
        for r in 0..n {
            buf[r * n + c] = col[r];
        }
    }
}

/// Formula used by [`frobenius_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrobeniusVariant {
    /// `‖k‖_F` of the whole tensor. Not an upper bound in general.
    Plain,
    /// `s · σ1` of the `cout × (cin·s·s)` reshape.
    FlatSpectral,
    /// `s · min σ1` over the four reshapes `cout × (cin·s²)`,
    /// `cin × (cout·s²)`, `(s·cout) × (s·cin)` split by kernel row, and the
    /// same split by kernel column. Each is an upper bound.
    ReshapeMin,
}

impl FromStr for FrobeniusVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Self::Plain),
            "flat_spectral" => Ok(Self::FlatSpectral),
            "reshape_min" => Ok(Self::ReshapeMin),
            other => Err(Error::Parameter(format!("unknown frobenius variant `{other}`"))),
        }
    }
}

/// Frozen calibration of the reshaped-kernel comparator.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FrobeniusCalibration {
    pub variant: FrobeniusVariant,
    pub protocol: String,
    /// Mean ratio to the exact norm per variant, from the calibration run.
    pub mean_ratio: std::collections::BTreeMap<String, f64>,
}

const CALIBRATION_JSON: &str = include_str!("../calibration/frobenius.json");

pub fn frobenius_calibration() -> &'static FrobeniusCalibration {
    static CAL: OnceLock<FrobeniusCalibration> = OnceLock::new();
    CAL.get_or_init(|| {
        serde_json::from_str(CALIBRATION_JSON).expect("calibration/frobenius.json is valid")
    })
}

impl Default for FrobeniusVariant {
    fn default() -> Self {
        frobenius_calibration().variant
    }
}

/// Reshaped-kernel estimate with the calibrated default variant.
pub fn frobenius_estimate<T: Scalar>(kernel: &Kernel4<T>) -> Result<ComparatorResult<T>> {
    frobenius_estimate_with(kernel, FrobeniusVariant::default())
}

pub fn frobenius_estimate_with<T: Scalar>(
    kernel: &Kernel4<T>,
    variant: FrobeniusVariant,
) -> Result<ComparatorResult<T>> {
    let start = Instant::now();
    let s = T::of_usize(kernel.size());
    let value = match variant {
        FrobeniusVariant::Plain => kernel.frobenius_norm(),
        FrobeniusVariant::FlatSpectral => s * sigma_max_dense(&reshape(kernel, Reshape::OutFlat))?,
        FrobeniusVariant::ReshapeMin => {
            let mut best = T::infinity();
            for r in [Reshape::OutFlat, Reshape::InFlat, Reshape::ByRow, Reshape::ByCol] {
                best = best.min(sigma_max_dense(&reshape(kernel, r))?);
            }
            s * best
        }
    };
    Ok(ComparatorResult {
        method: ComparatorMethod::Frobenius,
        value,
        n: None,
        wall_time: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Clone, Copy)]
enum Reshape {
    OutFlat,
    InFlat,
    ByRow,
    ByCol,
}

fn reshape<T: Scalar>(k: &Kernel4<T>, how: Reshape) -> DenseMat<T> {
    let (cout, cin, s) = (k.cout(), k.cin(), k.size());
    match how {
        Reshape::OutFlat => DenseMat::from_fn(cout, cin * s * s, |o, j| {
            k.get(o, j / (s * s), (j / s) % s, j % s)
        }),
        Reshape::InFlat => DenseMat::from_fn(cin, cout * s * s, |i, j| {
            k.get(j / (s * s), i, (j / s) % s, j % s)
        }),
        Reshape::ByRow => DenseMat::from_fn(s * cout, s * cin, |r, c| {
            k.get(r % cout, c % cin, r / cout, c / cin)
        }),
        Reshape::ByCol => DenseMat::from_fn(s * cout, s * cin, |r, c| {
            k.get(r % cout, c % cin, c / cin, r / cout)
        }),
    }
}
