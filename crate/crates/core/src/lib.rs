//! Spectral norm bounds for multi-channel 2-D convolutions.
//!
//! [`lipbound()`] bounds the largest singular value of a stride-1, zero-padded
//! convolution from the moduli of the kernel's generating trigonometric
//! polynomials. The [`oracle`] module materializes the same operators as
//! doubly-block Toeplitz matrices for exact comparisons, and
//! [`comparators`] holds the competing estimators used in benchmarks.
//!
//! All numerical types are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` case.

pub mod comparators;
pub mod error;
pub mod io;
pub mod kernel;
pub mod lipbound;
pub mod oracle;
pub mod scalar;
pub mod suite;
pub mod trigpoly;

pub use error::{Error, Result};
pub use kernel::{random_kernel, Kernel4, KernelDist};
pub use lipbound::{
    certified_factor, lipbound, logsum_lipbound, polygrid_max, BoundReport, GridMax, GridSpec,
    DEFAULT_SAMPLES,
};
pub use scalar::Scalar;
pub use trigpoly::{channel_power, poly_from_kernel, PolyBank, TrigPoly2};

pub type Kernel = Kernel4<f64>;
pub type Kernel32 = Kernel4<f32>;
pub type Poly = TrigPoly2<f64>;
pub type Bank = PolyBank<f64>;
pub type Report = BoundReport<f64>;
pub type Mat = oracle::DenseMat<f64>;
pub type ConvSpec = oracle::ConvOperatorSpec<f64>;
