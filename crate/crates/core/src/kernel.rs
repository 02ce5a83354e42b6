//! The 4-D convolution kernel `cout × cin × s × s` and deterministic random
//! kernel generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Real convolution kernel stored row-major: out-channel outermost, then
/// in-channel, then kernel row, then kernel column.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel4<T> {
    cout: usize,
    cin: usize,
    s: usize,
    data: Vec<T>,
}

impl<T: Scalar> Kernel4<T> {
    /// Validates dims, odd spatial size and finiteness.
    pub fn new(cout: usize, cin: usize, s: usize, data: Vec<T>) -> Result<Self> {
        if cout == 0 || cin == 0 || s == 0 {
            return Err(Error::Validation(format!(
                "kernel dims must be positive, got {cout}x{cin}x{s}x{s}"
            )));
        }
        if s.is_multiple_of(2) {
            return Err(Error::UnsupportedShape(format!(
                "even kernel size s = {s}; only odd sizes are supported"
            )));
        }
        let expected = cout * cin * s * s;
        if data.len() != expected {
            return Err(Error::DimMismatch(format!(
                "data has {} entries but {cout}x{cin}x{s}x{s} needs {expected}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Validation(format!(
                "kernel entry {pos} is not finite"
            )));
        }
        Ok(Self { cout, cin, s, data })
    }

    pub fn zeros(cout: usize, cin: usize, s: usize) -> Result<Self> {
        Self::new(cout, cin, s, vec![T::zero(); cout * cin * s * s])
    }

    /// Single-channel kernel with a 1 at the center tap.
    pub fn identity(s: usize) -> Result<Self> {
        let mut k = Self::zeros(1, 1, s)?;
        let d = s / 2;
        k.data[d * s + d] = T::one();
        Ok(k)
    }

    pub fn cout(&self) -> usize {
        self.cout
    }

    pub fn cin(&self) -> usize {
        self.cin
    }

    /// Spatial side length.
    pub fn size(&self) -> usize {
        self.s
    }

    /// Degree of the generating trigonometric polynomials, `⌊s/2⌋`.
    pub fn degree(&self) -> usize {
        self.s / 2
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn index(&self, out: usize, inp: usize, row: usize, col: usize) -> usize {
        ((out * self.cin + inp) * self.s + row) * self.s + col
    }

    #[inline]
    pub fn get(&self, out: usize, inp: usize, row: usize, col: usize) -> T {
        self.data[self.index(out, inp, row, col)]
    }

    /// The `s × s` slice for one (out, in) channel pair.
    pub fn slice(&self, out: usize, inp: usize) -> &[T] {
        let start = self.index(out, inp, 0, 0);
        &self.data[start..start + self.s * self.s]
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            data: self.data.iter().map(|&x| x * c).collect(),
            ..self.clone()
        }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn cast<U: Scalar>(&self) -> Kernel4<U> {
        Kernel4 {
            cout: self.cout,
            cin: self.cin,
            s: self.s,
            data: self
                .data
                .iter()
                .map(|x| U::from_f64_lossy(x.to_f64_lossy()))
                .collect(),
        }
    }

    /// Shape as `"{cout}x{cin}x{s}"`, the same shorthand the CLI accepts.
    pub fn shape_label(&self) -> String {
        format!("{}x{}x{}", self.cout, self.cin, self.s)
    }
}

/// Entry distribution for [`random_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelDist {
    Gaussian { sigma: f64 },
    Uniform { low: f64, high: f64 },
}

impl Default for KernelDist {
    fn default() -> Self {
        KernelDist::Gaussian { sigma: 1.0 }
    }
}

/// I.i.d. kernel entries from `dist`, fully determined by `(seed, dims, dist)`.
///
/// Entries are drawn in f64 from a ChaCha8 stream and then converted, so an
/// f32 kernel is the rounding of the f64 kernel with the same seed.
pub fn random_kernel<T: Scalar>(
    seed: u64,
    cout: usize,
    cin: usize,
    s: usize,
    dist: KernelDist,
) -> Result<Kernel4<T>> {
    if s.is_multiple_of(2) {
        return Err(Error::UnsupportedShape(format!(
            "even kernel size s = {s}; only odd sizes are supported"
        )));
    }
    let len = cout * cin * s * s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = match dist {
        KernelDist::Gaussian { sigma } => {
            let normal = Normal::new(0.0, sigma)
                .map_err(|e| Error::Parameter(format!("gaussian sigma {sigma}: {e}")))?;
            (0..len).map(|_| normal.sample(&mut rng)).collect()
        }
        KernelDist::Uniform { low, high } => {
            let uniform = Uniform::new(low, high)
                .map_err(|e| Error::Parameter(format!("uniform [{low}, {high}): {e}")))?;
            (0..len).map(|_| uniform.sample(&mut rng)).collect()
        }
    };
    Kernel4::new(
        cout,
        cin,
        s,
        data.into_iter().map(T::from_f64_lossy).collect(),
    )
}
