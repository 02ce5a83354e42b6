//! Bivariate trigonometric polynomials generated by convolution kernels.
//!
//! A [`TrigPoly2`] of degree `d` is
//! `f(ω1, ω2) = Σ_{h1,h2 ∈ [-d, d]} c[h1, h2] · exp(i(h1·ω1 + h2·ω2))`
//! with real coefficients. `h1` indexes the block diagonal of the
//! doubly-block Toeplitz matrix `D(f)` and `h2` the diagonal inside a block:
//! `D(f)[(r1, r2), (c1, c2)] = c[c1 - r1, c2 - r2]`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::kernel::Kernel4;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly2<T> {
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> TrigPoly2<T> {
    /// `coeffs` is `(2d+1)²` long, row-major with `h1` outer, both axes
    /// running from `-d` to `d`.
    pub fn new(degree: usize, coeffs: Vec<T>) -> Result<Self> {
        let side = 2 * degree + 1;
        if coeffs.len() != side * side {
            return Err(Error::DimMismatch(format!(
                "degree {degree} polynomial needs {} coefficients, got {}",
                side * side,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("non-finite polynomial coefficient".into()));
        }
        Ok(Self { degree, coeffs })
    }

    pub fn zeros(degree: usize) -> Self {
        let side = 2 * degree + 1;
        Self {
            degree,
            coeffs: vec![T::zero(); side * side],
        }
    }

    pub fn constant(c: T) -> Self {
        Self {
            degree: 0,
            coeffs: vec![c],
        }
    }

    /// Polynomial with one non-zero coefficient.
    pub fn monomial(degree: usize, h1: isize, h2: isize, c: T) -> Self {
        let mut p = Self::zeros(degree);
        p.set(h1, h2, c);
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    #[inline]
    fn slot(&self, h1: isize, h2: isize) -> Option<usize> {
        let d = self.degree as isize;
        if h1.abs() > d || h2.abs() > d {
            return None;
        }
        let side = 2 * d + 1;
        Some(((h1 + d) * side + (h2 + d)) as usize)
    }

    /// Coefficient at `(h1, h2)`; zero outside the support.
    #[inline]
    pub fn coeff(&self, h1: isize, h2: isize) -> T {
        self.slot(h1, h2).map_or(T::zero(), |i| self.coeffs[i])
    }

    /// Panics if `(h1, h2)` lies outside `[-d, d]²`.
    pub fn set(&mut self, h1: isize, h2: isize, c: T) {
        let i = self
            .slot(h1, h2)
            .unwrap_or_else(|| panic!("offset ({h1}, {h2}) outside degree {}", self.degree));
        self.coeffs[i] = c;
    }

    /// Non-zero coefficients as `(h1, h2, c)`.
    pub fn terms(&self) -> impl Iterator<Item = (isize, isize, T)> + '_ {
        let d = self.degree as isize;
        let side = 2 * self.degree + 1;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(k, &c)| ((k / side) as isize - d, (k % side) as isize - d, c))
    }

    pub fn eval(&self, w1: T, w2: T) -> Complex<T> {
        let d = self.degree as isize;
        let mut acc = Complex::new(T::zero(), T::zero());
        for h1 in -d..=d {
            for h2 in -d..=d {
                let c = self.coeff(h1, h2);
                if c.is_zero() {
                    continue;
                }
                let theta = T::from_f64_lossy(h1 as f64) * w1 + T::from_f64_lossy(h2 as f64) * w2;
                acc += Complex::new(c * theta.cos(), c * theta.sin());
            }
        }
        acc
    }

    /// `|f(ω1, ω2)|²`.
    pub fn modulus_sq(&self, w1: T, w2: T) -> T {
        self.eval(w1, w2).norm_sqr()
    }

    /// The polynomial `f*(ω) = conj(f(ω))`, i.e. coefficients reflected
    /// through the origin.
    pub fn conj(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self {
            degree: self.degree,
            coeffs,
        }
    }

    /// `α·self + β·other`, promoted to the larger degree.
    pub fn lin_comb(&self, alpha: T, other: &Self, beta: T) -> Self {
        let degree = self.degree.max(other.degree);
        let mut out = Self::zeros(degree);
        let d = degree as isize;
        for h1 in -d..=d {
            for h2 in -d..=d {
                out.set(
                    h1,
                    h2,
                    alpha * self.coeff(h1, h2) + beta * other.coeff(h1, h2),
                );
            }
        }
        out
    }

    /// Pointwise product; coefficients are the 2-D convolution of both
    /// coefficient grids, degree is the sum of degrees.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.degree + other.degree);
        for (a1, a2, ca) in self.terms() {
            for (b1, b2, cb) in other.terms() {
                let i = out.slot(a1 + b1, a2 + b2).unwrap();
                out.coeffs[i] += ca * cb;
            }
        }
        out
    }

    pub fn cast<U: Scalar>(&self) -> TrigPoly2<U> {
        TrigPoly2 {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| U::from_f64_lossy(c.to_f64_lossy()))
                .collect(),
        }
    }
}

/// One polynomial per (out-channel, in-channel) pair, all of the same degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyBank<T> {
    cout: usize,
    cin: usize,
    degree: usize,
    polys: Vec<TrigPoly2<T>>,
}

impl<T: Scalar> PolyBank<T> {
    /// `polys` is row-major `[cout][cin]`.
    pub fn new(cout: usize, cin: usize, polys: Vec<TrigPoly2<T>>) -> Result<Self> {
        if cout == 0 || cin == 0 || polys.len() != cout * cin {
            return Err(Error::DimMismatch(format!(
                "{cout}x{cin} bank needs {} polynomials, got {}",
                cout * cin,
                polys.len()
            )));
        }
        let degree = polys[0].degree();
        if polys.iter().any(|p| p.degree() != degree) {
            return Err(Error::Validation("bank polynomials must share one degree".into()));
        }
        Ok(Self {
            cout,
            cin,
            degree,
            polys,
        })
    }

    pub fn cout(&self) -> usize {
        self.cout
    }

    pub fn cin(&self) -> usize {
        self.cin
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, out: usize, inp: usize) -> &TrigPoly2<T> {
        &self.polys[out * self.cin + inp]
    }

    /// The `cin` polynomials feeding output channel `out`.
    pub fn row(&self, out: usize) -> &[TrigPoly2<T>] {
        &self.polys[out * self.cin..(out + 1) * self.cin]
    }
}

/// Generating polynomials of every channel pair of `kernel`.
///
/// The coefficient at `(h1, h2)` is the tap the materialized operator places
/// at block offset `h1` and in-block offset `h2`, which for this crate's
/// convolution layout is `kernel[i][j][d + h1][d - h2]`.
pub fn poly_from_kernel<T: Scalar>(kernel: &Kernel4<T>) -> PolyBank<T> {
    let s = kernel.size();
    let d = kernel.degree() as isize;
    let mut polys = Vec::with_capacity(kernel.cout() * kernel.cin());
    for out in 0..kernel.cout() {
        for inp in 0..kernel.cin() {
            let mut p = TrigPoly2::zeros(kernel.degree());
            for row in 0..s {
                for col in 0..s {
                    let h1 = row as isize - d;
                    let h2 = d - col as isize;
                    p.set(h1, h2, kernel.get(out, inp, row, col));
                }
            }
            polys.push(p);
        }
    }
    PolyBank {
        cout: kernel.cout(),
        cin: kernel.cin(),
        degree: kernel.degree(),
        polys,
    }
}

/// `Σ_j |f_{out,j}(ω1, ω2)|²`.
pub fn channel_power<T: Scalar>(bank: &PolyBank<T>, out: usize, w1: T, w2: T) -> Result<T> {
    if out >= bank.cout {
        return Err(Error::Index {
            index: out,
            len: bank.cout,
        });
    }
    Ok(bank.row(out).iter().map(|p| p.modulus_sq(w1, w2)).sum())
}
