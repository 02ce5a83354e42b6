//! Grid maximization of trigonometric polynomials and the LipBound
//! aggregation `√(Σ_out sup_ω Σ_in |f_{out,in}(ω)|²)`.
//!
//! The grid visits `ω = 2πk/S` for `k = 1..=S` on each axis, ω1 outer. The
//! last point `k = S` is `2π ≡ 0`, so this is the equidistant set
//! `{2πk/S : k = 0..S-1}` in a different order, and a grid of `m·S` points
//! contains every point of the `S` grid.

use std::time::Instant;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::Kernel4;
use crate::scalar::{pairwise_sum, Scalar};
use crate::trigpoly::{poly_from_kernel, PolyBank, TrigPoly2};

pub const DEFAULT_SAMPLES: usize = 10;

/// Number of samples per axis and whether to apply the `(1 - 2d/S)⁻¹`
/// certification factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub samples: usize,
    pub certified: bool,
}

impl GridSpec {
    pub fn raw(samples: usize) -> Self {
        Self {
            samples,
            certified: false,
        }
    }

    pub fn certified(samples: usize) -> Self {
        Self {
            samples,
            certified: true,
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::raw(DEFAULT_SAMPLES)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMax<T> {
    pub max: T,
    pub argmax: (T, T),
}

#[inline]
fn grid_point<T: Scalar>(k: usize, samples: usize) -> T {
    T::TAU() * T::of_usize(k) / T::of_usize(samples)
}

/// Scan `k1, k2 ∈ 1..=S`, keeping the first strict maximum.
fn scan_grid<T: Scalar>(samples: usize, mut g: impl FnMut(usize, usize) -> T) -> (T, usize, usize) {
    let mut best = (T::neg_infinity(), 1, 1);
    for k1 in 1..=samples {
        for k2 in 1..=samples {
            let v = g(k1, k2);
            if v > best.0 {
                best = (v, k1, k2);
            }
        }
    }
    best
}

/// Maximum of `g` over the `S × S` equidistant grid and the first grid point
/// (ω1-outer scan order) where it is attained.
pub fn polygrid_max<T: Scalar>(mut g: impl FnMut(T, T) -> T, samples: usize) -> Result<GridMax<T>> {
    if samples == 0 {
        return Err(Error::Parameter("number of grid samples must be >= 1".into()));
    }
    let (max, k1, k2) = scan_grid(samples, |k1, k2| {
        g(grid_point(k1, samples), grid_point(k2, samples))
    });
    Ok(GridMax {
        max,
        argmax: (grid_point(k1, samples), grid_point(k2, samples)),
    })
}

/// `(1 - α)⁻¹` with `α = 2d/S`: the grid maximum of `|f|` for a degree-`d`
/// polynomial times this factor bounds the true supremum.
pub fn certified_factor<T: Scalar>(degree: usize, samples: usize) -> Result<T> {
    if samples <= 2 * degree {
        return Err(Error::CertificationImpossible { degree, samples });
    }
    let alpha = T::of_usize(2 * degree) / T::of_usize(samples);
    Ok(T::one() / (T::one() - alpha))
}

/// Result of [`lipbound`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport<T> {
    /// The returned bound: `raw_grid_bound`, times the certification factor
    /// when certified.
    pub bound: T,
    pub raw_grid_bound: T,
    /// Per output channel, the grid maximum of `Σ_in |f|²` (not rooted).
    pub per_out_channel: Vec<T>,
    pub samples: usize,
    pub certified: bool,
    /// `2d/S`, absent when `S <= 2d`.
    pub alpha: Option<T>,
    pub argmax_freqs: Vec<(T, T)>,
    /// Milliseconds.
    pub wall_time: f64,
}

/// `exp(2πi·m/S)` for `m = 0..S`, indexed by `(h·k) mod S` so that every
/// sampled phase is reduced exactly before the trig call.
struct PhaseTable<T> {
    samples: usize,
    phases: Vec<Complex<T>>,
}

impl<T: Scalar> PhaseTable<T> {
    fn new(samples: usize) -> Self {
        let phases = (0..samples)
            .map(|m| {
                let t = grid_point::<T>(m, samples);
                Complex::new(t.cos(), t.sin())
            })
            .collect();
        Self { samples, phases }
    }

    #[inline]
    fn get(&self, h: isize, k: usize) -> Complex<T> {
        let m = (h * k as isize).rem_euclid(self.samples as isize) as usize;
        self.phases[m]
    }
}

/// `|f|²` at every grid point of one polynomial, accumulated into `acc`
/// (row-major over `(k1 - 1, k2 - 1)`).
fn accumulate_modulus_sq<T: Scalar>(poly: &TrigPoly2<T>, table: &PhaseTable<T>, acc: &mut [T]) {
    let samples = table.samples;
    let d = poly.degree() as isize;
    let side = (2 * d + 1) as usize;
    // inner[k2][h1] = Σ_h2 c[h1, h2] e^{i h2 ω2}
    let mut inner = vec![Complex::new(T::zero(), T::zero()); samples * side];
    for k2 in 1..=samples {
        for h1 in -d..=d {
            let mut z = Complex::new(T::zero(), T::zero());
            for h2 in -d..=d {
                let c = poly.coeff(h1, h2);
                if !c.is_zero() {
                    z += table.get(h2, k2) * c;
                }
            }
            inner[(k2 - 1) * side + (h1 + d) as usize] = z;
        }
    }
    for k1 in 1..=samples {
        for k2 in 1..=samples {
            let row = &inner[(k2 - 1) * side..k2 * side];
            let mut z = Complex::new(T::zero(), T::zero());
            for (j, w) in row.iter().enumerate() {
                z += table.get(j as isize - d, k1) * w;
            }
            acc[(k1 - 1) * samples + (k2 - 1)] += z.norm_sqr();
        }
    }
}

fn bank_bound<T: Scalar>(bank: &PolyBank<T>, samples: usize) -> (Vec<T>, Vec<(T, T)>) {
    let table = PhaseTable::new(samples);
    let mut acc = vec![T::zero(); samples * samples];
    let mut sups = Vec::with_capacity(bank.cout());
    let mut argmax = Vec::with_capacity(bank.cout());
    for out in 0..bank.cout() {
        acc.iter_mut().for_each(|v| *v = T::zero());
        for poly in bank.row(out) {
            accumulate_modulus_sq(poly, &table, &mut acc);
        }
        let (max, k1, k2) = scan_grid(samples, |k1, k2| acc[(k1 - 1) * samples + (k2 - 1)]);
        sups.push(max);
        argmax.push((grid_point(k1, samples), grid_point(k2, samples)));
    }
    (sups, argmax)
}

/// Upper bound on the largest singular value of the stride-1 convolution
/// with `kernel`, independent of the input size.
pub fn lipbound<T: Scalar>(kernel: &Kernel4<T>, grid: GridSpec) -> Result<BoundReport<T>> {
    let start = Instant::now();
    if grid.samples == 0 {
        return Err(Error::Parameter("number of grid samples must be >= 1".into()));
    }
    let degree = kernel.degree();
    let factor = if grid.certified {
        certified_factor::<T>(degree, grid.samples)?
    } else {
        T::one()
    };

    let bank = poly_from_kernel(kernel);
    let (per_out_channel, argmax_freqs) = bank_bound(&bank, grid.samples);
    let raw_grid_bound = pairwise_sum(&per_out_channel).sqrt();

    let alpha = (grid.samples > 2 * degree)
        .then(|| T::of_usize(2 * degree) / T::of_usize(grid.samples));

    Ok(BoundReport {
        bound: raw_grid_bound * factor,
        raw_grid_bound,
        per_out_channel,
        samples: grid.samples,
        certified: grid.certified,
        alpha,
        argmax_freqs,
        wall_time: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// `Σ_i log LipBound(kernel_i)`, the layer-wise regularization term.
pub fn logsum_lipbound<T: Scalar>(kernels: &[Kernel4<T>], grid: GridSpec) -> Result<T> {
    let mut logs = Vec::with_capacity(kernels.len());
    for (i, k) in kernels.iter().enumerate() {
        let b = lipbound(k, grid)?.bound;
        if b.is_nan() || b <= T::zero() {
            return Err(Error::Domain(format!(
                "kernel {i} has LipBound 0; log is undefined (all-zero layer?)"
            )));
        }
        logs.push(b.ln());
    }
    Ok(pairwise_sum(&logs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{random_kernel, KernelDist};
    use crate::trigpoly::channel_power;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn constant_function_argmax_is_first_point() {
        let m = polygrid_max(|_: f64, _: f64| 1.0, 10).unwrap();
        assert_eq!(m.max, 1.0);
        assert!((m.argmax.0 - TAU / 10.0).abs() < 1e-15);
        assert!((m.argmax.1 - TAU / 10.0).abs() < 1e-15);
    }

    #[test]
    fn wrapped_grid_point_wins() {
        // |e^{iω1} + 1|² on {π/2, π, 3π/2, 2π}
        let g = |w1: f64, _w2: f64| {
            let z = Complex::new(w1.cos() + 1.0, w1.sin());
            z.norm_sqr()
        };
        let m = polygrid_max(g, 4).unwrap();
        assert!((m.max - 4.0).abs() < 1e-12);
        assert!((m.argmax.0 - TAU).abs() < 1e-15);
        assert!((m.argmax.1 - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(matches!(
            polygrid_max(|_: f64, _: f64| 0.0, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn certification_factor_values() {
        assert!((certified_factor::<f64>(1, 10).unwrap() - 1.25).abs() < 1e-15);
        assert_eq!(certified_factor::<f64>(0, 1).unwrap(), 1.0);
        assert_eq!(certified_factor::<f64>(0, 37).unwrap(), 1.0);
        assert!(matches!(
            certified_factor::<f64>(2, 4),
            Err(Error::CertificationImpossible { degree: 2, samples: 4 })
        ));
    }

    #[test]
    fn identity_kernel_bounds() {
        let k = Kernel4::<f64>::identity(3).unwrap();
        let raw = lipbound(&k, GridSpec::raw(10)).unwrap();
        assert_eq!(raw.bound, 1.0);
        assert_eq!(raw.raw_grid_bound, 1.0);
        let cert = lipbound(&k, GridSpec::certified(10)).unwrap();
        assert!((cert.bound - 1.25).abs() < 1e-15);
        assert_eq!(cert.raw_grid_bound, 1.0);
        assert_eq!(cert.alpha, Some(0.2));
    }

    #[test]
    fn channel_sums() {
        let two_out = Kernel4::new(2, 1, 1, vec![1.0f64, 1.0]).unwrap();
        let two_in = Kernel4::new(1, 2, 1, vec![1.0f64, 1.0]).unwrap();
        for k in [two_out, two_in] {
            let r = lipbound(&k, GridSpec::default()).unwrap();
            assert!((r.bound - 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn certified_below_raw_sample_count_errors() {
        let k = Kernel4::<f64>::identity(5).unwrap();
        assert!(matches!(
            lipbound(&k, GridSpec::certified(4)),
            Err(Error::CertificationImpossible { .. })
        ));
        let r = lipbound(&k, GridSpec::raw(4)).unwrap();
        assert_eq!(r.alpha, None);
    }

    #[test]
    fn zero_kernel_bound_is_exactly_zero() {
        let k = Kernel4::<f64>::zeros(3, 2, 3).unwrap();
        let r = lipbound(&k, GridSpec::certified(10)).unwrap();
        assert_eq!(r.bound, 0.0);
    }

    #[test]
    fn fast_grid_matches_direct_evaluation() {
        let k = random_kernel::<f64>(11, 3, 4, 5, KernelDist::default()).unwrap();
        let bank = poly_from_kernel(&k);
        let r = lipbound(&k, GridSpec::raw(17)).unwrap();
        for out in 0..3 {
            let direct = polygrid_max(|a, b| channel_power(&bank, out, a, b).unwrap(), 17).unwrap();
            let rel = (direct.max - r.per_out_channel[out]).abs() / direct.max;
            assert!(rel < 1e-12, "out {out}: {rel}");
        }
        let agg: f64 = r.per_out_channel.iter().sum();
        assert!((r.bound * r.bound - agg).abs() <= 1e-12 * agg);
    }

    #[test]
    fn logsum_cases() {
        let id = Kernel4::<f64>::identity(3).unwrap();
        assert_eq!(logsum_lipbound(std::slice::from_ref(&id), GridSpec::default()).unwrap(), 0.0);

        let a = random_kernel::<f64>(1, 2, 2, 3, KernelDist::default()).unwrap();
        let b = random_kernel::<f64>(2, 1, 3, 3, KernelDist::default()).unwrap();
        let grid = GridSpec::default();
        let (ba, bb) = (lipbound(&a, grid).unwrap().bound, lipbound(&b, grid).unwrap().bound);
        let total = logsum_lipbound(&[a.clone(), b], grid).unwrap();
        assert!((total - (ba.ln() + bb.ln())).abs() < 1e-12);
        assert!((total - (ba * bb).ln()).abs() < 1e-12);

        let zero = Kernel4::<f64>::zeros(1, 1, 3).unwrap();
        assert!(matches!(
            logsum_lipbound(&[a, zero], grid),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let k = random_kernel::<f32>(4, 2, 2, 3, KernelDist::default()).unwrap();
        let k64: Kernel4<f64> = k.cast();
        let r32 = lipbound(&k, GridSpec::raw(10)).unwrap();
        let r64 = lipbound(&k64, GridSpec::raw(10)).unwrap();
        assert!((r32.bound as f64 - r64.bound).abs() < 1e-5 * r64.bound);
    }
}
