//! Self-check of the structural properties the bound relies on, on small
//! seeded random instances. Backs the CLI `check` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::kernel::{random_kernel, Kernel4, KernelDist};
use crate::lipbound::{certified_factor, lipbound, polygrid_max, GridSpec};
use crate::oracle::{
    adjoint_apply, concat_bound_check, conv_apply, materialize, power_method_trace,
    psd_residual_min_eig, sigma_max_dense, widom_residual, ConvOperatorSpec, DenseMat,
};
use crate::trigpoly::TrigPoly2;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> TrigPoly2<f64> {
    let side = 2 * degree + 1;
    let coeffs = (0..side * side).map(|_| rng.sample(StandardNormal)).collect();
    TrigPoly2::new(degree, coeffs).expect("finite coefficients")
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

fn random_shape(rng: &mut ChaCha8Rng, max_channels: usize, sizes: &[usize]) -> (usize, usize, usize) {
    (
        rng.random_range(1..=max_channels),
        rng.random_range(1..=max_channels),
        sizes[rng.random_range(0..sizes.len())],
    )
}

struct Tally {
    name: &'static str,
    cases: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str, worst: f64) -> Self {
        Self {
            name,
            cases: 0,
            failures: 0,
            worst,
        }
    }

    fn record(&mut self, ok: bool, value: f64, worse: impl Fn(f64, f64) -> bool) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
        if worse(value, self.worst) {
            self.worst = value;
        }
    }

    fn done(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
        }
    }
}

fn larger(a: f64, b: f64) -> bool {
    a > b
}

fn smaller(a: f64, b: f64) -> bool {
    a < b
}

/// `‖M·x − conv(x)‖∞ / (‖x‖∞·‖k‖₁)`, must stay below 1e-12.
pub fn check_materialize(seed: u64, cases: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("materialize_equals_conv", 0.0);
    for case in 0..cases {
        let (cout, cin, s) = random_shape(&mut rng, 4, &[1, 3, 5]);
        let n = rng.random_range(3..=16usize).max(s);
        let k: Kernel4<f64> = random_kernel(seed ^ case as u64, cout, cin, s, KernelDist::default())?;
        let spec = ConvOperatorSpec::new(k, n)?;
        let m = materialize(&spec)?;
        let x = random_vec(&mut rng, spec.input_len());
        let err = m
            .matvec(&x)?
            .iter()
            .zip(conv_apply(&spec, &x)?)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let xinf = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let k1: f64 = spec.kernel().data().iter().map(|v| v.abs()).sum();
        let scaled = err / (xinf * k1).max(f64::MIN_POSITIVE);
        t.record(scaled <= 1e-12, scaled, larger);
    }
    Ok(t.done())
}

/// `|⟨Ax, y⟩ − ⟨x, Aᵀy⟩| / (‖x‖‖y‖‖k‖₁)`, must stay below 1e-12.
pub fn check_adjoint(seed: u64, cases: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("adjoint_identity", 0.0);
    for case in 0..cases {
        let (cout, cin, s) = random_shape(&mut rng, 4, &[1, 3, 5]);
        let n = rng.random_range(s..=12usize);
        let k: Kernel4<f64> = random_kernel(seed + case as u64, cout, cin, s, KernelDist::default())?;
        let spec = ConvOperatorSpec::new(k, n)?;
        let x = random_vec(&mut rng, spec.input_len());
        let y = random_vec(&mut rng, spec.output_len());
        let ax = conv_apply(&spec, &x)?;
        let aty = adjoint_apply(&spec, &y)?;
        let lhs: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&aty).map(|(a, b)| a * b).sum();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let k1: f64 = spec.kernel().data().iter().map(|v| v.abs()).sum();
        let scaled = (lhs - rhs).abs() / (nx * ny * k1);
        t.record(scaled <= 1e-12, scaled, larger);
    }
    Ok(t.done())
}

/// `certified LipBound − σ1(M(n))`, must stay above -1e-9.
pub fn check_dominance(seed: u64, cases: usize, ns: &[usize]) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("certified_dominance", f64::INFINITY);
    for case in 0..cases {
        let (cout, cin, s) = random_shape(&mut rng, 4, &[1, 3, 5]);
        let k: Kernel4<f64> = random_kernel(seed * 7919 + case as u64, cout, cin, s, KernelDist::default())?;
        let samples = 2 * k.degree() + rng.random_range(1..=12usize);
        let bound = lipbound(&k, GridSpec::certified(samples))?.bound;
        for &n in ns {
            let sigma = sigma_max_dense(&materialize(&ConvOperatorSpec::new(k.clone(), n.max(s))?)?)?;
            let margin = bound - sigma;
            t.record(margin >= -1e-9, margin, smaller);
        }
    }
    Ok(t.done())
}

/// Dense-grid maximum of `|f|` over `fine` samples against the certified
/// coarse-grid value; the excess must stay below 1e-12.
pub fn check_sampling(
    seed: u64,
    cases: usize,
    degree: usize,
    coarse: usize,
    fine: usize,
) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("sampling_certification", f64::NEG_INFINITY);
    let factor: f64 = certified_factor(degree, coarse)?;
    for _ in 0..cases {
        let f = random_poly(&mut rng, degree);
        let coarse_max = polygrid_max(|a, b| f.eval(a, b).norm(), coarse)?.max;
        let fine_max = polygrid_max(|a, b| f.eval(a, b).norm(), fine)?.max;
        let excess = fine_max - factor * coarse_max;
        t.record(excess <= 1e-12, excess, larger);
    }
    Ok(t.done())
}

/// Generalized Widom residual for random degree-1 pairs.
pub fn check_widom(seed: u64, cases: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("widom_identity", 0.0);
    for case in 0..cases {
        let n = 4 + case % 5;
        let f = random_poly(&mut rng, 1);
        let g = random_poly(&mut rng, 1);
        let r = widom_residual(&f, &g, n)?;
        t.record(r <= 1e-10, r, larger);
    }
    Ok(t.done())
}

/// Minimum eigenvalue of `D(|f|²) − Dᵀ(f)D(f)`.
pub fn check_psd(seed: u64, cases: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("psd_residual", f64::INFINITY);
    for case in 0..cases {
        let n = 4 + case % 5;
        let f = random_poly(&mut rng, 1);
        let e = psd_residual_min_eig(&f, n)?;
        t.record(e >= -1e-9, e, smaller);
    }
    Ok(t.done())
}

/// `σ1([A_1..A_p]) − √Σσ1(A_i)²` on random families.
pub fn check_concat(seed: u64, cases: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("concatenation_lemma", f64::NEG_INFINITY);
    for case in 0..cases {
        let rows = rng.random_range(1..=10usize);
        let p = rng.random_range(1..=6usize);
        let mats: Vec<DenseMat<f64>> = (0..p)
            .map(|j| {
                let cols = rng.random_range(1..=10usize);
                DenseMat::random(rows, cols, seed ^ ((case * 16 + j) as u64))
            })
            .collect();
        let (lhs, rhs) = concat_bound_check(&mats)?;
        t.record(lhs <= rhs + 1e-10, lhs - rhs, larger);
    }
    Ok(t.done())
}

/// Largest decrease between consecutive power-method estimates.
pub fn check_power_monotone(seed: u64, cases: usize) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("power_method_monotone", 0.0);
    for case in 0..cases {
        let (cout, cin, s) = random_shape(&mut rng, 3, &[1, 3, 5]);
        let n = rng.random_range(s..=12usize);
        let k: Kernel4<f64> = random_kernel(seed + 31 * case as u64, cout, cin, s, KernelDist::default())?;
        let trace = power_method_trace(&ConvOperatorSpec::new(k, n)?, 30, 0.0, case as u64)?;
        let drop = trace
            .windows(2)
            .map(|w| (w[0] - w[1]) / w[0].max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        t.record(drop <= 1e-12, drop, larger);
    }
    Ok(t.done())
}

/// Every check at a size that runs in a few seconds.
pub fn run_all(seed: u64) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        check_materialize(seed, 20)?,
        check_adjoint(seed, 20)?,
        check_dominance(seed, 20, &[4, 8])?,
        check_sampling(seed, 50, 1, 10, 256)?,
        check_sampling(seed, 50, 2, 20, 256)?,
        check_widom(seed, 10)?,
        check_psd(seed, 10)?,
        check_concat(seed, 50)?,
        check_power_monotone(seed, 10)?,
    ])
}
