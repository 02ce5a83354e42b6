//! Toeplitz, block Toeplitz, doubly-block Toeplitz and Hankel-type
//! operators generated by trigonometric polynomials, plus the generalized
//! Widom identity and the positive semi-definite residual behind the
//! multi-channel bound.
//!
//! Indexing convention throughout: entry `(r, c)` of a Toeplitz matrix is
//! the coefficient at offset `c - r`. For `n × n` grids a flat index `r`
//! splits as `(r / n, r % n)`.

use super::dense::{min_eigenvalue_symmetric, DenseMat};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trigpoly::TrigPoly2;

/// `n × n` Toeplitz matrix with `(i, j) = a[j - i]`; `coeffs[h + n - 1]`
/// holds `a[h]` for `h ∈ [-(n-1), n-1]`.
pub fn toeplitz_from_symbol<T: Scalar>(coeffs: &[T], n: usize) -> Result<DenseMat<T>> {
    if n == 0 || coeffs.len() != 2 * n - 1 {
        return Err(Error::DimMismatch(format!(
            "size {n} Toeplitz matrix needs 2n-1 = {} coefficients, got {}",
            (2 * n).saturating_sub(1),
            coeffs.len()
        )));
    }
    Ok(DenseMat::from_fn(n, n, |i, j| coeffs[j + n - 1 - i]))
}

/// Block Toeplitz matrix with block `(i, j) = B[j - i]`; `blocks[h + n - 1]`
/// holds `B[h]`, all square of the same size.
pub fn block_toeplitz<T: Scalar>(blocks: &[DenseMat<T>], n: usize) -> Result<DenseMat<T>> {
    if n == 0 || blocks.len() != 2 * n - 1 {
        return Err(Error::DimMismatch(format!(
            "size {n} block Toeplitz matrix needs 2n-1 blocks, got {}",
            blocks.len()
        )));
    }
    let m = blocks[0].rows();
    if blocks.iter().any(|b| b.rows() != m || b.cols() != m) {
        return Err(Error::DimMismatch("blocks must be square and equal-sized".into()));
    }
    Ok(DenseMat::from_fn(n * m, n * m, |r, c| {
        blocks[c / m + n - 1 - r / m].get(r % m, c % m)
    }))
}

/// `D(f)` on an `n × n` grid: `(r, c) ↦ f̂[c1 - r1, c2 - r2]`.
pub fn doubly_block_toeplitz<T: Scalar>(f: &TrigPoly2<T>, n: usize) -> DenseMat<T> {
    index_matrix(f, n, |r1, r2, c1, c2| (c1 - r1, c2 - r2))
}

/// The four Hankel-type operators of the generalized Widom identity.
///
/// With `(r1, r2)` the row and `(c1, c2)` the column grid index, entry
/// `(r, c)` of `H(f)` is the coefficient `f̂` at
///
/// | variant  | block offset    | in-block offset |
/// |----------|-----------------|-----------------|
/// | `Alpha0` | `r1 + c1 + 1`   | `c2 - r2`       |
/// | `Alpha1` | `c1 - r1`       | `r2 + c2 + 1`   |
/// | `Alpha2` | `r1 + c1 + 1`   | `r2 + c2 + 1`   |
/// | `Alpha3` | `c1 - r1 - n`   | `r2 + c2 + 1`   |
///
/// Coefficients outside the polynomial's support are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HankelVariant {
    Alpha0,
    Alpha1,
    Alpha2,
    Alpha3,
}

impl HankelVariant {
    pub const ALL: [HankelVariant; 4] = [
        HankelVariant::Alpha0,
        HankelVariant::Alpha1,
        HankelVariant::Alpha2,
        HankelVariant::Alpha3,
    ];
}

pub fn hankel_materialize<T: Scalar>(
    f: &TrigPoly2<T>,
    n: usize,
    variant: HankelVariant,
) -> DenseMat<T> {
    let ni = n as isize;
    match variant {
        HankelVariant::Alpha0 => index_matrix(f, n, |r1, r2, c1, c2| (r1 + c1 + 1, c2 - r2)),
        HankelVariant::Alpha1 => index_matrix(f, n, |r1, r2, c1, c2| (c1 - r1, r2 + c2 + 1)),
        HankelVariant::Alpha2 => index_matrix(f, n, |r1, r2, c1, c2| (r1 + c1 + 1, r2 + c2 + 1)),
        HankelVariant::Alpha3 => index_matrix(f, n, |r1, r2, c1, c2| (c1 - r1 - ni, r2 + c2 + 1)),
    }
}

fn index_matrix<T: Scalar>(
    f: &TrigPoly2<T>,
    n: usize,
    offset: impl Fn(isize, isize, isize, isize) -> (isize, isize),
) -> DenseMat<T> {
    let nn = n * n;
    DenseMat::from_fn(nn, nn, |r, c| {
        let (h1, h2) = offset(
            (r / n) as isize,
            (r % n) as isize,
            (c / n) as isize,
            (c % n) as isize,
        );
        f.coeff(h1, h2)
    })
}

/// Right-hand side of the generalized Widom identity:
/// `D(f)D(g) + Σ_p Hpᵀ(f*) Hp(g) + Q (Σ_p Hpᵀ(f) Hp(g*)) Q`.
pub fn widom_decomposition<T: Scalar>(
    f: &TrigPoly2<T>,
    g: &TrigPoly2<T>,
    n: usize,
) -> Result<DenseMat<T>> {
    let (fc, gc) = (f.conj(), g.conj());
    let mut total = doubly_block_toeplitz(f, n).matmul(&doubly_block_toeplitz(g, n))?;
    let mut reflected = DenseMat::zeros(n * n, n * n);
    for variant in HankelVariant::ALL {
        let plain = hankel_materialize(&fc, n, variant)
            .transpose()
            .matmul(&hankel_materialize(g, n, variant))?;
        total = total.add(&plain)?;
        let mirror = hankel_materialize(f, n, variant)
            .transpose()
            .matmul(&hankel_materialize(&gc, n, variant))?;
        reflected = reflected.add(&mirror)?;
    }
    let q = DenseMat::anti_identity(n * n);
    total.add(&q.matmul(&reflected)?.matmul(&q)?)
}

/// Max-abs entry of `D(fg)` minus [`widom_decomposition`]; zero up to
/// rounding whenever `deg f + deg g < n`.
pub fn widom_residual<T: Scalar>(f: &TrigPoly2<T>, g: &TrigPoly2<T>, n: usize) -> Result<T> {
    if f.degree() + g.degree() >= n {
        return Err(Error::Parameter(format!(
            "deg f + deg g = {} must be < n = {n}",
            f.degree() + g.degree()
        )));
    }
    let lhs = doubly_block_toeplitz(&f.mul(g), n);
    Ok(lhs.sub(&widom_decomposition(f, g, n)?)?.max_abs())
}

/// `D(|f|²) - Dᵀ(f) D(f)`.
pub fn psd_residual<T: Scalar>(f: &TrigPoly2<T>, n: usize) -> Result<DenseMat<T>> {
    if 2 * f.degree() >= n {
        return Err(Error::Parameter(format!(
            "2·deg f = {} must be < n = {n}",
            2 * f.degree()
        )));
    }
    let d = doubly_block_toeplitz(f, n);
    let sq = doubly_block_toeplitz(&f.conj().mul(f), n);
    sq.sub(&d.transpose().matmul(&d)?)
}

/// Smallest eigenvalue of [`psd_residual`]; non-negative up to rounding.
pub fn psd_residual_min_eig<T: Scalar>(f: &TrigPoly2<T>, n: usize) -> Result<T> {
    min_eigenvalue_symmetric(&psd_residual(f, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toeplitz_basics() {
        let mut a = vec![0.0f64; 5];
        a[2] = 1.0;
        assert_eq!(toeplitz_from_symbol(&a, 3).unwrap(), DenseMat::identity(3));

        let mut a = vec![0.0f64; 5];
        a[3] = 1.0;
        let shift = toeplitz_from_symbol(&a, 3).unwrap();
        assert_eq!(
            shift,
            DenseMat::new(3, 3, vec![0., 1., 0., 0., 0., 1., 0., 0., 0.]).unwrap()
        );
        assert!(toeplitz_from_symbol(&[1.0f64; 4], 3).is_err());
    }

    #[test]
    fn doubly_block_layout() {
        let mut f = TrigPoly2::<f64>::zeros(1);
        f.set(1, -1, 2.0);
        let d = doubly_block_toeplitz(&f, 3);
        // row (0, 1) -> column (1, 0)
        assert_eq!(d.get(1, 3), 2.0);
        assert_eq!(d.data().iter().filter(|v| **v != 0.0).count(), 4);
    }

    #[test]
    fn zero_and_constant_hankels_vanish() {
        let zero = TrigPoly2::<f64>::zeros(1);
        for v in HankelVariant::ALL {
            assert_eq!(hankel_materialize(&zero, 3, v).max_abs(), 0.0);
        }
        let c = TrigPoly2::constant(3.0f64);
        assert_eq!(hankel_materialize(&c, 2, HankelVariant::Alpha0).max_abs(), 0.0);
        for v in HankelVariant::ALL {
            assert_eq!(hankel_materialize(&c, 4, v).max_abs(), 0.0);
        }
    }

    #[test]
    fn widom_constant_one() {
        let one = TrigPoly2::constant(1.0f64);
        assert_eq!(widom_residual(&one, &one, 3).unwrap(), 0.0);
        assert_eq!(doubly_block_toeplitz(&one, 3), DenseMat::identity(9));
    }

    #[test]
    fn widom_single_terms() {
        // every corner region exercised by monomials
        for h1 in -1..=1 {
            for h2 in -1..=1 {
                for k1 in -1..=1 {
                    for k2 in -1..=1 {
                        let f = TrigPoly2::monomial(1, h1, h2, 1.0f64);
                        let g = TrigPoly2::monomial(1, k1, k2, 1.0f64);
                        let r = widom_residual(&f, &g, 3).unwrap();
                        assert_eq!(r, 0.0, "f=({h1},{h2}) g=({k1},{k2})");
                    }
                }
            }
        }
    }

    #[test]
    fn degree_guards() {
        let f = TrigPoly2::<f64>::zeros(2);
        assert!(matches!(widom_residual(&f, &f, 4), Err(Error::Parameter(_))));
        assert!(matches!(psd_residual_min_eig(&f, 4), Err(Error::Parameter(_))));
    }

    #[test]
    fn constant_psd_residual_is_zero() {
        let c = TrigPoly2::constant(-1.5f64);
        let r = psd_residual(&c, 3).unwrap();
        assert_eq!(r.max_abs(), 0.0);
        assert_eq!(psd_residual_min_eig(&c, 3).unwrap(), 0.0);
    }

    #[test]
    fn monomial_psd_residual() {
        let f = TrigPoly2::monomial(1, 1, 1, 1.0f64);
        assert!(psd_residual_min_eig(&f, 4).unwrap() >= -1e-9);
    }
}
