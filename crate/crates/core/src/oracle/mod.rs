//! Ground truth for LipBound: exact operator matrices, exact singular
//! values, the matrix-free power method and executable forms of the
//! structural identities the bound rests on.

mod conv;
mod dense;
mod gap;
mod toeplitz;

pub use conv::{
    adjoint_apply, conv_apply, materialize, power_method_conv, power_method_trace,
    sigma_max_exact, sigma_max_lanczos, ConvOperatorSpec, DENSE_GRAM_LIMIT, LANCZOS_TOL,
    MATERIALIZE_LIMIT,
};
pub use dense::{
    concat_bound_check, lanczos_max_eigenvalue, min_eigenvalue_symmetric, sigma_max_dense,
    DenseMat,
};
pub use gap::{gamma_series, GapEntry, GapSeries};
pub use toeplitz::{
    block_toeplitz, doubly_block_toeplitz, hankel_materialize, psd_residual,
    psd_residual_min_eig, toeplitz_from_symbol, widom_decomposition, widom_residual,
    HankelVariant,
};
