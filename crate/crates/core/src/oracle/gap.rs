//! Tightness of LipBound against the exact norm as the input grows.

use serde::Serialize;

use super::conv::{sigma_max_exact, ConvOperatorSpec};
use crate::error::Result;
use crate::kernel::Kernel4;
use crate::lipbound::{lipbound, GridSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapEntry<T> {
    pub n: usize,
    pub lipbound: T,
    pub sigma1: T,
    /// `lipbound - sigma1`.
    pub gamma: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSeries<T> {
    pub entries: Vec<GapEntry<T>>,
}

impl<T: Scalar> GapSeries<T> {
    pub const CSV_HEADER: &'static str = "n,lipbound,sigma1,gamma";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{}\n", e.n, e.lipbound, e.sigma1, e.gamma));
        }
        out
    }
}

/// `Γ(n) = LipBound(kernel) - σ1(M(n))` for each `n`, with `M(n)` the
/// "same" convolution on `n × n` inputs.
pub fn gamma_series<T: Scalar>(
    kernel: &Kernel4<T>,
    ns: &[usize],
    grid: GridSpec,
) -> Result<GapSeries<T>> {
    let bound = lipbound(kernel, grid)?.bound;
    let entries = ns
        .iter()
        .map(|&n| {
            let spec = ConvOperatorSpec::new(kernel.clone(), n)?;
            let sigma1 = sigma_max_exact(&spec)?;
            Ok(GapEntry {
                n,
                lipbound: bound,
                sigma1,
                gamma: bound - sigma1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GapSeries { entries })
}
