//! Causal kernels, their matrices, one-sided maximal operators, Poisson
//! averages and weighted operator norms.

pub mod kernel;
pub mod matrix;
pub mod maximal;
mod norm;

use crate::dyadic::{CellRange, Grid};
use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

pub use kernel::{
    kernel_axioms_check, AxiomReport, CausalHilbert, CausalKernel, Direction, FnKernel, LogOscillating, Transposed, ZeroKernel,
};
pub use matrix::{discretize, Flavor, OperatorMatrix};
pub use maximal::{max_down, max_down_r, max_up, max_up_r};
pub use norm::{maximal_norm_estimate, weighted_operator_norm, MaximalNormEstimate, NormMode};

/// `ℓ^ε / (ℓ + t)^(1+ε)`.
#[inline]
pub fn poisson_kernel(ell: f64, t: f64, eps: f64) -> f64 {
    ell.powf(eps) / (ell + t.abs()).powf(1.0 + eps)
}

/// `𝒫_I(dλ)` for `I` the cells `iv`, with `λ` given by cell masses.
pub fn poisson_average(iv: CellRange, grid: &Grid, measure: &[f64], eps: f64) -> f64 {
    poisson_average_on(iv, grid, measure, grid.whole(), eps)
}

/// `𝒫_I(χ_E dλ)` with `E` the cells `support`.
pub fn poisson_average_on(iv: CellRange, grid: &Grid, measure: &[f64], support: CellRange, eps: f64) -> f64 {
    let cw = grid.cell_width();
    let ell = iv.len() as f64 * cw;
    // Center in cell units, measured from the left edge of the grid.
    let c = 0.5 * (iv.start + iv.end) as f64;
    let support = support.intersect(&CellRange::new(0, measure.len()));
    support.cells().filter(|&k| measure[k] != 0.0).map(|k| poisson_kernel(ell, ((k as f64 + 0.5) - c) * cw, eps) * measure[k]).sum()
}

/// `(𝓛(J₁∖J₂), 𝓤(J₁∖J₂))`: the parts of `J₁` below and above `J₂`.
pub fn lower_upper_components(j1: CellRange, j2: CellRange) -> Result<(CellRange, CellRange)> {
    if !j1.contains(&j2) {
        return Err(Error::NotContained { inner_start: j2.start, inner_end: j2.end, outer_start: j1.start, outer_end: j1.end });
    }
    let lower = if j2.start == j1.start { CellRange::EMPTY } else { CellRange::new(j1.start, j2.start) };
    let upper = if j2.end == j1.end { CellRange::EMPTY } else { CellRange::new(j2.end, j1.end) };
    Ok((lower, upper))
}
