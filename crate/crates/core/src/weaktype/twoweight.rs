//! The two-weight weak-type estimate for the one-sided maximal function and
//! the auxiliary decreasing weight behind it.

use alloc::vec::Vec;

use super::cz::maximal_level_set;
use crate::dyadic::CellRange;
use crate::error::{Error, Result};
use crate::operators::max_down;
use crate::weights::Weight;

/// `w(x) = min_{a <= y <= x} M↓(χ_I u)(y)` on the cells of `I = [a, b)`.
pub fn auxiliary_weight(u: &[f64], i: CellRange) -> Vec<f64> {
    let m = max_down(u, i);
    let mut low = f64::INFINITY;
    m.into_iter()
        .map(|v| {
            low = low.min(v);
            low
        })
        .collect()
}

/// The four properties on one component `I = [a, b)` of the level set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoWeightComponent {
    pub interval: CellRange,
    /// (i) the auxiliary weight is nonincreasing.
    pub nonincreasing: bool,
    /// (ii) `u(I) / w(I)`; at most 1.
    pub mass_ratio: f64,
    /// (iii) `min_t ⟨f⟩_{[a,t]} / λ`; at least 1.
    pub prefix_ratio: f64,
    /// (iv) `∫_I f w / (λ ∫_I w)`; at least 1.
    pub weighted_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoWeightReport {
    /// `C = sup_{I₀} M↓_{I₀} u / v`.
    pub constant: f64,
    pub lambda: f64,
    pub components: Vec<TwoWeightComponent>,
    /// `u({M↑_{I₀} f > λ}) / ((C/λ) ‖f‖_{L¹(v)})`.
    pub ratio: f64,
}

impl TwoWeightReport {
    /// (i)–(iv) on every component, with relative tolerance `1e-12`.
    pub fn holds(&self) -> bool {
        let tol = 1e-12;
        self.components
            .iter()
            .all(|c| c.nonincreasing && c.mass_ratio <= 1.0 + tol && c.prefix_ratio >= 1.0 - tol && c.weighted_ratio >= 1.0 - tol)
    }
}

/// Checks the level-set argument at `λ` for `f >= 0` on `I₀`, with `u`, `v`
/// positive there.
pub fn two_weight_maximal_check(u: &Weight, v: &Weight, i0: CellRange, f: &[f64], lambda: f64) -> Result<TwoWeightReport> {
    let n = u.values().len();
    if v.values().len() != n || f.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: v.values().len().min(f.len()) });
    }
    if !u.support().contains(&i0) || !v.support().contains(&i0) {
        return Err(Error::Domain("both weights must be positive on the ambient interval"));
    }
    if let Some(cell) = f.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidWeight { cell, reason: "density must be finite and nonnegative" });
    }
    let (uv, vv) = (u.values(), v.values());
    let mu = max_down(uv, i0);
    let constant = i0.cells().fold(0.0f64, |m, i| m.max(mu[i - i0.start] / vv[i]));
    let mut components = Vec::new();
    let mut level_mass = 0.0;
    for r in maximal_level_set(f, lambda, i0)? {
        let w = auxiliary_weight(uv, r);
        let nonincreasing = w.windows(2).all(|p| p[1] <= p[0]);
        let u_mass: f64 = uv[r.cells()].iter().sum();
        let w_mass: f64 = w.iter().sum();
        let mut acc = 0.0;
        let mut prefix_ratio = f64::INFINITY;
        for (k, x) in r.cells().enumerate() {
            acc += f[x];
            prefix_ratio = prefix_ratio.min(acc / (k + 1) as f64 / lambda);
        }
        let fw: f64 = r.cells().zip(&w).map(|(x, wx)| f[x] * wx).sum();
        components.push(TwoWeightComponent {
            interval: r,
            nonincreasing,
            mass_ratio: u_mass / w_mass,
            prefix_ratio,
            weighted_ratio: fw / (lambda * w_mass),
        });
        level_mass += u_mass;
    }
    let fv: f64 = i0.cells().map(|i| f[i] * vv[i]).sum();
    let ratio = if level_mass == 0.0 { 0.0 } else { level_mass * lambda / (constant * fv) };
    Ok(TwoWeightReport { constant, lambda, components, ratio })
}
