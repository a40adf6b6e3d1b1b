//! Upward weights, the measures `μ = w⁻¹dx` and `ν = w dx`, one-sided
//! characteristics and reverse Hölder.

mod characteristic;
mod family;
mod rh;

use alloc::vec::Vec;

use crate::dyadic::{CellRange, Grid};
use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

pub use characteristic::{
    a1_cxd, a1_up_local, ap_classical, ap_down, ap_up, ap_up_local, ap_up_on, joint_characteristic, joint_characteristic_down,
    joint_characteristic_on,
};
pub use family::{family_generate, standard_corpus, CorpusEntry, WeightKind};
pub use rh::{reverse_holder_verify, rh_level_components, rh_smallest_constant, RhReport};

/// Cell values of an upward weight: positive on the cells of `ℍ`, zero above.
///
/// With a cutoff `z`, `ℍ` is the set of cells whose midpoint lies below `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    grid: Grid,
    values: Vec<f64>,
    cutoff: Option<f64>,
    support: usize,
}

impl Weight {
    pub fn new(grid: &Grid, values: Vec<f64>, cutoff: Option<f64>) -> Result<Self> {
        let n = grid.n();
        if values.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: values.len() });
        }
        let support = cutoff.map_or(n, |z| grid.cells_below(z));
        if support == 0 {
            return Err(Error::InvalidWeight { cell: 0, reason: "empty support" });
        }
        for (i, v) in values.iter().enumerate() {
            if i < support {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(Error::InvalidWeight { cell: i, reason: "must be positive and finite on the support" });
                }
            } else if *v != 0.0 {
                return Err(Error::InvalidWeight { cell: i, reason: "must vanish above the cutoff" });
            }
        }
        Ok(Self { grid: *grid, values, cutoff, support })
    }

    /// Samples `f` at cell midpoints below the cutoff.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64, cutoff: Option<f64>) -> Result<Self> {
        let support = cutoff.map_or(grid.n(), |z| grid.cells_below(z));
        let values = grid.midpoints().enumerate().map(|(i, x)| if i < support { f(x) } else { 0.0 }).collect();
        Self::new(grid, values, cutoff)
    }

    /// # Panics
    /// If `c` is not positive and finite.
    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::new(grid, alloc::vec![c; grid.n()], None).expect("constant weight must be positive")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    /// The cells of `ℍ`.
    pub fn support(&self) -> CellRange {
        CellRange::new(0, self.support)
    }

    /// `w⁻¹` on `ℍ`, zero above.
    pub fn reciprocal(&self) -> Self {
        self.map_support(|v| v.recip())
    }

    /// `c·w`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let out = self.map_support(|v| c * v);
        Self::new(&self.grid, out.values, self.cutoff)
    }

    /// `f·w` for cell values `f` positive on `ℍ`.
    pub fn multiplied(&self, f: &[f64]) -> Result<Self> {
        if f.len() != self.values.len() {
            return Err(Error::LengthMismatch { expected: self.values.len(), got: f.len() });
        }
        let values = self.values.iter().zip(f).enumerate().map(|(i, (v, g))| if i < self.support { v * g } else { 0.0 }).collect();
        Self::new(&self.grid, values, self.cutoff)
    }

    /// `w^q` on `ℍ`, zero above.
    pub fn powf(&self, q: f64) -> Vec<f64> {
        self.map_support(|v| v.powf(q)).values
    }

    fn map_support(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self.values.iter().enumerate().map(|(i, v)| if i < self.support { f(*v) } else { 0.0 }).collect();
        Self { values, ..self.clone() }
    }
}

/// Cell masses `μ_j = w_j⁻¹·cw` and `ν_j = w_j·cw` on `ℍ`, zero above.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePair {
    grid: Grid,
    mu: Vec<f64>,
    nu: Vec<f64>,
    support: usize,
}

impl MeasurePair {
    pub fn from_weight(w: &Weight) -> Self {
        let cw = w.grid.cell_width();
        let h = w.support;
        let mu = w.values.iter().enumerate().map(|(i, v)| if i < h { cw / v } else { 0.0 }).collect();
        let nu = w.values.iter().enumerate().map(|(i, v)| if i < h { cw * v } else { 0.0 }).collect();
        Self { grid: w.grid, mu, nu, support: h }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn support(&self) -> CellRange {
        CellRange::new(0, self.support)
    }

    /// The pair of `w⁻¹`: `μ` and `ν` exchanged.
    pub fn swapped(&self) -> Self {
        Self { mu: self.nu.clone(), nu: self.mu.clone(), ..self.clone() }
    }

    /// Largest `|μ_j ν_j − cw²| / cw²` over `ℍ`.
    pub fn product_defect(&self) -> f64 {
        let cw2 = self.grid.cell_width().powi(2);
        self.mu[..self.support].iter().zip(&self.nu).fold(0.0, |m, (a, b)| m.max((a * b - cw2).abs() / cw2))
    }
}
