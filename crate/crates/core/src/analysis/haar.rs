//! Disbalanced Haar projections `Δ_I^λ` on one lattice.

use alloc::vec;
use alloc::vec::Vec;

use crate::dyadic::{CellRange, DyadicInterval, Lattice};
use crate::error::{Error, Result};
use crate::sums::DyadicSums;
#[allow(unused_imports)]
use num_traits::Float;

/// `Δ_I^λ f` on the whole grid. `degenerate` is set when a child of `I`
/// carries no mass, in which case the projection is the zero map.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarProjection {
    pub values: Vec<f64>,
    pub degenerate: bool,
}

fn cells_of(iv: &DyadicInterval, n: usize) -> Result<CellRange> {
    let (s, e) = (iv.start(), iv.end());
    if s < 0 || e > n as i64 {
        return Err(Error::NotContained { inner_start: s.max(0) as usize, inner_end: e.max(0) as usize, outer_start: 0, outer_end: n });
    }
    Ok(CellRange::new(s as usize, e as usize))
}

fn weighted_sum(f: &[f64], lambda: &[f64], r: CellRange) -> (f64, f64) {
    r.cells().fold((0.0, 0.0), |(m, s), k| (m + lambda[k], s + lambda[k] * f[k]))
}

/// `(⟨f⟩_{λ,child} − ⟨f⟩_{λ,I})` on each child of `I`, zero elsewhere.
pub fn haar_project(f: &[f64], iv: &DyadicInterval, lambda: &[f64]) -> Result<HaarProjection> {
    if f.len() != lambda.len() {
        return Err(Error::LengthMismatch { expected: lambda.len(), got: f.len() });
    }
    let n = f.len();
    let (lo, hi) = iv.halves()?;
    let (lo, hi) = (cells_of(&lo, n)?, cells_of(&hi, n)?);
    let mut values = vec![0.0; n];
    let (a, fa) = weighted_sum(f, lambda, lo);
    let (b, fb) = weighted_sum(f, lambda, hi);
    if !(a > 0.0 && b > 0.0) {
        return Ok(HaarProjection { values, degenerate: true });
    }
    let avg = (fa + fb) / (a + b);
    values[lo.cells()].fill(fa / a - avg);
    values[hi.cells()].fill(fb / b - avg);
    Ok(HaarProjection { values, degenerate: false })
}

/// `f₁ = ⟨f⟩_{λ,I₀} χ_{I₀}` and `f₂ = f − f₁`.
pub fn mean_split(f: &[f64], lambda: &[f64], i0: CellRange) -> Result<(Vec<f64>, Vec<f64>)> {
    if f.len() != lambda.len() {
        return Err(Error::LengthMismatch { expected: lambda.len(), got: f.len() });
    }
    let (mass, s) = weighted_sum(f, lambda, i0);
    if !(mass > 0.0) {
        return Err(Error::ZeroMass("mean split on an interval without mass"));
    }
    let avg = s / mass;
    let mut f1 = vec![0.0; f.len()];
    f1[i0.cells()].fill(avg);
    let f2 = f.iter().zip(&f1).map(|(a, b)| a - b).collect();
    Ok((f1, f2))
}

/// Haar coefficients of one function against every interval of a lattice
/// inside the grid.
///
/// The coefficient of `I` is `√(ab/(a+b))·(m_a − m_b)` with `a, b` the
/// masses and `m_a, m_b` the averages on the two halves, so that its square
/// is `‖Δ_I^λ f‖²_λ`. Degenerate intervals get coefficient zero.
#[derive(Debug, Clone)]
pub struct HaarSystem {
    measure: Vec<f64>,
    lattice: Lattice,
    /// Per level `k >= 1`: index of the first stored interval, and the coefficients.
    levels: Vec<(i64, Vec<f64>)>,
    degenerate: usize,
}

impl HaarSystem {
    pub fn new(f: &[f64], lambda: &[f64], lattice: Lattice) -> Result<Self> {
        if f.len() != lambda.len() {
            return Err(Error::LengthMismatch { expected: lambda.len(), got: f.len() });
        }
        let n = f.len();
        let whole = CellRange::new(0, n);
        let fl: Vec<f64> = f.iter().zip(lambda).map(|(a, b)| a * b).collect();
        let sm = DyadicSums::new(lambda, lattice);
        let sf = DyadicSums::new(&fl, lattice);
        let mut levels = Vec::new();
        let mut degenerate = 0;
        for k in 1..=sm.max_level() {
            let mut ivs = lattice.intervals_in(k, whole).peekable();
            let first = ivs.peek().map_or(0, |iv| iv.index);
            let coeffs = ivs
                .map(|iv| {
                    let (lo, hi) = iv.halves().expect("level is positive");
                    let (a, b) = (sm.at(&lo), sm.at(&hi));
                    if a > 0.0 && b > 0.0 {
                        (a * b / (a + b)).sqrt() * (sf.at(&lo) / a - sf.at(&hi) / b)
                    } else {
                        degenerate += 1;
                        0.0
                    }
                })
                .collect();
            levels.push((first, coeffs));
        }
        Ok(Self { measure: lambda.to_vec(), lattice, levels, degenerate })
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    /// Number of intervals skipped because a half carries no mass.
    pub fn degenerate_count(&self) -> usize {
        self.degenerate
    }

    /// Signed coefficient of `iv`, or `None` if `iv` is not stored.
    pub fn coefficient(&self, iv: &DyadicInterval) -> Option<f64> {
        if iv.shift != self.lattice.shift() || iv.level == 0 {
            return None;
        }
        let (first, c) = self.levels.get(iv.level as usize - 1)?;
        let k = usize::try_from(iv.index.checked_sub(*first)?).ok()?;
        c.get(k).copied()
    }

    /// `(interval, coefficient)` for every stored interval, coarsest first.
    pub fn iter(&self) -> impl Iterator<Item = (DyadicInterval, f64)> + '_ {
        let shift = self.lattice.shift();
        self.levels.iter().enumerate().rev().flat_map(move |(k, (first, c))| {
            c.iter().enumerate().map(move |(i, v)| (DyadicInterval { level: k as u32 + 1, index: first + i as i64, shift }, *v))
        })
    }

    /// `∑ ‖Δ_I f‖²_λ` over the stored intervals contained in `range`.
    pub fn energy_within(&self, range: CellRange) -> f64 {
        let mut total = 0.0;
        for (k, (first, c)) in self.levels.iter().enumerate() {
            for iv in self.lattice.intervals_in(k as u32 + 1, range) {
                let i = (iv.index - first) as usize;
                total += c[i] * c[i];
            }
        }
        total
    }
}
