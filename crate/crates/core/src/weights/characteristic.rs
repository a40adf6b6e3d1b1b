//! One-sided, classical and localized characteristics.
//!
//! Suprema run over the dyadic intervals with at least two cells of the
//! default lattices that lie inside `ℍ` (and inside the optional restriction).

use alloc::vec::Vec;

use crate::dyadic::{default_lattices, intervals_within, CellRange, Lattice};
use crate::error::{Error, Result};
use crate::operators::kernel::Direction;
use crate::operators::maximal::max_down;
use crate::sums::{DyadicSums, PrefixSums};
use crate::weights::{MeasurePair, Weight};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pairing {
    Up,
    Down,
    Classical,
}

/// `w^(−1/(p−1))` on `ℍ`, zero above.
fn dual_power(w: &Weight, p: f64) -> Vec<f64> {
    if p == 2.0 {
        w.reciprocal().values().to_vec()
    } else {
        w.powf(-1.0 / (p - 1.0))
    }
}

fn scope(w: &Weight, restrict: Option<CellRange>) -> CellRange {
    let s = w.support();
    restrict.map_or(s, |r| s.intersect(&r))
}

fn scan(w: &Weight, p: f64, restrict: Option<CellRange>, lattices: &[Lattice], pairing: Pairing) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain("exponent must exceed 1; use the A1 characteristic"));
    }
    let range = scope(w, restrict);
    let sigma = dual_power(w, p);
    let q = p - 1.0;
    let mut best: Option<f64> = None;
    for lat in lattices {
        let sw = DyadicSums::new(w.values(), *lat);
        let ss = DyadicSums::new(&sigma, *lat);
        for iv in intervals_within(range, core::slice::from_ref(lat), 1) {
            let (lo, hi) = iv.halves()?;
            let half = lo.len_cells() as f64;
            let v = match pairing {
                Pairing::Up => (sw.at(&hi) / half) * (ss.at(&lo) / half).powf(q),
                Pairing::Down => (sw.at(&lo) / half) * (ss.at(&hi) / half).powf(q),
                Pairing::Classical => {
                    let len = 2.0 * half;
                    (sw.at(&iv) / len) * (ss.at(&iv) / len).powf(q)
                }
            };
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best.ok_or(Error::NoAdmissibleInterval("no dyadic interval with two cells inside the support"))
}

/// `[w]_{A_p↑} = sup ⟨w⟩_{I⁺} ⟨w^(−1/(p−1))⟩_{I⁻}^(p−1)`.
pub fn ap_up(w: &Weight, p: f64, restrict: Option<CellRange>) -> Result<f64> {
    ap_up_on(w, p, restrict, &default_lattices(w.grid()))
}

pub fn ap_up_on(w: &Weight, p: f64, restrict: Option<CellRange>, lattices: &[Lattice]) -> Result<f64> {
    scan(w, p, restrict, lattices, Pairing::Up)
}

/// `[w]_{A_p↓}`: the halves exchanged.
pub fn ap_down(w: &Weight, p: f64, restrict: Option<CellRange>) -> Result<f64> {
    scan(w, p, restrict, &default_lattices(w.grid()), Pairing::Down)
}

/// Classical `[w]_{A_p}` over the same interval family.
pub fn ap_classical(w: &Weight, p: f64, restrict: Option<CellRange>) -> Result<f64> {
    scan(w, p, restrict, &default_lattices(w.grid()), Pairing::Classical)
}

/// `sup μ(Q⁻) ν(Q⁺) / (|Q⁻| |Q⁺|)`, which is `[w]_{A₂↑}` written in the measures.
pub fn joint_characteristic(mp: &MeasurePair) -> Result<f64> {
    joint_characteristic_on(mp, &default_lattices(mp.grid()), Direction::Up)
}

/// `[μ, ν]_{A₂↓}`.
pub fn joint_characteristic_down(mp: &MeasurePair) -> Result<f64> {
    joint_characteristic_on(mp, &default_lattices(mp.grid()), Direction::Down)
}

pub fn joint_characteristic_on(mp: &MeasurePair, lattices: &[Lattice], dir: Direction) -> Result<f64> {
    let cw = mp.grid().cell_width();
    let mut best: Option<f64> = None;
    for lat in lattices {
        let sm = DyadicSums::new(mp.mu(), *lat);
        let sn = DyadicSums::new(mp.nu(), *lat);
        for iv in intervals_within(mp.support(), core::slice::from_ref(lat), 1) {
            let (lo, hi) = iv.halves()?;
            let half = lo.len_cells() as f64 * cw;
            let v = match dir {
                Direction::Up => sm.at(&lo) * sn.at(&hi),
                Direction::Down => sm.at(&hi) * sn.at(&lo),
            } / (half * half);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best.ok_or(Error::NoAdmissibleInterval("no dyadic interval with two cells inside the support"))
}

fn check_positive(w: &Weight, i0: CellRange) -> Result<()> {
    if i0.is_empty() || i0.end > w.values().len() {
        return Err(Error::Domain("ambient interval must be a nonempty range of grid cells"));
    }
    match i0.cells().find(|&i| w.values()[i] <= 0.0) {
        Some(cell) => Err(Error::InvalidWeight { cell, reason: "must be positive on the ambient interval" }),
        None => Ok(()),
    }
}

/// `[w]_{A₁↑(I₀)} = sup_{x ∈ I₀} M↓_{I₀} w(x) / w(x)`.
pub fn a1_up_local(w: &Weight, i0: CellRange) -> Result<f64> {
    check_positive(w, i0)?;
    let m = max_down(w.values(), i0);
    Ok(m.iter().zip(&w.values()[i0.cells()]).fold(0.0, |acc, (a, b)| acc.max(a / b)))
}

/// The same characteristic from the three-point form: the supremum over
/// cells `c <= x <= d` of `(Σ_{x..=d} w) / (d − c + 1)` divided by
/// `min_{c <= y <= x} w`. Cubic in the number of cells.
pub fn a1_cxd(w: &Weight, i0: CellRange) -> Result<f64> {
    check_positive(w, i0)?;
    let v = w.values();
    let p = PrefixSums::new(v);
    let mut best: f64 = 0.0;
    #[allow(clippy::needless_range_loop)]
    for c in i0.cells() {
        let mut low = f64::INFINITY;
        for x in c..i0.end {
            low = low.min(v[x]);
            for d in x..i0.end {
                let s = p.sum(CellRange::new(x, d + 1));
                best = best.max(s / (d + 1 - c) as f64 / low);
            }
        }
    }
    Ok(best)
}

/// `[w]_{A_p↑(I₀)}`: the smallest `C` with
/// `(∫_x^d w)(∫_c^x w^(−1/(p−1)))^(p−1) <= C (d − c)^p` over cell edges
/// `c < x < d` inside `I₀`. Cubic in the number of cells.
pub fn ap_up_local(w: &Weight, p: f64, i0: CellRange) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain("exponent must exceed 1"));
    }
    check_positive(w, i0)?;
    let pw = PrefixSums::new(w.values());
    let ps = PrefixSums::new(&dual_power(w, p));
    let q = p - 1.0;
    let mut best: f64 = 0.0;
    for c in i0.start..i0.end {
        for x in c + 1..i0.end {
            let lower = ps.sum(CellRange::new(c, x)).powf(q);
            for d in x + 1..=i0.end {
                let upper = pw.sum(CellRange::new(x, d));
                best = best.max(upper * lower / ((d - c) as f64).powf(p));
            }
        }
    }
    Ok(best)
}
