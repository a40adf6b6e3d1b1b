//! The causal pivotal condition and the stopping rule built on it.

use alloc::vec;
use alloc::vec::Vec;

use crate::dyadic::{CellRange, DyadicInterval, Lattice};
use crate::error::{Error, Result};
use crate::operators::{lower_upper_components, poisson_average_on};
use crate::weights::MeasurePair;

pub const DEFAULT_STOP_MULTIPLIER: f64 = 100.0;

fn mass(v: &[f64], r: CellRange) -> f64 {
    v[r.cells()].iter().sum()
}

pub(crate) fn to_cells(iv: &DyadicInterval, mp: &MeasurePair) -> Result<CellRange> {
    iv.cells(mp.grid()).ok_or(Error::NotContained {
        inner_start: iv.start().max(0) as usize,
        inner_end: iv.end().max(0) as usize,
        outer_start: 0,
        outer_end: mp.grid().n(),
    })
}

/// `[𝒫_Q(χ_{𝓛(I∖Q)} dμ)]² ν(Q)`.
pub fn pivotal_term(i: CellRange, q: CellRange, mp: &MeasurePair, eps: f64) -> Result<f64> {
    let (lower, _) = lower_upper_components(i, q)?;
    if lower.is_empty() {
        return Ok(0.0);
    }
    let p = poisson_average_on(q, mp.grid(), mp.mu(), lower, eps);
    Ok(p * p * mass(mp.nu(), q))
}

/// `∑_α [𝒫_{I_α}(χ_{𝓛(I∖I_α)} dμ)]² ν(I_α) / μ(I)` for disjoint `I_α ⊆ I`.
pub fn pivotal_ratio(i: CellRange, family: &[CellRange], mp: &MeasurePair, eps: f64) -> Result<f64> {
    let mut sorted = family.to_vec();
    sorted.sort_by_key(|r| r.start);
    for w in sorted.windows(2) {
        if w[0].overlaps(&w[1]) {
            return Err(Error::Domain("pivotal family must be pairwise disjoint"));
        }
    }
    let mu_i = mass(mp.mu(), i);
    if !(mu_i > 0.0) {
        return Err(Error::ZeroMass("pivotal ratio on an interval without μ-mass"));
    }
    let mut total = 0.0;
    for q in &sorted {
        total += pivotal_term(i, *q, mp, eps)?;
    }
    Ok(total / mu_i)
}

/// Best pivotal sum over disjoint dyadic families inside `i`, with the
/// maximizing family.
pub fn pivotal_best_family(i: &DyadicInterval, mp: &MeasurePair, eps: f64) -> Result<(f64, Vec<DyadicInterval>)> {
    let ic = to_cells(i, mp)?;
    // best(Q) = max(v(Q), best(Q⁻) + best(Q⁺)), by post-order over the subtree.
    fn go(q: DyadicInterval, ic: CellRange, mp: &MeasurePair, eps: f64, out: &mut Vec<DyadicInterval>) -> Result<f64> {
        let qc = to_cells(&q, mp)?;
        let v = pivotal_term(ic, qc, mp, eps)?;
        if q.level == 0 {
            if v > 0.0 {
                out.push(q);
            }
            return Ok(v);
        }
        let (lo, hi) = q.halves()?;
        let mark = out.len();
        let split = go(lo, ic, mp, eps, out)? + go(hi, ic, mp, eps, out)?;
        if v >= split {
            out.truncate(mark);
            if v > 0.0 {
                out.push(q);
            }
            Ok(v)
        } else {
            Ok(split)
        }
    }
    let mut fam = Vec::new();
    if i.level == 0 {
        return Ok((0.0, fam));
    }
    let (lo, hi) = i.halves()?;
    let best = go(lo, ic, mp, eps, &mut fam)? + go(hi, ic, mp, eps, &mut fam)?;
    Ok((best, fam))
}

/// `K = sup_I sup_{families} pivotal_ratio` over the dyadic intervals of
/// `lattice` inside `range` with positive μ-mass. The inner supremum over
/// disjoint dyadic families is exact.
pub fn pivotal_constant(mp: &MeasurePair, range: CellRange, lattice: Lattice, eps: f64) -> Result<f64> {
    let range = range.intersect(&mp.support());
    let ivs = crate::dyadic::intervals_within(range, core::slice::from_ref(&lattice), 1);
    if ivs.is_empty() {
        return Err(Error::NoAdmissibleInterval("no dyadic interval for the pivotal constant"));
    }
    let mut k: f64 = 0.0;
    for iv in ivs {
        let mu = mass(mp.mu(), to_cells(&iv, mp)?);
        if mu > 0.0 {
            k = k.max(pivotal_best_family(&iv, mp, eps)?.0 / mu);
        }
    }
    Ok(k)
}

/// A stopping interval with its `e:stop` ratio `[𝒫_Q(χ_{𝓛(S∖Q)}dμ)]² ν(Q) / μ(Q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingChild {
    pub interval: DyadicInterval,
    pub value: f64,
}

/// The maximal `Q ⊊ S` with `[𝒫_Q(χ_{𝓛(S∖Q)}dμ)]² ν(Q) >= multiplier·K·μ(Q)`.
/// Intervals without μ-mass are never selected.
pub fn stopping_children(s: &DyadicInterval, k: f64, multiplier: f64, mp: &MeasurePair, eps: f64) -> Result<Vec<StoppingChild>> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain("stopping constant must be positive"));
    }
    if !(multiplier > 0.0 && multiplier.is_finite()) {
        return Err(Error::Domain("stopping multiplier must be positive"));
    }
    let sc = to_cells(s, mp)?;
    let threshold = multiplier * k;
    let mut out = Vec::new();
    let mut stack = vec![];
    if s.level > 0 {
        let (lo, hi) = s.halves()?;
        stack.push(hi);
        stack.push(lo);
    }
    while let Some(q) = stack.pop() {
        let qc = to_cells(&q, mp)?;
        let mu = mass(mp.mu(), qc);
        if mu > 0.0 {
            let value = pivotal_term(sc, qc, mp, eps)? / mu;
            if value >= threshold {
                out.push(StoppingChild { interval: q, value });
                continue;
            }
        }
        if q.level > 0 {
            let (lo, hi) = q.halves()?;
            stack.push(hi);
            stack.push(lo);
        }
    }
    Ok(out)
}
