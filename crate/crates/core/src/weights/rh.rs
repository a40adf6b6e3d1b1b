//! Reverse Hölder for localized `A₁` weights.

use alloc::vec::Vec;

use crate::dyadic::CellRange;
use crate::error::{Error, Result};
use crate::operators::maximal::{max_down, max_down_r, super_level_components};
use crate::weights::{a1_up_local, Weight};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhReport {
    /// `[w]_{A₁↑(I₀)}`.
    pub characteristic: f64,
    /// `1 + 1/(C [w])`.
    pub r: f64,
    /// `M↓_{I₀}(wχ_I)` at the left end of `I`.
    pub lambda0: f64,
    /// `∫_I w^r`.
    pub lhs: f64,
    /// `2 λ₀^(r−1) ∫_I w`.
    pub rhs: f64,
    pub holds: bool,
    /// `sup_x M↓_{I₀,r}(wχ_I)(x) / M↓_{I₀}(wχ_I)(x)`; the pointwise form needs `<= 2`.
    pub pointwise_ratio: f64,
    pub pointwise_holds: bool,
    /// `sup_x M↓_{I₀}(wχ_I)(x) / ([w] w(x))`, at most 1 by definition.
    pub a1_ratio: f64,
}

fn masked(w: &Weight, i: CellRange) -> Vec<f64> {
    w.values().iter().enumerate().map(|(k, v)| if i.contains_cell(k) { *v } else { 0.0 }).collect()
}

fn check_inside(i: CellRange, i0: CellRange) -> Result<()> {
    if i.is_empty() || !i0.contains(&i) {
        return Err(Error::NotContained { inner_start: i.start, inner_end: i.end, outer_start: i0.start, outer_end: i0.end });
    }
    Ok(())
}

/// Both sides of the reverse Hölder inequality on `I ⊆ I₀` for the constant `c`.
pub fn reverse_holder_verify(w: &Weight, i: CellRange, i0: CellRange, c: f64) -> Result<RhReport> {
    check_inside(i, i0)?;
    if !(c > 0.0) {
        return Err(Error::Domain("reverse Hölder constant must be positive"));
    }
    let characteristic = a1_up_local(w, i0)?;
    rh_with(w, i, i0, c, characteristic)
}

fn rh_with(w: &Weight, i: CellRange, i0: CellRange, c: f64, characteristic: f64) -> Result<RhReport> {
    let cw = w.grid().cell_width();
    let r = 1.0 + 1.0 / (c * characteristic);
    let chi = masked(w, i);
    let m1 = max_down(&chi, i0);
    let mr = max_down_r(&chi, i0, r);
    let lambda0 = m1[i.start - i0.start];
    let vals = &w.values()[i.cells()];
    let lhs = vals.iter().map(|v| v.powf(r)).sum::<f64>() * cw;
    let mass = vals.iter().sum::<f64>() * cw;
    let rhs = 2.0 * lambda0.powf(r - 1.0) * mass;
    let mut pointwise_ratio: f64 = 0.0;
    let mut a1_ratio: f64 = 0.0;
    for (k, x) in i0.cells().enumerate() {
        if m1[k] > 0.0 {
            pointwise_ratio = pointwise_ratio.max(mr[k] / m1[k]);
        }
        a1_ratio = a1_ratio.max(m1[k] / (characteristic * w.values()[x]));
    }
    Ok(RhReport {
        characteristic,
        r,
        lambda0,
        lhs,
        rhs,
        holds: lhs <= rhs,
        pointwise_ratio,
        pointwise_holds: pointwise_ratio <= 2.0,
        a1_ratio,
    })
}

/// Components of `{x ∈ I : M↓_{I₀}(wχ_I)(x) > λ}`.
pub fn rh_level_components(w: &Weight, i: CellRange, i0: CellRange, lambda: f64) -> Result<Vec<CellRange>> {
    check_inside(i, i0)?;
    let chi = masked(w, i);
    let m = max_down(&chi, i0);
    let inside = &m[i.start - i0.start..i.end - i0.start];
    Ok(super_level_components(inside, i.start, lambda))
}

const BISECT_LO: f64 = 1e-4;
const BISECT_HI: f64 = 1e8;
const BISECT_STEPS: usize = 80;

/// Smallest `C` (to bisection accuracy) for which both forms hold on every
/// interval in `intervals`. Returns the upper end of the final bracket, so
/// the returned constant itself passes.
pub fn rh_smallest_constant(w: &Weight, i0: CellRange, intervals: &[CellRange]) -> Result<f64> {
    for i in intervals {
        check_inside(*i, i0)?;
    }
    let characteristic = a1_up_local(w, i0)?;
    let passes = |c: f64| -> Result<bool> {
        for i in intervals {
            let rep = rh_with(w, *i, i0, c, characteristic)?;
            if !(rep.holds && rep.pointwise_holds) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if passes(BISECT_LO)? {
        return Ok(BISECT_LO);
    }
    if !passes(BISECT_HI)? {
        return Err(Error::Internal("reverse Hölder fails even for a huge constant"));
    }
    let (mut lo, mut hi) = (BISECT_LO.ln(), BISECT_HI.ln());
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if passes(mid.exp())? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{intervals_within, Grid, Lattice};
    use proptest::prelude::*;

    #[test]
    fn constant_weight_holds() {
        let g = Grid::unit(6).unwrap();
        let w = Weight::constant(&g, 1.0);
        for c in [0.01, 1.0, 100.0] {
            let rep = reverse_holder_verify(&w, CellRange::new(8, 24), g.whole(), c).unwrap();
            assert!(rep.holds && rep.pointwise_holds);
            assert!((rep.lhs - 16.0 * g.cell_width()).abs() < 1e-12);
            assert!((rep.rhs - 2.0 * rep.lhs).abs() < 1e-12);
        }
        assert!(reverse_holder_verify(&w, CellRange::new(60, 70), g.whole(), 1.0).is_err());
    }

    #[test]
    fn bisection_on_exponential() {
        let g = Grid::unit(8).unwrap();
        let w = Weight::from_fn(&g, |x| (-x).exp(), None).unwrap();
        let ivs: Vec<CellRange> = intervals_within(g.whole(), &[Lattice::standard()], 0).iter().map(|iv| iv.cells(&g).unwrap()).collect();
        let c0 = rh_smallest_constant(&w, g.whole(), &ivs).unwrap();
        assert!(c0 > 0.0 && c0.is_finite());
        for i in &ivs {
            let rep = reverse_holder_verify(&w, *i, g.whole(), c0).unwrap();
            assert!(rep.holds && rep.pointwise_holds && rep.a1_ratio <= 1.0);
        }
    }

    proptest! {
        #[test]
        fn level_components_average_near_lambda(v in proptest::collection::vec(-3.0f64..3.0, 64), s in 0usize..24, len in 8usize..40, t in 1.0f64..4.0) {
            let g = Grid::unit(6).unwrap();
            let w = Weight::new(&g, v.into_iter().map(f64::exp).collect(), None).unwrap();
            let i = CellRange::new(s, s + len);
            let rep = reverse_holder_verify(&w, i, g.whole(), 1.0).unwrap();
            let lambda = rep.lambda0 * t;
            for comp in rh_level_components(&w, i, g.whole(), lambda).unwrap() {
                prop_assert!(comp.start > i.start);
                let avg = w.values()[comp.cells()].iter().sum::<f64>() / comp.len() as f64;
                prop_assert!(avg > lambda * (1.0 - 1e-12));
                prop_assert!(avg <= lambda * (1.0 + 1.0 / comp.len() as f64) * (1.0 + 1e-12));
            }
        }
    }
}
