//! The averaging lemma and the picture bound behind it.

use alloc::vec::Vec;

use super::pivotal::to_cells;
use crate::dyadic::{CellRange, DyadicInterval, Lattice};
use crate::error::{Error, Result};
use crate::operators::kernel::Direction;
use crate::sums::PrefixSums;
use crate::weights::MeasurePair;
#[allow(unused_imports)]
use num_traits::Float;

/// Intervals of `lattice` at `level` inside `ℍ`, left to right. The
/// coefficient vector of [`lemma_avg_ratio`] is indexed by this list.
pub fn avg_intervals(mp: &MeasurePair, lattice: Lattice, level: u32) -> Vec<DyadicInterval> {
    lattice.intervals_in(level, mp.support()).collect()
}

/// `∑_{ℓ(J)=2^k} ν(J) (∑_{I<J, ℓ(I)=2^{k−n}} μ(I)^{1/2} ℓ(J)^ε/(dist(I,J)+ℓ(J))^{1+ε} a_I)² / ∑ a_I²`.
///
/// `level_j` is the level of `J` in cells; the `I` live `n` levels finer.
/// `Direction::Down` gives the mirrored sum over `I > J`.
pub fn lemma_avg_ratio(level_j: u32, n: u32, a: &[f64], mp: &MeasurePair, lattice: Lattice, eps: f64, dir: Direction) -> Result<f64> {
    let level_i = level_j.checked_sub(n).ok_or(Error::Domain("the small intervals must have at least one cell"))?;
    let is = avg_intervals(mp, lattice, level_i);
    if a.len() != is.len() {
        return Err(Error::LengthMismatch { expected: is.len(), got: a.len() });
    }
    let norm2: f64 = a.iter().map(|x| x * x).sum();
    if !(norm2 > 0.0) {
        return Err(Error::ZeroMass("averaging lemma with zero coefficients"));
    }
    let cw = mp.grid().cell_width();
    let pm = PrefixSums::new(mp.mu());
    let pn = PrefixSums::new(mp.nu());
    let sqrt_mu: Vec<f64> = is.iter().map(|i| Ok(pm.sum(to_cells(i, mp)?).sqrt())).collect::<Result<_>>()?;
    let ell = (1u64 << level_j) as f64 * cw;
    let mut total = 0.0;
    for j in avg_intervals(mp, lattice, level_j) {
        let mut b = 0.0;
        for (k, i) in is.iter().enumerate() {
            if a[k] == 0.0 {
                continue;
            }
            let ordered = match dir {
                Direction::Up => i.is_below(&j),
                Direction::Down => j.is_below(i),
            };
            if ordered {
                let dist = i.gap(&j) as f64 * cw;
                b += sqrt_mu[k] * ell.powf(eps) / (dist + ell).powf(1.0 + eps) * a[k];
            }
        }
        total += pn.sum(to_cells(&j, mp)?) * b * b;
    }
    Ok(total / norm2)
}

/// `∫_{Q⁺} ∫_{[x−ℓ(Q)/2, x)} dμ(y) dν(x) / ℓ(Q)²`.
///
/// The region splits into `Q⁻ × Q⁺` and the pairs `y < x` inside `Q⁺`, so it
/// is covered by squares `Q′⁻ × Q′⁺` with `Q′ ⊆ Q` dyadic of total area
/// `3/8 ℓ(Q)²`.
pub fn picture_integral(q: &DyadicInterval, mp: &MeasurePair) -> Result<f64> {
    let qc = to_cells(q, mp)?;
    let (_, hi) = qc.halves()?;
    let h = hi.len();
    let pm = PrefixSums::new(mp.mu());
    let mut total = 0.0;
    for i in hi.cells() {
        total += mp.nu()[i] * pm.sum(CellRange::new(i - h, i));
    }
    let ell = qc.len() as f64 * mp.grid().cell_width();
    Ok(total / (ell * ell))
}

/// `max_Q picture_integral(Q) / [μ,ν]_{A₂↑}` over the dyadic intervals of the
/// default lattices inside `ℍ`, with `[μ,ν]_{A₂↑}` taken over the same family.
pub fn picture_bound_ratio(mp: &MeasurePair) -> Result<f64> {
    let lats = crate::dyadic::default_lattices(mp.grid());
    let c = crate::weights::joint_characteristic(mp)?;
    let mut best: f64 = 0.0;
    for q in crate::dyadic::intervals_within(mp.support(), &lats, 1) {
        best = best.max(picture_integral(&q, mp)?);
    }
    Ok(best / c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Grid;
    use crate::weights::{joint_characteristic, standard_corpus, Weight};
    use alloc::vec;

    #[test]
    fn single_term_by_hand() {
        let g = Grid::unit(4).unwrap();
        let mp = MeasurePair::from_weight(&Weight::constant(&g, 1.0));
        let cw = g.cell_width();
        // J at level 2 (four cells), I at level 1 (two cells): put mass on I = [2, 4).
        let mut a = vec![0.0; 8];
        a[1] = 1.0;
        let r = lemma_avg_ratio(2, 1, &a, &mp, Lattice::standard(), 1.0, Direction::Up).unwrap();
        let ell = 4.0 * cw;
        // J ∈ {[4,8), [8,12), [12,16)} at gaps 0, 4, 8 cells.
        let expected: f64 = [0.0, 4.0, 8.0]
            .iter()
            .map(|gap| {
                let b = (2.0 * cw).sqrt() * ell / (gap * cw + ell).powi(2);
                4.0 * cw * b * b
            })
            .sum();
        assert!((r - expected).abs() < 1e-14, "{r} {expected}");
        // Mirrored: only J = [0, 4) lies below I.
        let r = lemma_avg_ratio(2, 1, &a, &mp, Lattice::standard(), 1.0, Direction::Down).unwrap();
        assert_eq!(r, 0.0);
        assert!(lemma_avg_ratio(2, 1, &[0.0; 8], &mp, Lattice::standard(), 1.0, Direction::Up).is_err());
        assert!(lemma_avg_ratio(2, 1, &[1.0; 3], &mp, Lattice::standard(), 1.0, Direction::Up).is_err());
    }

    #[test]
    fn picture_flat_weight() {
        let g = Grid::unit(6).unwrap();
        let mp = MeasurePair::from_weight(&Weight::constant(&g, 1.0));
        let q = Lattice::standard().interval(4, 1);
        // dμ dν = dx dy on a region of area ℓ²/4.
        assert!((picture_integral(&q, &mp).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn picture_bound_on_corpus() {
        let g = Grid::unit(7).unwrap();
        for e in standard_corpus(&g, 24, 5).unwrap() {
            let mp = MeasurePair::from_weight(&e.weight);
            let r = picture_bound_ratio(&mp).unwrap();
            assert!(r <= 0.375 * (1.0 + 1e-12), "{} {r}", e.id);
            assert!(joint_characteristic(&mp).unwrap() > 0.0);
        }
    }
}
