//! Carleson coefficients `a_S^j` of a sparse tree and the Poisson decay of
//! `T_μ χ_{S∖I}` against Haar functions deep inside `I`.

use alloc::vec;
use alloc::vec::Vec;

use super::haar::{haar_project, HaarSystem};
use super::pivotal::to_cells;
use super::sparse::SparseTree;
use crate::dyadic::{CellRange, DyadicInterval, Lattice};
use crate::error::{Error, Result};
use crate::operators::matrix::{Flavor, OperatorMatrix};
use crate::operators::{lower_upper_components, poisson_average_on};
use crate::weights::MeasurePair;
#[allow(unused_imports)]
use num_traits::Float;

fn require_weighted(t_mu: &OperatorMatrix, n: usize) -> Result<()> {
    if t_mu.flavor() != Flavor::MuWeighted {
        return Err(Error::Domain("Carleson sums take the μ-weighted matrix"));
    }
    if t_mu.n() != n {
        return Err(Error::LengthMismatch { expected: n, got: t_mu.n() });
    }
    Ok(())
}

/// `T_μ χ_E` on the cells of `rows`, zero elsewhere.
fn apply_indicator(t_mu: &OperatorMatrix, e: &[CellRange], rows: CellRange) -> Vec<f64> {
    let a = t_mu.entries();
    let mut out = vec![0.0; t_mu.n()];
    for i in rows.cells() {
        let row = a.row(i);
        out[i] = e.iter().map(|r| row[r.cells()].iter().sum::<f64>()).sum();
    }
    out
}

/// `a_S^j = ∑_{S′⊆S, r(S′,S)=j} ‖P^ν_{𝒟(S′)} T_μ χ_{Ŝ∖S}‖²_ν` with the Haar
/// system of `ν` on `lattice`.
pub fn carleson_a(s: usize, j: usize, t_mu: &OperatorMatrix, tree: &SparseTree, mp: &MeasurePair, lattice: Lattice) -> Result<f64> {
    require_weighted(t_mu, mp.nu().len())?;
    let node = tree.nodes.get(s).ok_or(Error::Domain("node index out of range"))?;
    let parent = node.parent.ok_or(Error::Domain("the root has no parent in the tree"))?;
    let sc = to_cells(&node.interval, mp)?;
    let pc = to_cells(&tree.nodes[parent].interval, mp)?;
    let (lower, upper) = lower_upper_components(pc, sc)?;
    let targets = tree.at_distance(s, j);
    if targets.is_empty() {
        return Ok(0.0);
    }
    let phi = apply_indicator(t_mu, &[lower, upper], sc);
    let haar = HaarSystem::new(&phi, mp.nu(), lattice)?;
    targets.iter().map(|&q| Ok(haar.energy_within(to_cells(&tree.nodes[q].interval, mp)?))).sum()
}

/// For each node `I`: `∑_{S: Ŝ⊆I} a_S^j / (2^{−jε} K μ(I))` with `K` the
/// tree's pivotal constant.
pub fn carleson_ratios(j: usize, t_mu: &OperatorMatrix, tree: &SparseTree, mp: &MeasurePair, eps: f64) -> Result<Vec<f64>> {
    let lattice = tree.root().interval.lattice();
    let mut acc = vec![0.0; tree.len()];
    for s in 1..tree.len() {
        let p = tree.nodes[s].parent.expect("non-root node has a parent");
        acc[p] += carleson_a(s, j, t_mu, tree, mp, lattice)?;
    }
    // Bottom-up: a parent collects everything below its children too.
    for s in (1..tree.len()).rev() {
        let p = tree.nodes[s].parent.expect("non-root node has a parent");
        acc[p] += acc[s];
    }
    let scale = (-(j as f64) * eps).exp2() * tree.pivotal;
    Ok(acc.iter().zip(&tree.nodes).map(|(a, n)| a / (scale * n.mu_mass)).collect())
}

/// `|⟨T_μ χ_{S∖I}, Δ_J^ν g⟩_ν| / (ν(J)^{1/2} ‖Δ_J^ν g‖_ν (ℓ(J)/ℓ(I))^{ε/2} 𝒫_{I_in}(χ_{𝓛(S∖I)} dμ))`
/// for `J` inside a child `I_in` of `I ⊆ S`.
///
/// Returns zero when both sides vanish and infinity when only the bound does.
pub fn poisson_decay_ratio(
    t_mu: &OperatorMatrix,
    mp: &MeasurePair,
    s: CellRange,
    i: &DyadicInterval,
    j: &DyadicInterval,
    g: &[f64],
    eps: f64,
) -> Result<f64> {
    let n = mp.nu().len();
    require_weighted(t_mu, n)?;
    if g.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: g.len() });
    }
    let ic = to_cells(i, mp)?;
    let jc = to_cells(j, mp)?;
    let (lo, hi) = i.halves()?;
    let inner = if lo.contains(j) {
        lo
    } else if hi.contains(j) {
        hi
    } else {
        return Err(Error::NotContained { inner_start: jc.start, inner_end: jc.end, outer_start: ic.start, outer_end: ic.end });
    };
    let (lower, upper) = lower_upper_components(s, ic)?;
    let phi = apply_indicator(t_mu, &[lower, upper], jc);
    let dj = haar_project(g, j, mp.nu())?;
    let nu = mp.nu();
    let lhs = jc.cells().map(|x| nu[x] * phi[x] * dj.values[x]).sum::<f64>().abs();
    let norm = jc.cells().map(|x| nu[x] * dj.values[x] * dj.values[x]).sum::<f64>().sqrt();
    let nu_j: f64 = nu[jc.cells()].iter().sum();
    let ratio = (j.len_cells() as f64 / i.len_cells() as f64).powf(0.5 * eps);
    let p = poisson_average_on(to_cells(&inner, mp)?, mp.grid(), mp.mu(), lower, eps);
    let rhs = nu_j.sqrt() * norm * ratio * p;
    Ok(if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::pivotal::pivotal_constant;
    use crate::analysis::sparse::build_sparse;
    use crate::dyadic::{delta_from_eps, Grid};
    use crate::operators::{discretize, CausalHilbert, ZeroKernel};
    use crate::weights::{family_generate, Weight, WeightKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(beta: f64, seed: u64, mult: f64) -> (MeasurePair, SparseTree, Grid) {
        let g = Grid::unit(7).unwrap();
        let w = family_generate(&g, WeightKind::RandomDyadic { beta }, seed).unwrap();
        let mp = MeasurePair::from_weight(&w);
        let k = pivotal_constant(&mp, g.whole(), Lattice::standard(), 1.0).unwrap();
        let t = build_sparse(&Lattice::standard().interval(7, 0), k, mult, &mp, 1.0).unwrap();
        (mp, t, g)
    }

    #[test]
    fn zero_operator_and_far_distances() {
        let (mp, tree, g) = setup(8.0, 1, 0.05);
        assert!(tree.len() > 1);
        let zero = discretize(&ZeroKernel, &g, 1).unwrap().mu_weighted(&mp).unwrap();
        let hil = discretize(&CausalHilbert, &g, 1).unwrap().mu_weighted(&mp).unwrap();
        let lat = Lattice::standard();
        for s in 1..tree.len() {
            assert_eq!(carleson_a(s, 0, &zero, &tree, &mp, lat).unwrap(), 0.0);
            assert_eq!(carleson_a(s, tree.depth() + 1, &hil, &tree, &mp, lat).unwrap(), 0.0);
        }
        assert!(carleson_a(0, 0, &hil, &tree, &mp, lat).is_err());
        let plain = discretize(&CausalHilbert, &g, 1).unwrap();
        assert!(carleson_a(1, 0, &plain, &tree, &mp, lat).is_err());
    }

    #[test]
    fn coefficient_is_a_variance() {
        let (mp, tree, g) = setup(8.0, 2, 0.05);
        let hil = discretize(&CausalHilbert, &g, 1).unwrap().mu_weighted(&mp).unwrap();
        for s in 1..tree.len() {
            let a = carleson_a(s, 0, &hil, &tree, &mp, Lattice::standard()).unwrap();
            let sc = to_cells(&tree.nodes[s].interval, &mp).unwrap();
            let pc = to_cells(&tree.nodes[tree.nodes[s].parent.unwrap()].interval, &mp).unwrap();
            let mut chi = vec![0.0; g.n()];
            for k in pc.cells().filter(|k| !sc.contains_cell(*k)) {
                chi[k] = 1.0;
            }
            let phi = hil.apply(&chi);
            let nu = mp.nu();
            let m: f64 = sc.cells().map(|k| nu[k]).sum();
            let avg: f64 = sc.cells().map(|k| nu[k] * phi[k]).sum::<f64>() / m;
            let var: f64 = sc.cells().map(|k| nu[k] * (phi[k] - avg).powi(2)).sum();
            assert!((a - var).abs() <= 1e-9 * var.max(1e-12), "{a} {var}");
        }
    }

    #[test]
    fn carleson_ratios_are_finite() {
        let (mp, tree, g) = setup(4.0, 5, 0.05);
        let hil = discretize(&CausalHilbert, &g, 1).unwrap().mu_weighted(&mp).unwrap();
        for j in 0..3 {
            let r = carleson_ratios(j, &hil, &tree, &mp, 1.0).unwrap();
            assert_eq!(r.len(), tree.len());
            assert!(r.iter().all(|x| x.is_finite() && *x >= 0.0));
        }
    }

    #[test]
    fn poisson_decay_is_bounded() {
        let g = Grid::unit(8).unwrap();
        let w = Weight::from_fn(&g, |x| (1.5 * x).exp(), None).unwrap();
        let mp = MeasurePair::from_weight(&w);
        let hil = discretize(&CausalHilbert, &g, 1).unwrap().mu_weighted(&mp).unwrap();
        let lat = Lattice::standard();
        let delta = delta_from_eps(1.0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = g.whole();
        let mut worst: f64 = 0.0;
        let mut seen = 0;
        for _ in 0..4000 {
            let li = rng.gen_range(4..8u32);
            let i = lat.containing(li, rng.gen_range(0..256));
            let lj = rng.gen_range(1..=li - 2);
            let j = lat.containing(lj, rng.gen_range(i.start()..i.end()));
            // Only the separation from the boundary of I enters the bound.
            let sep = (j.start() - i.start()).min(i.end() - j.end()) as f64;
            if sep < (delta * lj as f64 + (1.0 - delta) * li as f64).exp2() {
                continue;
            }
            let gv: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = poisson_decay_ratio(&hil, &mp, s, &i, &j, &gv, 1.0).unwrap();
            assert!(r.is_finite());
            worst = worst.max(r);
            seen += 1;
        }
        assert!(seen > 50, "{seen}");
        assert!(worst < 50.0, "{worst}");
    }
}
