//! Sparse stopping trees.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::pivotal::{stopping_children, to_cells};
use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};
use crate::weights::MeasurePair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseNode {
    pub interval: DyadicInterval,
    /// Index of `Ŝ`; `None` for the root.
    pub parent: Option<usize>,
    /// `k` with `S ∈ 𝒮_k`; the root has generation 0.
    pub generation: usize,
    /// The stopping ratio that selected the node; zero for the root.
    pub stopping_value: f64,
    pub mu_mass: f64,
}

/// Nodes in breadth-first order, so every parent precedes its children.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTree {
    pub nodes: Vec<SparseNode>,
    pub children: Vec<Vec<usize>>,
    /// The pivotal constant `K` the tree was built with.
    pub pivotal: f64,
    pub multiplier: f64,
}

/// Worst ratios of the two structural inequalities over all nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseCheck {
    /// `max_S ∑_{Q∈𝒮(S)} μ(Q) / μ(S)`; sparsity needs `<= 1/2`.
    pub child_ratio: f64,
    /// `max_I ∑_{Q∈𝒮, Q⊆I} μ(Q) / μ(I)`; packing needs `<= 2`.
    pub pack_ratio: f64,
}

impl SparseCheck {
    pub fn holds(&self) -> bool {
        self.child_ratio <= 0.5 && self.pack_ratio <= 2.0
    }
}

impl SparseTree {
    pub fn root(&self) -> &SparseNode {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `multiplier·K`, the threshold of the stopping rule.
    pub fn stopping_constant(&self) -> f64 {
        self.multiplier * self.pivotal
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.generation).max().unwrap_or(0)
    }

    /// Tree distance `r(S′, S)`: the number of parent steps from `S′` up to
    /// `S`, or `None` if `S` is not an ancestor of `S′`.
    pub fn tree_distance(&self, descendant: usize, ancestor: usize) -> Option<usize> {
        let mut cur = descendant;
        let mut steps = 0;
        loop {
            if cur == ancestor {
                return Some(steps);
            }
            cur = self.nodes[cur].parent?;
            steps += 1;
        }
    }

    /// Descendants of `s` at tree distance exactly `j` (`j = 0` gives `s`).
    pub fn at_distance(&self, s: usize, j: usize) -> Vec<usize> {
        let mut layer = vec![s];
        for _ in 0..j {
            layer = layer.iter().flat_map(|&q| self.children[q].iter().copied()).collect();
        }
        layer
    }

    /// `∑_{Q∈𝒮, Q⊆S} μ(Q)` for every node, by a bottom-up pass.
    pub fn subtree_masses(&self) -> Vec<f64> {
        let mut acc: Vec<f64> = self.nodes.iter().map(|n| n.mu_mass).collect();
        for i in (1..self.nodes.len()).rev() {
            let p = self.nodes[i].parent.expect("non-root node has a parent");
            acc[p] += acc[i];
        }
        acc
    }

    pub fn check(&self) -> SparseCheck {
        let mut child_ratio: f64 = 0.0;
        for (i, kids) in self.children.iter().enumerate() {
            let s: f64 = kids.iter().map(|&c| self.nodes[c].mu_mass).sum();
            child_ratio = child_ratio.max(s / self.nodes[i].mu_mass);
        }
        let pack_ratio = self.subtree_masses().iter().zip(&self.nodes).fold(0.0f64, |m, (s, n)| m.max(s / n.mu_mass));
        SparseCheck { child_ratio, pack_ratio }
    }

    /// Parent links, generations, nesting and disjointness of siblings.
    pub fn is_consistent(&self) -> bool {
        if self.nodes.is_empty() || self.nodes[0].parent.is_some() || self.nodes[0].generation != 0 {
            return false;
        }
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            let Some(p) = n.parent else { return false };
            let pn = &self.nodes[p];
            if p >= i || n.generation != pn.generation + 1 || !pn.interval.contains(&n.interval) || pn.interval == n.interval {
                return false;
            }
            if !self.children[p].contains(&i) {
                return false;
            }
        }
        self.children.iter().all(|kids| {
            kids.iter().enumerate().all(|(a, &x)| kids[a + 1..].iter().all(|&y| !self.nodes[x].interval.overlaps(&self.nodes[y].interval)))
        })
    }
}

/// Iterates the stopping rule from `root` until no node has children.
pub fn build_sparse(root: &DyadicInterval, k: f64, multiplier: f64, mp: &MeasurePair, eps: f64) -> Result<SparseTree> {
    let rc = to_cells(root, mp)?;
    let mu = |c: crate::dyadic::CellRange| mp.mu()[c.cells()].iter().sum::<f64>();
    let root_mass = mu(rc);
    if !(root_mass > 0.0) {
        return Err(Error::ZeroMass("sparse tree root without μ-mass"));
    }
    let mut nodes = vec![SparseNode { interval: *root, parent: None, generation: 0, stopping_value: 0.0, mu_mass: root_mass }];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let node = nodes[s];
        if node.generation > root.level as usize {
            return Err(Error::Internal("stopping tree deeper than the grid"));
        }
        for c in stopping_children(&node.interval, k, multiplier, mp, eps)? {
            let idx = nodes.len();
            nodes.push(SparseNode {
                interval: c.interval,
                parent: Some(s),
                generation: node.generation + 1,
                stopping_value: c.value,
                mu_mass: mu(to_cells(&c.interval, mp)?),
            });
            children.push(Vec::new());
            children[s].push(idx);
            queue.push_back(idx);
        }
    }
    Ok(SparseTree { nodes, children, pivotal: k, multiplier })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::pivotal::{pivotal_constant, DEFAULT_STOP_MULTIPLIER};
    use crate::dyadic::{Grid, Lattice};
    use crate::weights::{family_generate, Weight, WeightKind};

    #[test]
    fn flat_weight_tree_is_the_root() {
        let g = Grid::unit(8).unwrap();
        let mp = MeasurePair::from_weight(&Weight::constant(&g, 2.0));
        let k = pivotal_constant(&mp, g.whole(), Lattice::standard(), 1.0).unwrap();
        let t = build_sparse(&Lattice::standard().interval(8, 0), k, DEFAULT_STOP_MULTIPLIER, &mp, 1.0).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.check().holds() && t.is_consistent());
        assert_eq!(t.tree_distance(0, 0), Some(0));
    }

    #[test]
    fn dyadic_weight_tree_invariants() {
        let g = Grid::unit(8).unwrap();
        for (beta, mult) in [(8.0, 2.0), (8.0, 0.05), (4.0, 0.05)] {
            let w = family_generate(&g, WeightKind::RandomDyadic { beta }, 3).unwrap();
            let mp = MeasurePair::from_weight(&w);
            let k = pivotal_constant(&mp, g.whole(), Lattice::standard(), 1.0).unwrap();
            let t = build_sparse(&Lattice::standard().interval(8, 0), k, mult, &mp, 1.0).unwrap();
            assert!(t.is_consistent());
            let c = t.check();
            // Chebyshev against the exact pivotal constant gives 1/multiplier.
            assert!(c.child_ratio <= 1.0 / mult, "{c:?}");
            if mult >= 2.0 {
                assert!(c.holds(), "{c:?}");
            }
            for i in 1..t.len() {
                let d = t.tree_distance(i, 0).unwrap();
                assert_eq!(d, t.nodes[i].generation);
                assert!(t.at_distance(0, d).contains(&i));
                assert_eq!(t.tree_distance(0, i), None);
            }
        }
    }
}
