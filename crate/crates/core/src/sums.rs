//! Cell sums over ranges and over dyadic trees.

use alloc::vec::Vec;

use crate::dyadic::{CellRange, DyadicInterval, Lattice};

/// Prefix sums `P[i] = Σ_{k<i} v[k]` for range sums in O(1).
#[derive(Debug, Clone)]
pub struct PrefixSums {
    p: Vec<f64>,
}

impl PrefixSums {
    pub fn new(values: &[f64]) -> Self {
        let mut p = Vec::with_capacity(values.len() + 1);
        let mut acc = 0.0;
        p.push(0.0);
        for v in values {
            acc += v;
            p.push(acc);
        }
        Self { p }
    }

    pub fn len(&self) -> usize {
        self.p.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sum(&self, range: CellRange) -> f64 {
        self.p[range.end] - self.p[range.start]
    }

    pub fn raw(&self) -> &[f64] {
        &self.p
    }
}

/// Sums over every dyadic interval of one lattice that fits in `[0, n)`.
///
/// Built bottom-up, so the sum over an interval is the floating-point sum of
/// the sums over its two halves. Inequalities between nested sums of
/// nonnegative values therefore hold exactly.
#[derive(Debug, Clone)]
pub struct DyadicSums {
    lattice: Lattice,
    /// Per level: index of the first stored interval, and the sums.
    levels: Vec<(i64, Vec<f64>)>,
}

impl DyadicSums {
    pub fn new(values: &[f64], lattice: Lattice) -> Self {
        let n = values.len();
        let whole = CellRange::new(0, n);
        let mut levels: Vec<(i64, Vec<f64>)> = Vec::new();
        let first0 = -lattice.shift();
        levels.push((first0, values.to_vec()));
        let mut k = 1;
        while (1usize << k) <= n {
            let mut ivs = lattice.intervals_in(k, whole).peekable();
            let Some(first) = ivs.peek().map(|i| i.index) else {
                break;
            };
            let (prev_first, prev) = &levels[k as usize - 1];
            let sums = ivs
                .map(|iv| {
                    let c = (2 * iv.index - prev_first) as usize;
                    prev[c] + prev[c + 1]
                })
                .collect();
            levels.push((first, sums));
            k += 1;
        }
        Self { lattice, levels }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    /// Highest level with at least one stored interval.
    pub fn max_level(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    /// Sum over `iv`, or `None` if `iv` is from another lattice or not fully
    /// inside the grid.
    pub fn get(&self, iv: &DyadicInterval) -> Option<f64> {
        if iv.shift != self.lattice.shift() {
            return None;
        }
        let (first, sums) = self.levels.get(iv.level as usize)?;
        let k = iv.index.checked_sub(*first)?;
        usize::try_from(k).ok().and_then(|k| sums.get(k).copied())
    }

    /// Same as [`get`](Self::get) but panics when the interval is not stored.
    pub fn at(&self, iv: &DyadicInterval) -> f64 {
        self.get(iv).expect("interval outside the dyadic sum table")
    }
}
