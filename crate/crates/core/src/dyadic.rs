//! Uniform grids, cell ranges, shifted dyadic lattices, goodness and the
//! classification of interval pairs.
//!
//! All combinatorics is done in integer cell coordinates. A lattice shift is a
//! whole number of cells, so every dyadic interval of every lattice is a union
//! of grid cells and all averages are exact cell sums.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Largest supported depth.
pub const MAX_DEPTH: u32 = 30;

/// Uniform partition of `[lo, hi)` into `2^m` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    lo: f64,
    hi: f64,
    m: u32,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, m: u32) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidGrid("endpoints must be finite"));
        }
        if !(lo < hi) {
            return Err(Error::InvalidGrid("need lo < hi"));
        }
        if m == 0 || m > MAX_DEPTH {
            return Err(Error::InvalidGrid("depth must satisfy 1 <= m <= 30"));
        }
        Ok(Self { lo, hi, m })
    }

    /// The grid on `[0, 1)` with `2^m` cells.
    pub fn unit(m: u32) -> Result<Self> {
        Self::new(0.0, 1.0, m)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        1usize << self.m
    }

    pub fn cell_width(&self) -> f64 {
        (self.hi - self.lo) / self.n() as f64
    }

    /// Left edge of cell `i` (or the right end of the grid for `i = n`).
    pub fn edge(&self, i: i64) -> f64 {
        self.lo + i as f64 * self.cell_width()
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.cell_width()
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n()).map(move |i| self.midpoint(i))
    }

    /// Cell containing `x`, if `x` lies in `[lo, hi)`.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        let i = ((x - self.lo) / self.cell_width()).floor() as usize;
        Some(i.min(self.n() - 1))
    }

    /// Number of cells whose midpoint lies strictly below `z`.
    pub fn cells_below(&self, z: f64) -> usize {
        let t = (z - self.lo) / self.cell_width() - 0.5;
        if t <= 0.0 {
            0
        } else {
            let c = t.ceil();
            if c >= self.n() as f64 {
                self.n()
            } else {
                c as usize
            }
        }
    }

    /// Physical length of `cells` cells.
    pub fn length(&self, cells: u64) -> f64 {
        cells as f64 * self.cell_width()
    }

    pub fn whole(&self) -> CellRange {
        CellRange::new(0, self.n())
    }
}

/// Half-open range of cells `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellRange {
    pub start: usize,
    pub end: usize,
}

impl CellRange {
    /// # Panics
    /// If `start > end`.
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start <= end, "CellRange start {start} exceeds end {end}");
        Self { start, end }
    }

    pub const EMPTY: CellRange = CellRange { start: 0, end: 0 };

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains_cell(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }

    pub fn contains(&self, other: &CellRange) -> bool {
        other.is_empty() || (self.start <= other.start && other.end <= self.end)
    }

    pub fn overlaps(&self, other: &CellRange) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Gap between the closed hulls, in cells.
    pub fn gap(&self, other: &CellRange) -> usize {
        other.start.saturating_sub(self.end).max(self.start.saturating_sub(other.end))
    }

    pub fn cells(&self) -> core::ops::Range<usize> {
        self.start..self.end
    }

    /// Lower and upper halves of a range with an even number of cells.
    pub fn halves(&self) -> Result<(CellRange, CellRange)> {
        if self.len() < 2 || !self.len().is_multiple_of(2) {
            return Err(Error::Indivisible(self.len() as u64));
        }
        let mid = self.start + self.len() / 2;
        Ok((CellRange::new(self.start, mid), CellRange::new(mid, self.end)))
    }

    /// Concentric range with twice the length, clipped to `[0, n)`.
    pub fn doubled(&self, n: usize) -> CellRange {
        let half = self.len() / 2;
        let pad_hi = self.len() - half;
        CellRange::new(self.start.saturating_sub(half), (self.end + pad_hi).min(n))
    }

    pub fn intersect(&self, other: &CellRange) -> CellRange {
        let s = self.start.max(other.start);
        let e = self.end.min(other.end);
        if s < e {
            CellRange::new(s, e)
        } else {
            CellRange::EMPTY
        }
    }
}

impl fmt::Display for CellRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// A dyadic lattice translated by a whole number of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Lattice {
    shift: i64,
}

impl Lattice {
    pub fn standard() -> Self {
        Self { shift: 0 }
    }

    pub fn shifted(cells: i64) -> Self {
        Self { shift: cells }
    }

    /// Lattice translated by `omega` times the grid length, snapped to the
    /// nearest cell. `omega` must lie in `[-1/4, 1/4]`.
    pub fn from_offset(grid: &Grid, omega: f64) -> Result<Self> {
        if !(-0.25..=0.25).contains(&omega) {
            return Err(Error::Domain("lattice offset must lie in [-1/4, 1/4]"));
        }
        Ok(Self::shifted((omega * grid.n() as f64).round() as i64))
    }

    /// The offset in `[-1/4, 1/4]` drawn uniformly and snapped to the grid.
    pub fn random<R: rand::Rng + ?Sized>(grid: &Grid, rng: &mut R) -> Self {
        let q = (grid.n() / 4) as i64;
        Self::shifted(rng.gen_range(-q..=q))
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn interval(&self, level: u32, index: i64) -> DyadicInterval {
        DyadicInterval { level, index, shift: self.shift }
    }

    /// The interval of the given level containing `cell`.
    pub fn containing(&self, level: u32, cell: i64) -> DyadicInterval {
        let index = (cell - self.shift).div_euclid(1i64 << level);
        self.interval(level, index)
    }

    /// Index range of level-`level` intervals contained in `range`.
    fn index_bounds(&self, level: u32, range: CellRange) -> (i64, i64) {
        let size = 1i64 << level;
        let lo = (range.start as i64 - self.shift).div_euclid(size) + i64::from((range.start as i64 - self.shift).rem_euclid(size) != 0);
        let hi = (range.end as i64 - self.shift).div_euclid(size);
        (lo, hi)
    }

    /// All level-`level` intervals of this lattice contained in `range`,
    /// from left to right.
    pub fn intervals_in(&self, level: u32, range: CellRange) -> impl Iterator<Item = DyadicInterval> {
        let (lo, hi) = self.index_bounds(level, range);
        let shift = self.shift;
        (lo..hi.max(lo)).map(move |index| DyadicInterval { level, index, shift })
    }

    /// All intervals with level in `min_level..=max_level` contained in
    /// `range`, finest level first.
    pub fn all_in(&self, range: CellRange, min_level: u32, max_level: u32) -> impl Iterator<Item = DyadicInterval> + '_ {
        (min_level..=max_level).flat_map(move |k| self.intervals_in(k, range))
    }
}

/// Every interval of `lattices` with at least `2^min_level` cells lying
/// inside `range`, finest level first.
pub fn intervals_within(range: CellRange, lattices: &[Lattice], min_level: u32) -> Vec<DyadicInterval> {
    let mut out = Vec::new();
    let mut k = min_level;
    while (1usize << k) <= range.len() {
        for lat in lattices {
            out.extend(lat.intervals_in(k, range));
        }
        k += 1;
    }
    out
}

/// The lattices over which suprema are taken by default: the standard
/// lattice and the one translated by a quarter of the grid.
pub fn default_lattices(grid: &Grid) -> [Lattice; 2] {
    [Lattice::standard(), Lattice::shifted((grid.n() / 4) as i64)]
}

/// Interval `[shift + index·2^level, shift + (index+1)·2^level)` in cell units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    pub level: u32,
    pub index: i64,
    pub shift: i64,
}

impl PartialOrd for DyadicInterval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicInterval {
    /// Orders by left endpoint, then by decreasing length, then by lattice.
    fn cmp(&self, other: &Self) -> Ordering {
        self.start().cmp(&other.start()).then(other.level.cmp(&self.level)).then(self.shift.cmp(&other.shift))
    }
}

impl DyadicInterval {
    pub fn lattice(&self) -> Lattice {
        Lattice::shifted(self.shift)
    }

    pub fn len_cells(&self) -> u64 {
        1u64 << self.level
    }

    pub fn start(&self) -> i64 {
        self.shift + self.index * (1i64 << self.level)
    }

    pub fn end(&self) -> i64 {
        self.start() + (1i64 << self.level)
    }

    /// Side length in physical units.
    pub fn length(&self, grid: &Grid) -> f64 {
        grid.length(self.len_cells())
    }

    pub fn center(&self, grid: &Grid) -> f64 {
        0.5 * (grid.edge(self.start()) + grid.edge(self.end()))
    }

    /// The cells covered, if the interval lies inside the grid.
    pub fn cells(&self, grid: &Grid) -> Option<CellRange> {
        let (s, e) = (self.start(), self.end());
        if s >= 0 && e <= grid.n() as i64 {
            Some(CellRange::new(s as usize, e as usize))
        } else {
            None
        }
    }

    /// Lower and upper halves `(I⁻, I⁺)`.
    pub fn halves(&self) -> Result<(DyadicInterval, DyadicInterval)> {
        if self.level == 0 {
            return Err(Error::Indivisible(1));
        }
        let lower = DyadicInterval { level: self.level - 1, index: 2 * self.index, shift: self.shift };
        let upper = DyadicInterval { index: lower.index + 1, ..lower };
        Ok((lower, upper))
    }

    pub fn parent(&self) -> DyadicInterval {
        DyadicInterval { level: self.level + 1, index: self.index.div_euclid(2), shift: self.shift }
    }

    /// Closed-hull gap to `other`, in cells.
    pub fn gap(&self, other: &DyadicInterval) -> i64 {
        (other.start() - self.end()).max(self.start() - other.end()).max(0)
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        self.start() <= other.start() && other.end() <= self.end()
    }

    pub fn overlaps(&self, other: &DyadicInterval) -> bool {
        self.start() < other.end() && other.start() < self.end()
    }

    /// `self < other`: every point of `self` lies below every point of `other`.
    pub fn is_below(&self, other: &DyadicInterval) -> bool {
        self.end() <= other.start()
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start(), self.end())
    }
}

/// `δ = ε / (2(d + ε))`, the goodness exponent.
pub fn delta_from_eps(eps: f64, d: u32) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain("eps must be positive"));
    }
    if d == 0 {
        return Err(Error::Domain("dimension must be positive"));
    }
    Ok(eps / (2.0 * (d as f64 + eps)))
}

/// Whether `j` is `r`-bad with respect to `lattice`: some interval `I` of the
/// lattice with `ℓ(I) >= 2^r ℓ(J)` has a boundary point within
/// `ℓ(J)^δ ℓ(I)^(1-δ)` of `J`.
///
/// Scales are scanned up to the grid length. Boundary points outside `[0, n]`
/// are ignored.
pub fn is_bad(j: &DyadicInterval, grid: &Grid, lattice: &Lattice, r: u32, delta: f64) -> bool {
    let n = grid.n() as i64;
    let (a, b) = (j.start(), j.end());
    let s = lattice.shift();
    let in_grid = |p: i64| (0..=n).contains(&p);
    for k in (j.level + r)..=grid.m() {
        let size = 1i64 << k;
        let thr = (delta * j.level as f64 + (1.0 - delta) * k as f64).exp2();
        // Smallest lattice point >= a and its predecessor.
        let p_hi = s + (a - s + size - 1).div_euclid(size) * size;
        let p_lo = p_hi - size;
        if p_hi <= b {
            return true;
        }
        if (in_grid(p_hi) && ((p_hi - b) as f64) <= thr) || (in_grid(p_lo) && ((a - p_lo) as f64) <= thr) {
            return true;
        }
    }
    false
}

/// The inequality `ℓ(J)^ε / dist(x,J)^(1+ε) <= (ℓ(J)/ℓ(I))^(ε/2) / ℓ(I)`
/// at a point `x` (physical units), up to rounding.
pub fn good_estimate_check(i: &DyadicInterval, j: &DyadicInterval, x: f64, eps: f64, grid: &Grid) -> Result<bool> {
    let (ja, jb) = (grid.edge(j.start()), grid.edge(j.end()));
    let dist = (ja - x).max(x - jb).max(0.0);
    if dist <= 0.0 {
        return Err(Error::Singular("x touches J"));
    }
    let (li, lj) = (i.length(grid), j.length(grid));
    let lhs = lj.powf(eps) / dist.powf(1.0 + eps);
    let rhs = (lj / li).powf(0.5 * eps) / li;
    Ok(lhs <= rhs * (1.0 + 1e-12))
}

/// Region of an interval pair in the splitting of the bilinear form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionTag {
    /// `J < I`: vanishes by causality.
    JltI,
    /// `I < J` with the smaller interval bad among the near pairs.
    IltJ,
    Diagonal,
    I1,
    I2,
    I3,
    I4,
    I5,
    I6,
    /// Overlapping, non-comparable, smaller interval bad.
    BadOverlap,
}

impl RegionTag {
    pub const ALL: [RegionTag; 10] = [
        RegionTag::JltI,
        RegionTag::IltJ,
        RegionTag::Diagonal,
        RegionTag::I1,
        RegionTag::I2,
        RegionTag::I3,
        RegionTag::I4,
        RegionTag::I5,
        RegionTag::I6,
        RegionTag::BadOverlap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RegionTag::JltI => "JltI",
            RegionTag::IltJ => "IltJ",
            RegionTag::Diagonal => "Diagonal",
            RegionTag::I1 => "I1",
            RegionTag::I2 => "I2",
            RegionTag::I3 => "I3",
            RegionTag::I4 => "I4",
            RegionTag::I5 => "I5",
            RegionTag::I6 => "I6",
            RegionTag::BadOverlap => "BadOverlap",
        }
    }
}

/// Classifies `(I, J)` with `I` from the μ-lattice and `J` from the ν-lattice.
///
/// Precedence: `J < I` first, then the diagonal, then the `I < J` regions,
/// then the overlapping regions.
pub fn region_classify(i: &DyadicInterval, j: &DyadicInterval, r: u32, good_j: bool, good_i: bool) -> RegionTag {
    let (li, lj) = (i.len_cells(), j.len_cells());
    let dist = i.gap(j) as u64;
    let near = dist <= li + lj;
    let comparable = li <= lj << r && lj <= li << r;
    if j.is_below(i) {
        return RegionTag::JltI;
    }
    if comparable && near {
        return RegionTag::Diagonal;
    }
    if i.is_below(j) {
        if dist >= li + lj {
            return if lj <= li { RegionTag::I1 } else { RegionTag::I2 };
        }
        return if li > lj << r {
            if good_j {
                RegionTag::I3
            } else {
                RegionTag::IltJ
            }
        } else if good_i {
            RegionTag::I4
        } else {
            RegionTag::IltJ
        };
    }
    if li > lj << r {
        if good_j {
            RegionTag::I5
        } else {
            RegionTag::BadOverlap
        }
    } else if good_i {
        RegionTag::I6
    } else {
        RegionTag::BadOverlap
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn unit(m: u32) -> Grid {
        Grid::unit(m).unwrap()
    }

    fn phys(grid: &Grid, i: &DyadicInterval) -> (f64, f64) {
        (grid.edge(i.start()), grid.edge(i.end()))
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 1.0, 0).is_err());
        assert!(Grid::new(1.0, 1.0, 3).is_err());
        assert!(Grid::new(0.0, f64::INFINITY, 3).is_err());
        let g = unit(4);
        assert_eq!(g.n(), 16);
        assert_eq!(g.cell_width(), 1.0 / 16.0);
        assert_eq!(g.cells_below(0.5), 8);
        assert_eq!(g.cells_below(0.0), 0);
        assert_eq!(g.cells_below(2.0), 16);
        assert_eq!(g.cell_of(0.99), Some(15));
        assert_eq!(g.cell_of(1.0), None);
    }

    #[test]
    fn halves_examples() {
        let g = unit(4);
        let root = Lattice::standard().interval(4, 0);
        let (lo, hi) = root.halves().unwrap();
        assert_eq!(phys(&g, &lo), (0.0, 0.5));
        assert_eq!(phys(&g, &hi), (0.5, 1.0));

        let quarter = Lattice::standard().interval(2, 1);
        assert_eq!(phys(&g, &quarter), (0.25, 0.5));
        let (lo, hi) = quarter.halves().unwrap();
        assert_eq!(phys(&g, &lo), (0.25, 0.375));
        assert_eq!(phys(&g, &hi), (0.375, 0.5));

        let cell = Lattice::standard().interval(0, 3);
        assert_eq!(cell.halves(), Err(Error::Indivisible(1)));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta_from_eps(1.0, 1).unwrap(), 0.25);
        assert!((delta_from_eps(2.0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let d = delta_from_eps(1.0, 1).unwrap();
        assert_eq!(1.0 - d * 2.0, 0.5);
        assert!(delta_from_eps(0.0, 1).is_err());
        assert!(delta_from_eps(-1.0, 1).is_err());
    }

    #[test]
    fn lattice_enumeration() {
        let g = unit(4);
        let lat = Lattice::shifted(3);
        let ivs: Vec<_> = lat.intervals_in(2, g.whole()).collect();
        let starts: Vec<_> = ivs.iter().map(|i| i.start()).collect();
        assert_eq!(starts, [3, 7, 11]);
        assert_eq!(lat.intervals_in(4, g.whole()).count(), 0);
        assert_eq!(Lattice::standard().intervals_in(4, g.whole()).count(), 1);
        let c = lat.containing(2, 2);
        assert_eq!((c.start(), c.end()), (-1, 3));
        assert_eq!(Lattice::from_offset(&g, 0.25).unwrap().shift(), 4);
        assert!(Lattice::from_offset(&g, 0.3).is_err());
    }

    #[test]
    fn bad_example_direct_evaluation() {
        // 256 cells per unit. J has side 2^-4 and sits about 0.1 above the
        // boundary point x = 0 of I = [0, 1): 0.1 <= (2^-4)^(1/4) = 1/2.
        let g = Grid::new(-1.0, 3.0, 10).unwrap();
        let j = Lattice::shifted(256 + 26).interval(4, 0);
        assert!((g.edge(j.start()) - 0.1).abs() < 2e-3);
        assert!(is_bad(&j, &g, &Lattice::standard(), 4, 0.25));
    }

    fn brute_is_bad(j: &DyadicInterval, grid: &Grid, lat: &Lattice, r: u32, delta: f64) -> bool {
        let n = grid.n() as i64;
        for k in (j.level + r)..=grid.m() {
            let size = 1i64 << k;
            let thr = (delta * j.level as f64 + (1.0 - delta) * k as f64).exp2();
            let mut p = lat.shift().rem_euclid(size);
            while p <= n {
                let d = (j.start() - p).max(p - j.end()).max(0);
                if d as f64 <= thr {
                    return true;
                }
                p += size;
            }
        }
        false
    }

    #[test]
    fn is_bad_matches_brute_force() {
        let g = unit(7);
        for shift in [-5i64, 0, 3, 17, 32] {
            let lat = Lattice::shifted(shift);
            for r in [1u32, 2, 4] {
                for delta in [0.1, 0.25, 0.4] {
                    for level in 0..4 {
                        for j in Lattice::standard().intervals_in(level, g.whole()) {
                            assert_eq!(
                                is_bad(&j, &g, &lat, r, delta),
                                brute_is_bad(&j, &g, &lat, r, delta),
                                "J={j} shift={shift} r={r} delta={delta}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn good_interval_far_from_boundaries() {
        // A single cell in the middle of a coarse block is good when r is large
        // enough that only the block boundaries matter.
        let g = unit(8);
        let j = Lattice::standard().interval(0, 127 - 40);
        assert!(!is_bad(&j, &g, &Lattice::standard(), 7, 0.25));
    }

    #[test]
    fn badness_fraction_decreases_with_r() {
        use rand::SeedableRng;
        let g = unit(9);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut fractions = Vec::new();
        for r in [2u32, 4, 6] {
            let mut bad = 0usize;
            let mut total = 0usize;
            for _ in 0..40 {
                let lat = Lattice::random(&g, &mut rng);
                for j in Lattice::standard().intervals_in(0, g.whole()) {
                    total += 1;
                    bad += usize::from(is_bad(&j, &g, &lat, r, 0.25));
                }
            }
            fractions.push(bad as f64 / total as f64);
        }
        assert!(fractions[0] > fractions[1] && fractions[1] > fractions[2], "{fractions:?}");
    }

    #[test]
    fn good_estimate_at_threshold_distance() {
        // x on the boundary of I exactly ℓ(J)^δ ℓ(I)^(1-δ) away from J.
        let g = unit(12);
        let eps = 1.0;
        let delta = delta_from_eps(eps, 1).unwrap();
        let i = Lattice::standard().interval(8, 0);
        let j = Lattice::standard().interval(0, 0);
        let (li, lj) = (i.length(&g), j.length(&g));
        let thr = lj.powf(delta) * li.powf(1.0 - delta);
        let x = grid_edge_left(&g, &j) - thr;
        assert!(good_estimate_check(&i, &j, x, eps, &g).unwrap());
        assert!(!good_estimate_check(&i, &j, grid_edge_left(&g, &j) - 0.01 * thr, eps, &g).unwrap());
        assert!(good_estimate_check(&i, &j, grid_edge_left(&g, &j), eps, &g).is_err());
    }

    fn grid_edge_left(g: &Grid, j: &DyadicInterval) -> f64 {
        g.edge(j.start())
    }

    #[test]
    fn good_estimate_exhaustive() {
        // Every good J and every admissible I: the estimate holds at both
        // boundary points of I that stay off J.
        for m in [6u32, 8] {
            let g = unit(m);
            let eps = 1.0;
            let delta = delta_from_eps(eps, 1).unwrap();
            let r = 2;
            let lat_i = Lattice::shifted(3);
            for jl in 0..=(m - r) {
                for j in Lattice::standard().intervals_in(jl, g.whole()) {
                    if is_bad(&j, &g, &lat_i, r, delta) {
                        continue;
                    }
                    for il in (jl + r)..=m {
                        for i in lat_i.intervals_in(il, CellRange::new(0, g.n())) {
                            for p in [i.start(), i.end()] {
                                let x = g.edge(p);
                                assert!(good_estimate_check(&i, &j, x, eps, &g).unwrap(), "m={m} I={i} J={j}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn region_examples() {
        // One unit is 16 cells.
        let std = Lattice::standard();
        let i = std.interval(4, 0);
        let j = std.interval(4, 2);
        assert_eq!(region_classify(&i, &j, 4, true, true), RegionTag::Diagonal);
        // J a single cell at the bottom of I with ℓ(I) = 2^8 ℓ(J).
        let big = std.interval(8, 0);
        let tiny = std.interval(0, 0);
        assert_eq!(region_classify(&big, &tiny, 4, true, true), RegionTag::I5);
        // I = [4,8) above J = [0,1).
        let i_far = std.interval(6, 1);
        let j_low = std.interval(4, 0);
        assert_eq!(region_classify(&i_far, &j_low, 4, true, true), RegionTag::JltI);
        // The reversed pair is near (gap 3 < 1 + 4), comparable for r >= 2 only.
        assert_eq!(region_classify(&j_low, &i_far, 4, true, true), RegionTag::Diagonal);
        assert_eq!(region_classify(&j_low, &i_far, 1, true, true), RegionTag::I4);
        assert_eq!(region_classify(&j_low, &i_far, 1, true, false), RegionTag::IltJ);
    }

    #[test]
    fn regions_partition_all_pairs_m6() {
        let g = unit(6);
        let lat_mu = Lattice::standard();
        let lat_nu = Lattice::shifted(5);
        let r = 2;
        let all = |lat: Lattice| lat.all_in(g.whole(), 0, g.m()).collect::<Vec<_>>();
        let (mus, nus) = (all(lat_mu), all(lat_nu));
        let mut counts = [0usize; 10];
        for i in &mus {
            for j in &nus {
                for (gj, gi) in [(true, true), (true, false), (false, true), (false, false)] {
                    let tag = region_classify(i, j, r, gj, gi);
                    let pos = RegionTag::ALL.iter().position(|t| *t == tag).unwrap();
                    counts[pos] += 1;
                    check_tag_predicates(i, j, r, gj, gi, tag);
                }
            }
        }
        for (t, c) in RegionTag::ALL.iter().zip(counts) {
            assert!(c > 0, "tag {t:?} never produced");
        }
    }

    fn check_tag_predicates(i: &DyadicInterval, j: &DyadicInterval, r: u32, gj: bool, gi: bool, tag: RegionTag) {
        let (li, lj) = (i.len_cells(), j.len_cells());
        let d = i.gap(j) as u64;
        match tag {
            RegionTag::JltI => assert!(j.is_below(i)),
            RegionTag::Diagonal => assert!(li <= lj << r && lj <= li << r && d <= li + lj),
            RegionTag::I1 => assert!(i.is_below(j) && d >= li + lj && lj <= li),
            RegionTag::I2 => assert!(i.is_below(j) && d >= li + lj && li <= lj),
            RegionTag::I3 => assert!(i.is_below(j) && d <= li + lj && lj << r <= li && gj),
            RegionTag::I4 => assert!(i.is_below(j) && d <= li + lj && li << r <= lj && gi),
            RegionTag::I5 => assert!(i.overlaps(j) && lj << r <= li && gj),
            RegionTag::I6 => assert!(i.overlaps(j) && li << r <= lj && gi),
            RegionTag::IltJ => assert!(i.is_below(j) && !(gi && gj)),
            RegionTag::BadOverlap => assert!(i.overlaps(j) && !(gi && gj)),
        }
        // Disjoint pairs are ordered one way or the other.
        if !i.overlaps(j) {
            assert!(i.is_below(j) || j.is_below(i));
        }
    }

    #[test]
    fn good_j_in_i5_sits_in_one_child() {
        let g = unit(8);
        let r = 3;
        let delta = 0.25;
        let lat_mu = Lattice::shifted(7);
        for j in Lattice::standard().all_in(g.whole(), 0, 4) {
            if is_bad(&j, &g, &lat_mu, r, delta) {
                continue;
            }
            for i in lat_mu.all_in(g.whole(), j.level + r, g.m()) {
                if region_classify(&i, &j, r, true, true) == RegionTag::I5 {
                    let (lo, hi) = i.halves().unwrap();
                    assert!(lo.contains(&j) || hi.contains(&j));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn larger_delta_never_makes_good_bad(level in 0u32..4, idx in 0i64..64, shift in -40i64..40,
                                              r in 1u32..5, d1 in 0.01f64..0.49, d2 in 0.01f64..0.49) {
            let g = unit(8);
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            let j = Lattice::standard().interval(level, idx % (g.n() as i64 >> level));
            let lat = Lattice::shifted(shift);
            // The threshold ℓ(J)^δ ℓ(I)^(1-δ) decreases in δ when ℓ(J) <= ℓ(I).
            if !is_bad(&j, &g, &lat, r, lo) {
                prop_assert!(!is_bad(&j, &g, &lat, r, hi));
            }
        }

        #[test]
        fn halves_partition(level in 1u32..10, index in -50i64..50, shift in -20i64..20) {
            let i = Lattice::shifted(shift).interval(level, index);
            let (lo, hi) = i.halves().unwrap();
            prop_assert_eq!(lo.start(), i.start());
            prop_assert_eq!(lo.end(), hi.start());
            prop_assert_eq!(hi.end(), i.end());
            prop_assert_eq!(lo.len_cells() * 2, i.len_cells());
            prop_assert!(lo.is_below(&hi));
            prop_assert_eq!(lo.parent(), i);
            prop_assert_eq!(hi.parent(), i);
        }
    }
}
