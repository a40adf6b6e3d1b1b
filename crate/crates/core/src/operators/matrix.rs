//! Midpoint-rule matrices of causal kernels.

use alloc::vec::Vec;

use crate::dyadic::Grid;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::operators::kernel::{CausalKernel, Direction};
use crate::weights::MeasurePair;

/// What the matrix acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// `(Tf)_i = Σ_j A_ij f_j` for `f` sampled at cell midpoints.
    Plain,
    /// `T_μ f = T(χ_ℍ w⁻¹ f)`: columns scaled by `μ_j / cell_width`.
    MuWeighted,
}

/// Dense `n × n` discretization of a causal kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub(crate) entries: DenseMatrix,
    pub(crate) grid: Grid,
    pub(crate) band: usize,
    pub(crate) flavor: Flavor,
    pub(crate) direction: Direction,
    pub(crate) epsilon: f64,
    pub(crate) constant: f64,
}

/// `A_ij = K(x_i, y_j) · cell_width` on the support side with `|i − j| >= band`.
pub fn discretize<K: CausalKernel + ?Sized>(kernel: &K, grid: &Grid, band: usize) -> Result<OperatorMatrix> {
    if band == 0 {
        return Err(Error::Domain("band must be at least 1"));
    }
    let n = grid.n();
    let cw = grid.cell_width();
    let direction = kernel.direction();
    let mids: Vec<f64> = grid.midpoints().collect();
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let cols = match direction {
            Direction::Up => 0..(i + 1).saturating_sub(band),
            Direction::Down => (i + band).min(n)..n,
        };
        let row = a.row_mut(i);
        for j in cols {
            let v = kernel.eval(mids[i], mids[j]);
            if !v.is_finite() {
                return Err(Error::NonFiniteKernel { x: mids[i], y: mids[j] });
            }
            row[j] = v * cw;
        }
    }
    Ok(OperatorMatrix {
        entries: a,
        grid: *grid,
        band,
        flavor: Flavor::Plain,
        direction,
        epsilon: kernel.epsilon(),
        constant: kernel.constant(),
    })
}

impl OperatorMatrix {
    /// Builds a plain matrix from raw entries. Entries on the vanishing side
    /// must be zero.
    pub fn from_entries(entries: DenseMatrix, grid: Grid, direction: Direction, epsilon: f64, constant: f64) -> Result<Self> {
        let n = grid.n();
        if entries.rows() != n || entries.cols() != n {
            return Err(Error::LengthMismatch { expected: n, got: entries.rows() });
        }
        for i in 0..n {
            for j in 0..n {
                let forbidden = match direction {
                    Direction::Up => j > i,
                    Direction::Down => j < i,
                };
                if forbidden && entries.get(i, j) != 0.0 {
                    return Err(Error::Domain("entry on the vanishing side of the diagonal"));
                }
            }
        }
        let band = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| entries.get(i, j) != 0.0)
            .map(|(i, j)| i.abs_diff(j))
            .min()
            .unwrap_or(n)
            .max(1);
        Ok(Self { entries, grid, band, flavor: Flavor::Plain, direction, epsilon, constant })
    }

    pub fn entries(&self) -> &DenseMatrix {
        &self.entries
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Declared kernel constant.
    pub fn kernel_constant(&self) -> f64 {
        self.constant
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.entries.matvec(f)
    }

    /// Matrix of `K'(x, y) = K(y, x)`.
    pub fn transpose(&self) -> Self {
        Self { entries: self.entries.transpose(), direction: self.direction.flip(), ..self.clone() }
    }

    /// `T_μ` for the given measures. Only defined for plain matrices.
    pub fn mu_weighted(&self, mp: &MeasurePair) -> Result<Self> {
        if self.flavor != Flavor::Plain {
            return Err(Error::Domain("matrix is already weighted"));
        }
        let n = self.n();
        if mp.mu().len() != n {
            return Err(Error::LengthMismatch { expected: n, got: mp.mu().len() });
        }
        let cw = self.grid.cell_width();
        let scale: Vec<f64> = mp.mu().iter().map(|m| m / cw).collect();
        let entries = DenseMatrix::from_fn(n, n, |i, j| self.entries.get(i, j) * scale[j]);
        Ok(Self { entries, flavor: Flavor::MuWeighted, ..self.clone() })
    }

    /// Whether every entry on the vanishing side is zero.
    pub fn is_causal(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| {
            let row = self.entries.row(i);
            match self.direction {
                Direction::Up => row[i + 1..].iter().all(|v| *v == 0.0),
                Direction::Down => row[..i].iter().all(|v| *v == 0.0),
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::kernel::{CausalHilbert, FnKernel, Transposed, ZeroKernel};
    use crate::weights::Weight;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn zero_kernel_zero_matrix() {
        let g = Grid::unit(5).unwrap();
        let t = discretize(&ZeroKernel, &g, 1).unwrap();
        assert_eq!(t.entries().max_abs(), 0.0);
        assert_eq!(crate::linalg::spectral_norm(t.entries()), 0.0);
    }

    #[test]
    fn hilbert_entries() {
        let g = Grid::unit(6).unwrap();
        let t = discretize(&CausalHilbert, &g, 1).unwrap();
        let cw = g.cell_width();
        for i in 0..g.n() {
            for j in 0..g.n() {
                let expected = if i > j { cw / (g.midpoint(i) - g.midpoint(j)) } else { 0.0 };
                assert_eq!(t.entries().get(i, j), expected);
            }
        }
        assert!(t.is_causal());
        // Entries are exactly 1/(i − j) up to rounding.
        assert!((t.entries().get(10, 3) - 1.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn band_and_errors() {
        let g = Grid::unit(4).unwrap();
        assert!(discretize(&CausalHilbert, &g, 0).is_err());
        let t = discretize(&CausalHilbert, &g, 3).unwrap();
        assert_eq!(t.entries().get(5, 3), 0.0);
        assert_ne!(t.entries().get(5, 2), 0.0);
        let bad = FnKernel::new(|x: f64, y: f64| if x > y { 1.0 / (x - y - 0.5 / 16.0 * 2.0) } else { 0.0 }, 1.0, 1.0, Direction::Up);
        assert!(matches!(discretize(&bad, &g, 1), Err(Error::NonFiniteKernel { .. })));
    }

    #[test]
    fn transpose_is_discretized_transpose_kernel() {
        let g = Grid::unit(6).unwrap();
        let t = discretize(&CausalHilbert, &g, 1).unwrap();
        let tt = discretize(&Transposed(CausalHilbert), &g, 1).unwrap();
        assert_eq!(t.transpose().entries(), tt.entries());
        assert_eq!(tt.direction(), Direction::Down);
        assert!(tt.is_causal());
    }

    #[test]
    fn mu_weighted_scaling() {
        let g = Grid::unit(4).unwrap();
        let t = discretize(&CausalHilbert, &g, 1).unwrap();
        let w = Weight::from_fn(&g, |x| 1.0 + x, None).unwrap();
        let mp = MeasurePair::from_weight(&w);
        let tm = t.mu_weighted(&mp).unwrap();
        assert_eq!(tm.flavor(), Flavor::MuWeighted);
        let f = vec![1.0; 16];
        let direct: Vec<f64> = (0..16).map(|j| f[j] / w.values()[j]).collect();
        let a = t.apply(&direct);
        let b = tm.apply(&f);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
        assert!(tm.mu_weighted(&mp).is_err());
    }

    proptest! {
        #[test]
        fn causality_identity(f in proptest::collection::vec(-3.0f64..3.0, 32), z in 0usize..=32) {
            let g = Grid::unit(5).unwrap();
            let t = discretize(&CausalHilbert, &g, 1).unwrap();
            let tf = t.apply(&f);
            let mut cut = f.clone();
            cut[z..].iter_mut().for_each(|v| *v = 0.0);
            let tcut = t.apply(&cut);
            prop_assert_eq!(&tf[..z], &tcut[..z]);
        }
    }
}
