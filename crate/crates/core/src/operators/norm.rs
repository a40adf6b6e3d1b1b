//! Weighted `L²` norms of causal matrices and of the one-sided maximal
//! operators.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::CellRange;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, DenseMatrix};
use crate::operators::kernel::Direction;
use crate::operators::matrix::{Flavor, OperatorMatrix};
use crate::operators::maximal::{max_down_windows, max_up_windows};
use crate::weights::{MeasurePair, Weight};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    /// `‖diag(w^½) A diag(w^-½)‖` on the support of `w`.
    L2w,
    /// `‖diag(ν^½) K diag(μ^½)‖` with `K` the kernel values.
    BilinearMuNu,
}

/// Norm of a plain matrix on `L²(w)`, both sides restricted to the support.
pub fn weighted_operator_norm(t: &OperatorMatrix, w: &Weight, mode: NormMode) -> Result<f64> {
    if t.flavor() != Flavor::Plain {
        return Err(Error::Domain("weighted norms take the plain matrix"));
    }
    let n = t.n();
    if w.values().len() != n {
        return Err(Error::LengthMismatch { expected: n, got: w.values().len() });
    }
    let h = w.support().len();
    let a = t.entries();
    let b = match mode {
        NormMode::L2w => {
            let s: Vec<f64> = w.values()[..h].iter().map(|v| v.sqrt()).collect();
            DenseMatrix::from_fn(h, h, |i, j| s[i] * a.get(i, j) / s[j])
        }
        NormMode::BilinearMuNu => {
            let mp = MeasurePair::from_weight(w);
            let cw = t.grid().cell_width();
            let sn: Vec<f64> = mp.nu()[..h].iter().map(|v| v.sqrt()).collect();
            let sm: Vec<f64> = mp.mu()[..h].iter().map(|v| v.sqrt()).collect();
            DenseMatrix::from_fn(h, h, |i, j| sn[i] * (a.get(i, j) / cw) * sm[j])
        }
    };
    Ok(spectral_norm(&b))
}

/// Lower estimate of `‖M‖_{L²(w) → L²(w)}` for a one-sided maximal operator.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalNormEstimate {
    pub value: f64,
    pub starts: usize,
    pub iterations: usize,
}

fn windows(f: &[f64], support: CellRange, dir: Direction) -> (Vec<f64>, Vec<usize>) {
    let mw = match dir {
        Direction::Up => max_up_windows(f, support),
        Direction::Down => max_down_windows(f, support),
    };
    (mw.values, mw.anchors)
}

fn weighted_norm(f: &[f64], w: &[f64]) -> f64 {
    f.iter().zip(w).map(|(x, wi)| wi * x * x).sum::<f64>().sqrt()
}

/// Power ascent on the window-linearized operator from several starts.
///
/// At each step the optimal windows of the current `f` define an averaging
/// operator `A`; `f` is replaced by the `L²(w)` adjoint of `A` applied to
/// `A f`. Every reported ratio is attained by an explicit `f`, so the result
/// never exceeds the true norm.
pub fn maximal_norm_estimate(w: &Weight, dir: Direction, starts: usize, iterations: usize, seed: u64) -> MaximalNormEstimate {
    let h = w.support().len();
    let wv = &w.values()[..h];
    let support = CellRange::new(0, h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    let mut total_iter = 0;
    for s in 0..starts.max(1) {
        let mut f: Vec<f64> = match s {
            0 => vec![1.0; h],
            1 => wv.iter().map(|v| v.recip()).collect(),
            _ if s % 2 == 0 => {
                let len = 1usize << rng.gen_range(0..=h.ilog2());
                let start = rng.gen_range(0..=h - len);
                (0..h).map(|i| if (start..start + len).contains(&i) { wv[i].recip() } else { 0.0 }).collect()
            }
            _ => (0..h).map(|_| rng.gen_range(0.0..1.0)).collect(),
        };
        for _ in 0..iterations {
            total_iter += 1;
            let nf = weighted_norm(&f, wv);
            if nf == 0.0 {
                break;
            }
            let (mf, anchors) = windows(&f, support, dir);
            best = best.max(weighted_norm(&mf, wv) / nf);
            // Adjoint of the averaging operator in L²(w): (A*y)_j = w_j⁻¹ Σ_{i : j ∈ window(i)} w_i y_i / |window(i)|.
            let mut diff = vec![0.0; h + 1];
            for (i, (&m, &a)) in mf.iter().zip(&anchors).enumerate() {
                let (lo, hi) = if a <= i { (a, i) } else { (i, a) };
                let c = wv[i] * m / (hi + 1 - lo) as f64;
                diff[lo] += c;
                diff[hi + 1] -= c;
            }
            let mut acc = 0.0;
            let mut g = Vec::with_capacity(h);
            for (j, d) in diff[..h].iter().enumerate() {
                acc += d;
                g.push((acc / wv[j]).max(0.0));
            }
            let ng = weighted_norm(&g, wv);
            if ng == 0.0 {
                break;
            }
            g.iter_mut().for_each(|v| *v /= ng);
            f = g;
        }
        let nf = weighted_norm(&f, wv);
        if nf > 0.0 {
            let (mf, _) = windows(&f, support, dir);
            best = best.max(weighted_norm(&mf, wv) / nf);
        }
    }
    MaximalNormEstimate { value: best, starts: starts.max(1), iterations: total_iter }
}
