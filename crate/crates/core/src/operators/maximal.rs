//! Localized one-sided maximal functions on whole-cell windows.
//!
//! `M↑_{I₀} f` at cell `i` is the largest average of `|f|` over a window
//! `[l, i]` with `l >= I₀.start`; `M↓_{I₀} f` uses windows `[i, t]` with
//! `t < I₀.end`. Outputs are indexed by the cells of `I₀`.
//!
//! The sweep keeps the lower convex hull of the prefix-sum points `(l, P_l)`.
//! The best window for cell `i` starts at the hull vertex touched by the
//! tangent from `(i + 1, P_{i+1})`, found by binary search.

use alloc::vec::Vec;

use crate::dyadic::CellRange;
#[allow(unused_imports)]
use num_traits::Float;

/// Values and optimal window for each cell of `I₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalWindows {
    pub values: Vec<f64>,
    /// For `M↑`, the first cell of the optimal window; for `M↓`, the last.
    pub anchors: Vec<usize>,
}

fn above(q: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    (q.1 - a.1) * (b.0 - a.0) > (b.1 - a.1) * (q.0 - a.0)
}

fn cross(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Backward-window maximal averages of `|v|` over a local slice.
fn sweep_up(v: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = v.len();
    let mut p = Vec::with_capacity(n + 1);
    p.push(0.0);
    let mut acc = 0.0;
    for x in v {
        acc += x.abs();
        p.push(acc);
    }
    let pt = |l: usize| (l as f64, p[l]);
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut starts = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 && cross(pt(hull[hull.len() - 2]), pt(hull[hull.len() - 1]), pt(i)) <= 0.0 {
            hull.pop();
        }
        hull.push(i);
        let q = pt(i + 1);
        // First edge (t, t+1) that q is not strictly above.
        let (mut lo, mut hi) = (0usize, hull.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if above(q, pt(hull[mid]), pt(hull[mid + 1])) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let l = hull[lo];
        values.push((p[i + 1] - p[l]) / (i + 1 - l) as f64);
        starts.push(l);
    }
    (values, starts)
}

pub fn max_up_windows(f: &[f64], i0: CellRange) -> MaximalWindows {
    let (values, starts) = sweep_up(&f[i0.cells()]);
    MaximalWindows { values, anchors: starts.into_iter().map(|l| l + i0.start).collect() }
}

pub fn max_down_windows(f: &[f64], i0: CellRange) -> MaximalWindows {
    let rev: Vec<f64> = f[i0.cells()].iter().rev().copied().collect();
    let (mut values, starts) = sweep_up(&rev);
    values.reverse();
    let len = i0.len();
    let anchors = starts.into_iter().rev().map(|l| i0.start + len - 1 - l).collect();
    MaximalWindows { values, anchors }
}

/// `M↑_{I₀} f` on the cells of `I₀`.
pub fn max_up(f: &[f64], i0: CellRange) -> Vec<f64> {
    sweep_up(&f[i0.cells()]).0
}

/// `M↓_{I₀} f` on the cells of `I₀`.
pub fn max_down(f: &[f64], i0: CellRange) -> Vec<f64> {
    max_down_windows(f, i0).values
}

fn powered(f: &[f64], i0: CellRange, r: f64) -> Vec<f64> {
    let mut g = f.to_vec();
    for x in &mut g[i0.cells()] {
        *x = x.abs().powf(r);
    }
    g
}

/// `(M↑_{I₀} |f|^r)^(1/r)`.
pub fn max_up_r(f: &[f64], i0: CellRange, r: f64) -> Vec<f64> {
    let inv = r.recip();
    max_up(&powered(f, i0, r), i0).into_iter().map(|v| v.powf(inv)).collect()
}

/// `(M↓_{I₀} |f|^r)^(1/r)`.
pub fn max_down_r(f: &[f64], i0: CellRange, r: f64) -> Vec<f64> {
    let inv = r.recip();
    max_down(&powered(f, i0, r), i0).into_iter().map(|v| v.powf(inv)).collect()
}

/// Maximal runs of `values[k] > lambda`, as cell ranges offset by `offset`.
pub fn super_level_components(values: &[f64], offset: usize, lambda: f64) -> Vec<CellRange> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, v) in values.iter().enumerate() {
        match (start, *v > lambda) {
            (None, true) => start = Some(k),
            (Some(s), false) => {
                out.push(CellRange::new(offset + s, offset + k));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(CellRange::new(offset + s, offset + values.len()));
    }
    out
}
