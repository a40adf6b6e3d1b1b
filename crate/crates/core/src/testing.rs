//! Testing constants, weak-norm lower estimates and the scaling sweep.
//!
//! Suprema run over every dyadic interval (single cells included) of the
//! default lattices lying inside `ℍ`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{default_lattices, intervals_within, CellRange, Lattice};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::operators::kernel::Direction;
use crate::operators::matrix::{Flavor, OperatorMatrix};
use crate::operators::{weighted_operator_norm, NormMode};
use crate::weights::{ap_down, ap_up, MeasurePair, Weight};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// `∫_Q |T_μ χ_Q|² dν`.
    Local,
    /// `∫_{2Q} |T_μ χ_Q|² dν`.
    Semilocal,
    /// `∫ |T_μ χ_Q|² dν` over the whole grid.
    Global,
}

/// The three indicator testing constants of one operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestingConstants {
    pub k_chi: f64,
    pub k_sl: f64,
    pub k_gl: f64,
}

impl TestingConstants {
    pub fn get(&self, scope: Scope) -> f64 {
        match scope {
            Scope::Local => self.k_chi,
            Scope::Semilocal => self.k_sl,
            Scope::Global => self.k_gl,
        }
    }

    fn max(self, o: Self) -> Self {
        Self { k_chi: self.k_chi.max(o.k_chi), k_sl: self.k_sl.max(o.k_sl), k_gl: self.k_gl.max(o.k_gl) }
    }
}

/// Row-wise prefix sums: `p[i][j] = ∑_{k<j} M_ik`.
struct RowPrefix {
    cols: usize,
    data: Vec<f64>,
}

impl RowPrefix {
    fn new(m: &DenseMatrix, scale: Option<&[f64]>) -> Self {
        let cols = m.cols() + 1;
        let mut data = vec![0.0; m.rows() * cols];
        for i in 0..m.rows() {
            let row = m.row(i);
            let out = &mut data[i * cols..(i + 1) * cols];
            let mut acc = 0.0;
            for j in 0..m.cols() {
                acc += scale.map_or(row[j], |s| row[j] * s[j]);
                out[j + 1] = acc;
            }
        }
        Self { cols, data }
    }

    #[inline]
    fn sum(&self, i: usize, r: CellRange) -> f64 {
        let row = &self.data[i * self.cols..];
        row[r.end] - row[r.start]
    }
}

fn plain(t: &OperatorMatrix) -> Result<()> {
    if t.flavor() != Flavor::Plain {
        return Err(Error::Domain("testing constants take the plain matrix"));
    }
    Ok(())
}

fn testing_family(mp: &MeasurePair) -> Vec<CellRange> {
    let lats = default_lattices(mp.grid());
    intervals_within(mp.support(), &lats, 0).iter().filter_map(|iv| iv.cells(mp.grid())).collect()
}

/// `K_χ, K_sl, K_gl` of `T` itself (no dual). Each region sum extends the
/// previous one by nonnegative terms, so the chain holds in floating point.
pub fn testing_constants(t: &OperatorMatrix, mp: &MeasurePair) -> Result<TestingConstants> {
    plain(t)?;
    let n = t.n();
    if mp.mu().len() != n {
        return Err(Error::LengthMismatch { expected: n, got: mp.mu().len() });
    }
    let tmu = t.mu_weighted(mp)?;
    let pre = RowPrefix::new(tmu.entries(), None);
    let nu = mp.nu();
    let h = mp.support().len();
    let mut out = TestingConstants { k_chi: 0.0, k_sl: 0.0, k_gl: 0.0 };
    let mut any = false;
    for q in testing_family(mp) {
        let mu: f64 = mp.mu()[q.cells()].iter().sum();
        if !(mu > 0.0) {
            continue;
        }
        any = true;
        let d = q.doubled(h);
        let term = |i: usize| {
            let v = pre.sum(i, q);
            nu[i] * v * v
        };
        let local: f64 = q.cells().map(term).sum();
        let ring: f64 = (d.start..q.start).chain(q.end..d.end).map(term).sum();
        let rest: f64 = (0..d.start).chain(d.end..h).map(term).sum();
        let semi = local + ring;
        let global = semi + rest;
        out.k_chi = out.k_chi.max(local / mu);
        out.k_sl = out.k_sl.max(semi / mu);
        out.k_gl = out.k_gl.max(global / mu);
    }
    if !any {
        return Err(Error::NoAdmissibleInterval("no interval with μ-mass for testing"));
    }
    Ok(out)
}

/// The testing constants of `Tᵗ` against the exchanged measures.
pub fn dual_testing_constants(t: &OperatorMatrix, mp: &MeasurePair) -> Result<TestingConstants> {
    testing_constants(&t.transpose(), &mp.swapped())
}

/// `max` of the primal and dual constant for `scope`.
pub fn local_testing(t: &OperatorMatrix, mp: &MeasurePair, scope: Scope) -> Result<f64> {
    Ok(testing_constants(t, mp)?.max(dual_testing_constants(t, mp)?).get(scope))
}

/// Weak boundedness constants: all disjoint pairs, and pairs with
/// `dist(P, Q) <= max(ℓ(P), ℓ(Q))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WbpConstant {
    pub all_pairs: f64,
    pub near_pairs: f64,
}

/// `sup |⟨T_μ χ_Q, χ_P⟩_ν| / (μ(Q) ν(P))^{1/2}` over disjoint dyadic `P, Q`.
pub fn wbp_constant(t: &OperatorMatrix, mp: &MeasurePair) -> Result<WbpConstant> {
    plain(t)?;
    let n = t.n();
    let cw = t.grid().cell_width();
    let a = t.entries();
    let (mu, nu) = (mp.mu(), mp.nu());
    // Two-dimensional prefix of B_ij = ν_i K_ij μ_j.
    let w = n + 1;
    let mut p = vec![0.0; w * w];
    for i in 0..n {
        let mut acc = 0.0;
        let row = a.row(i);
        for j in 0..n {
            acc += nu[i] * (row[j] / cw) * mu[j];
            p[(i + 1) * w + j + 1] = p[i * w + j + 1] + acc;
        }
    }
    let rect = |pr: CellRange, qr: CellRange| {
        p[pr.end * w + qr.end] - p[pr.start * w + qr.end] - p[pr.end * w + qr.start] + p[pr.start * w + qr.start]
    };
    let fam: Vec<(CellRange, f64, f64)> =
        testing_family(mp).into_iter().map(|r| (r, mu[r.cells()].iter().sum(), nu[r.cells()].iter().sum())).collect();
    let mut out = WbpConstant { all_pairs: 0.0, near_pairs: 0.0 };
    for (pr, _, nup) in &fam {
        for (qr, muq, _) in &fam {
            if pr.overlaps(qr) || *nup <= 0.0 || *muq <= 0.0 {
                continue;
            }
            // Upward kernels vanish unless P lies above Q.
            let v = rect(*pr, *qr).abs() / (muq * nup).sqrt();
            out.all_pairs = out.all_pairs.max(v);
            if pr.gap(qr) <= pr.len().max(qr.len()) {
                out.near_pairs = out.near_pairs.max(v);
            }
        }
    }
    Ok(out)
}

/// Lower estimate of `‖T‖_{L^p(w) → L^{p,∞}(w)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakNormEstimate {
    pub value: f64,
    pub functions: usize,
}

pub const WEAK_RANDOM_FUNCTIONS: usize = 16;

/// `sup_λ λ w({|f| > λ})^{1/p}` for cell masses `w_i·cw`.
fn weak_quasi_norm(values: &[f64], masses: &[f64], p: f64, scratch: &mut Vec<(f64, f64)>) -> f64 {
    scratch.clear();
    scratch.extend(values.iter().zip(masses).filter(|(v, m)| **m > 0.0 && v.abs() > 0.0).map(|(v, m)| (v.abs(), *m)));
    scratch.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
    let mut total = 0.0;
    let mut best: f64 = 0.0;
    let mut k = 0;
    while k < scratch.len() {
        // Group equal values: the level set just below v includes all of them.
        let v = scratch[k].0;
        while k < scratch.len() && scratch[k].0 == v {
            total += scratch[k].1;
            k += 1;
        }
        best = best.max(v * total.powf(1.0 / p));
    }
    best
}

/// Maximum of the weak ratio over: indicators `χ_Q` and `w⁻¹χ_Q` of the
/// dyadic intervals inside `ℍ` (level zero gives the single-cell spikes),
/// and random combinations of unweighted Haar functions.
pub fn weak_norm(t: &OperatorMatrix, w: &Weight, p: f64, seed: u64) -> Result<WeakNormEstimate> {
    plain(t)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain("weak norms need p >= 1"));
    }
    let n = t.n();
    if w.values().len() != n {
        return Err(Error::LengthMismatch { expected: n, got: w.values().len() });
    }
    let cw = t.grid().cell_width();
    let h = w.support().len();
    let masses: Vec<f64> = w.values()[..h].iter().map(|v| v * cw).collect();
    let inv: Vec<f64> = w.reciprocal().values().to_vec();
    let lp = |f: &dyn Fn(usize) -> f64, r: CellRange| r.cells().map(|k| f(k).abs().powf(p) * masses[k]).sum::<f64>().powf(1.0 / p);
    let a = t.entries();
    let pre_plain = RowPrefix::new(a, None);
    let pre_inv = RowPrefix::new(a, Some(&inv));
    let mut scratch = Vec::with_capacity(h);
    let mut out = vec![0.0; h];
    let mut best: f64 = 0.0;
    let mut count = 0;
    let fam = intervals_within(w.support(), &default_lattices(w.grid()), 0);
    for iv in fam {
        let Some(q) = iv.cells(w.grid()) else { continue };
        for (pre, f) in [(&pre_plain, &(|_k: usize| 1.0) as &dyn Fn(usize) -> f64), (&pre_inv, &|k: usize| inv[k])] {
            let norm = lp(f, q);
            if !(norm > 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o = pre.sum(i, q);
            }
            best = best.max(weak_quasi_norm(&out, &masses, p, &mut scratch) / norm);
            count += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lat = Lattice::standard();
    let haar: Vec<CellRange> = intervals_within(w.support(), &[lat], 1).iter().filter_map(|iv| iv.cells(w.grid())).collect();
    if !haar.is_empty() {
        let mut f = vec![0.0; n];
        for _ in 0..WEAK_RANDOM_FUNCTIONS {
            f.fill(0.0);
            for r in &haar {
                let c: f64 = rng.gen_range(-1.0..1.0) / (r.len() as f64).sqrt();
                let (lo, hi) = r.halves()?;
                f[lo.cells()].iter_mut().for_each(|v| *v += c);
                f[hi.cells()].iter_mut().for_each(|v| *v -= c);
            }
            let norm = lp(&|k| f[k], CellRange::new(0, h));
            if norm > 0.0 {
                let tf = a.matvec(&f);
                best = best.max(weak_quasi_norm(&tf[..h], &masses, p, &mut scratch) / norm);
                count += 1;
            }
        }
    }
    Ok(WeakNormEstimate { value: best, functions: count })
}

/// Everything measured for one operator and weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestingReport {
    /// `[w]_{A₂↑}` for upward `T`, `[w]_{A₂↓}` for downward `T`.
    pub characteristic: f64,
    /// `max(primal, dual)` of each testing constant.
    pub k_chi: f64,
    pub k_sl: f64,
    pub k_gl: f64,
    pub primal: TestingConstants,
    pub dual: TestingConstants,
    pub k_wb: f64,
    pub k_wb_near: f64,
    pub norm_l2w: f64,
    /// Lower estimates only.
    pub weak_norm_t: f64,
    pub weak_norm_tprime: f64,
}

pub fn testing_report(t: &OperatorMatrix, w: &Weight, seed: u64) -> Result<TestingReport> {
    plain(t)?;
    let mp = MeasurePair::from_weight(w);
    let characteristic = match t.direction() {
        Direction::Up => ap_up(w, 2.0, None)?,
        Direction::Down => ap_down(w, 2.0, None)?,
    };
    let primal = testing_constants(t, &mp)?;
    let dual = dual_testing_constants(t, &mp)?;
    let both = primal.max(dual);
    let wb = wbp_constant(t, &mp)?;
    let norm_l2w = weighted_operator_norm(t, w, NormMode::L2w)?;
    let weak_norm_t = weak_norm(t, w, 2.0, seed)?.value;
    let weak_norm_tprime = weak_norm(&t.transpose(), &w.reciprocal(), 2.0, seed)?.value;
    Ok(TestingReport {
        characteristic,
        k_chi: both.k_chi,
        k_sl: both.k_sl,
        k_gl: both.k_gl,
        primal,
        dual,
        k_wb: wb.all_pairs,
        k_wb_near: wb.near_pairs,
        norm_l2w,
        weak_norm_t,
        weak_norm_tprime,
    })
}

/// One line of the scaling table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub weight_id: String,
    pub m: u32,
    pub characteristic: f64,
    pub norm: f64,
    pub k_chi: f64,
    pub k_sl: f64,
    pub k_gl: f64,
    pub k_wb: f64,
    pub weak2: f64,
    pub weak2_dual: f64,
    /// `‖T‖ / ([w](1 + log[w]))`.
    pub ratio1: f64,
    /// `√K_gl / ([w] log(e + [w]))`.
    pub ratio2: f64,
    /// `‖T‖ / ([w] + √K_gl)`.
    pub ratio3: f64,
}

impl SweepRow {
    pub fn from_report(weight_id: String, m: u32, r: &TestingReport) -> Self {
        let c = r.characteristic;
        let skgl = r.k_gl.sqrt();
        Self {
            weight_id,
            m,
            characteristic: c,
            norm: r.norm_l2w,
            k_chi: r.k_chi,
            k_sl: r.k_sl,
            k_gl: r.k_gl,
            k_wb: r.k_wb,
            weak2: r.weak_norm_t,
            weak2_dual: r.weak_norm_tprime,
            ratio1: r.norm_l2w / (c * (1.0 + c.ln())),
            ratio2: skgl / (c * (core::f64::consts::E + c).ln()),
            ratio3: r.norm_l2w / (c + skgl),
        }
    }
}

pub fn sweep_row(weight_id: String, t: &OperatorMatrix, w: &Weight, seed: u64) -> Result<SweepRow> {
    let r = testing_report(t, w, seed)?;
    Ok(SweepRow::from_report(weight_id, w.grid().m(), &r))
}

/// Sequential sweep over `weights`, rows ordered by characteristic.
pub fn a2_theorem_sweep(t: &OperatorMatrix, weights: &[(String, Weight)], seed: u64) -> Result<Vec<SweepRow>> {
    let mut rows = weights.iter().map(|(id, w)| sweep_row(id.clone(), t, w, seed)).collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    Ok(rows)
}

/// By characteristic, then by id.
pub fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| a.characteristic.total_cmp(&b.characteristic).then_with(|| a.weight_id.cmp(&b.weight_id)));
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("slope needs two or more positive points"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Domain("slope needs two distinct abscissae"));
    }
    Ok(sxy / sxx)
}
