//! The Rubio de Francia majorant, the extrapolation chain built on it and
//! the scalar bookkeeping of the weak (1,1) proof.

use alloc::vec;
use alloc::vec::Vec;

use super::cz::weak_l1_quasi_norm;
use crate::dyadic::CellRange;
use crate::error::{Error, Result};
use crate::operators::kernel::Direction;
use crate::operators::{max_down, max_down_r, maximal_norm_estimate, OperatorMatrix};
use crate::weights::{a1_up_local, ap_up, Weight};
#[allow(unused_imports)]
use num_traits::Float;

/// `S h = w⁻¹ M↓_ℍ(|h| w)` on `ℍ`, zero above.
pub fn rdf_step(h: &[f64], w: &Weight) -> Vec<f64> {
    let sup = w.support();
    let wv = w.values();
    let hw: Vec<f64> = h.iter().zip(wv).map(|(a, b)| a.abs() * b).collect();
    let m = max_down(&hw, sup);
    let mut out = vec![0.0; h.len()];
    for i in sup.cells() {
        out[i] = m[i - sup.start] / wv[i];
    }
    out
}

/// `C = max(1, ‖M↓‖_{L²(w⁻¹)} / [w]_{A₂↑})` with the norm from power ascent.
pub fn rdf_constant(w: &Weight, seed: u64) -> Result<f64> {
    let a2 = ap_up(w, 2.0, None)?;
    let est = maximal_norm_estimate(&w.reciprocal(), Direction::Down, 4, 40, seed).value;
    Ok((est / a2).max(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdfResult {
    /// `∑_{k<terms} S^k h / (2C[w])^k`.
    pub rh: Vec<f64>,
    /// `2C[w]_{A₂↑}`.
    pub scale: f64,
    pub terms: usize,
    /// `‖Rh‖_{L²(w)} / ‖h‖_{L²(w)}`.
    pub norm_ratio: f64,
    /// Bound on the dropped terms, relative to `‖h‖_{L²(w)}`.
    pub tail: f64,
    /// `sup_ℍ S(Rh) / Rh` over cells with `Rh > 0`.
    pub a1_ratio: f64,
    /// `scale · (1 + sup (next term)/Rh)`; `a1_ratio` never exceeds it.
    pub a1_bound: f64,
    /// Largest ratio of consecutive term norms.
    pub max_term_ratio: f64,
}

fn l2w(f: &[f64], w: &[f64]) -> f64 {
    f.iter().zip(w).map(|(x, wi)| wi * x * x).sum::<f64>().sqrt()
}

/// Truncated Rubio de Francia series of `h >= 0` with constant `c`.
/// Fails with [`Error::Divergent`] when the term norms stop shrinking.
pub fn rubio_de_francia(h: &[f64], w: &Weight, terms: usize, c: f64) -> Result<RdfResult> {
    let n = w.values().len();
    if h.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: h.len() });
    }
    if terms == 0 {
        return Err(Error::Domain("at least one term is needed"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain("the series constant must be positive"));
    }
    if let Some(cell) = h.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidWeight { cell, reason: "seed must be finite and nonnegative" });
    }
    let wv = w.values();
    let scale = 2.0 * c * ap_up(w, 2.0, None)?;
    let h_norm = l2w(h, wv);
    let mut rh = h.to_vec();
    let mut term = h.to_vec();
    let mut prev = h_norm;
    let mut max_term_ratio: f64 = 0.0;
    for k in 1..=terms {
        term = rdf_step(&term, w);
        term.iter_mut().for_each(|x| *x /= scale);
        let norm = l2w(&term, wv);
        if prev > 0.0 {
            let ratio = norm / prev;
            if ratio >= 1.0 {
                return Err(Error::Divergent { term: k, ratio });
            }
            max_term_ratio = max_term_ratio.max(ratio);
        }
        prev = norm;
        if k < terms {
            rh.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
        }
    }
    // `term` is now the first dropped term; the rest shrink geometrically.
    let q = max_term_ratio.max(0.5);
    let tail = if h_norm > 0.0 { prev / (1.0 - q) / h_norm } else { 0.0 };
    let s_rh = rdf_step(&rh, w);
    let mut a1_ratio: f64 = 0.0;
    let mut next: f64 = 0.0;
    for i in w.support().cells().filter(|&i| rh[i] > 0.0) {
        a1_ratio = a1_ratio.max(s_rh[i] / rh[i]);
        next = next.max(term[i] / rh[i]);
    }
    Ok(RdfResult {
        norm_ratio: if h_norm > 0.0 { l2w(&rh, wv) / h_norm } else { 0.0 },
        rh,
        scale,
        terms,
        tail,
        a1_ratio,
        a1_bound: scale * (1.0 + next),
        max_term_ratio,
    })
}

/// One `(f, h)` pair of the extrapolation chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationEntry {
    /// `[w·Rh]_{A₁↑(ℍ)} / [w]_{A₂↑}`.
    pub a1_ratio: f64,
    /// `‖f‖_{L¹(w·Rh)}` for `f`, `h` normalized in `L²(w)`.
    pub l1_norm: f64,
    /// `‖Rh‖_{L²(w)} / ‖h‖_{L²(w)}`.
    pub rh_norm_ratio: f64,
    pub tail: f64,
    /// `sup_λ λ (w·Rh)({|Tf| > λ}) / ‖f‖_{L¹(w·Rh)}` over `[v] log(e + [v])`
    /// with `v = w·Rh`.
    pub weak_normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationReport {
    pub a2: f64,
    pub constant: f64,
    pub entries: Vec<ExtrapolationEntry>,
}

impl ExtrapolationReport {
    pub fn max_a1_ratio(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.a1_ratio))
    }

    pub fn max_l1_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.l1_norm))
    }
}

fn normalized(f: &[f64], w: &[f64], cell_width: f64) -> Result<Vec<f64>> {
    let n = l2w(f, w) * cell_width.sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::ZeroMass("corpus function with zero L²(w) norm"));
    }
    Ok(f.iter().map(|x| x / n).collect())
}

/// Every `f` is paired with every `h`. Each `h` must be positive on `ℍ` so
/// that `w·Rh` is a weight.
pub fn extrapolation_check(
    t: &OperatorMatrix,
    w: &Weight,
    f_corpus: &[Vec<f64>],
    h_corpus: &[Vec<f64>],
    terms: usize,
    c: f64,
) -> Result<ExtrapolationReport> {
    if t.direction() != Direction::Up {
        return Err(Error::Domain("extrapolation takes an upward-mapping operator"));
    }
    let wv = w.values();
    let sup = w.support();
    let cw = w.grid().cell_width();
    let a2 = ap_up(w, 2.0, None)?;
    let mut entries = Vec::with_capacity(f_corpus.len() * h_corpus.len());
    for h in h_corpus {
        let h = normalized(h, wv, cw)?;
        let rdf = rubio_de_francia(&h, w, terms, c)?;
        let v = w.multiplied(&rdf.rh)?;
        let char_v = a1_up_local(&v, sup)?;
        for f in f_corpus {
            let f = normalized(f, wv, cw)?;
            let l1_norm = sup.cells().map(|i| f[i].abs() * v.values()[i]).sum::<f64>() * cw;
            let mut fh = vec![0.0; f.len()];
            fh[sup.cells()].copy_from_slice(&f[sup.cells()]);
            let tf = t.apply(&fh);
            let weak = weak_l1_quasi_norm(&tf, v.values(), sup, cw);
            entries.push(ExtrapolationEntry {
                a1_ratio: char_v / a2,
                l1_norm,
                rh_norm_ratio: rdf.norm_ratio,
                tail: rdf.tail,
                weak_normalized: weak / l1_norm / (char_v * (core::f64::consts::E + char_v).ln()),
            });
        }
    }
    Ok(ExtrapolationReport { a2, constant: c, entries })
}

/// `(p p′ (r′)^{1/p′})^p / log(e + a)` with `p = 1 + 1/log(e + a)` and
/// `r = 1 + 1/(c·a)`, for a characteristic `a >= 1`.
pub fn proof_parameter_factor(a: f64, c: f64) -> Result<f64> {
    if !(a >= 1.0 && a.is_finite()) {
        return Err(Error::Domain("characteristic must be at least 1"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain("reverse Hölder constant must be positive"));
    }
    let log = (core::f64::consts::E + a).ln();
    let p = 1.0 + 1.0 / log;
    let p_dual = 1.0 + log;
    let r_dual = 1.0 + c * a;
    Ok((p * p_dual * r_dual.powf(1.0 / p_dual)).powf(p) / log)
}

/// `‖T_{I₀} f‖_{L^p(w, I₀)} / (p p′ (r′)^{1/p′} ‖f‖_{L^p(M↓_{I₀;r} w, I₀)})`.
pub fn mr_bound_ratio(t: &OperatorMatrix, w: &Weight, f: &[f64], i0: CellRange, p: f64, r: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite() && r > 1.0 && r.is_finite()) {
        return Err(Error::Domain("exponents must exceed 1"));
    }
    let n = w.values().len();
    if f.len() != n || t.n() != n {
        return Err(Error::LengthMismatch { expected: n, got: f.len().min(t.n()) });
    }
    if t.direction() != Direction::Up {
        return Err(Error::Domain("the bound is stated for upward-mapping operators"));
    }
    let wv = w.values();
    let mut fl = vec![0.0; n];
    fl[i0.cells()].copy_from_slice(&f[i0.cells()]);
    let tf = t.apply(&fl);
    let mw = max_down_r(wv, i0, r);
    let lhs: f64 = i0.cells().map(|i| tf[i].abs().powf(p) * wv[i]).sum::<f64>().powf(1.0 / p);
    let rhs: f64 = i0.cells().map(|i| f[i].abs().powf(p) * mw[i - i0.start]).sum::<f64>().powf(1.0 / p);
    if rhs == 0.0 {
        return Ok(0.0);
    }
    let pd = p / (p - 1.0);
    let rd = r / (r - 1.0);
    Ok(lhs / (p * pd * rd.powf(1.0 / pd) * rhs))
}
