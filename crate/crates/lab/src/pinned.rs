//! Constants pinned from the first release run of the suite, rounded up in
//! the fourth significant digit. The suite enforces each with 10% slack.

/// `max K / [μ,ν]²` over the fitted corpus.
pub const C1: f64 = 0.3781;
/// `max lemma_avg_ratio / [μ,ν]`.
pub const C2: f64 = 0.5967;
/// Largest Carleson ratio for `j = 0, 1, 2`.
pub const C3: [f64; 3] = [3.496, 0.1513, 5.259e-4];
/// `max ‖T‖ / ([w](1 + log[w]))` over the power sweep at `m = 10`.
pub const RATIO1: f64 = 6.677;
/// `max √K_gl / ([w] log(e + [w]))` over the same sweep.
pub const RATIO2: f64 = 5.015;
/// `max (p p′ (r′)^{1/p′})^p / log(e + [w])` over `[1, 10⁶]`.
pub const C4: f64 = 15.33;
