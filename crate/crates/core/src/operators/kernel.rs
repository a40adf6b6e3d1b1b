//! Causal kernels and the Monte-Carlo axiom check.

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Which side of the diagonal a kernel lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `K(x, y) = 0` whenever `x < y`.
    Up,
    /// `K(x, y) = 0` whenever `x > y`.
    Down,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    /// Whether `(x, y)` is on the support side.
    pub fn admits(self, x: f64, y: f64) -> bool {
        match self {
            Direction::Up => x > y,
            Direction::Down => x < y,
        }
    }
}

/// A kernel with its declared size/smoothness constant `C` and exponent `ε`.
pub trait CausalKernel: Sync {
    fn eval(&self, x: f64, y: f64) -> f64;
    /// Constant `C` in the size and smoothness bounds.
    fn constant(&self) -> f64;
    /// Smoothness exponent `ε`.
    fn epsilon(&self) -> f64;
    fn direction(&self) -> Direction {
        Direction::Up
    }
}

impl<K: CausalKernel + ?Sized> CausalKernel for &K {
    fn eval(&self, x: f64, y: f64) -> f64 {
        (**self).eval(x, y)
    }
    fn constant(&self) -> f64 {
        (**self).constant()
    }
    fn epsilon(&self) -> f64 {
        (**self).epsilon()
    }
    fn direction(&self) -> Direction {
        (**self).direction()
    }
}

/// `χ_{x>y} / (x − y)`.
///
/// With `t = x − y` the smoothness sum is `2|h| / (t |t + h|)`, largest at
/// `h = −t/2` where it equals `4|h|/t²`. Size holds with constant 1.
#[derive(Debug, Clone, Copy, Default)]
pub struct CausalHilbert;

impl CausalKernel for CausalHilbert {
    fn eval(&self, x: f64, y: f64) -> f64 {
        if x > y {
            (x - y).recip()
        } else {
            0.0
        }
    }
    fn constant(&self) -> f64 {
        4.0
    }
    fn epsilon(&self) -> f64 {
        1.0
    }
}

/// `χ_{x>y} · sin(ln t) / (t (1 + |ln t|))` with `t = x − y`.
///
/// Writing `φ(t) = sin(ln t)/(1 + |ln t|)`, `|φ| <= 1` and `|t φ'(t)| <= 2`,
/// so `|d/dt (φ/t)| <= 3/t²` and on `|h| <= t/2` each difference is at most
/// `12|h|/t²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogOscillating;

impl CausalKernel for LogOscillating {
    fn eval(&self, x: f64, y: f64) -> f64 {
        if x > y {
            let t = x - y;
            let l = t.ln();
            l.sin() / (t * (1.0 + l.abs()))
        } else {
            0.0
        }
    }
    fn constant(&self) -> f64 {
        24.0
    }
    fn epsilon(&self) -> f64 {
        1.0
    }
}

/// A kernel given by a closure.
pub struct FnKernel<F> {
    f: F,
    constant: f64,
    epsilon: f64,
    direction: Direction,
}

impl<F> FnKernel<F>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    pub fn new(f: F, constant: f64, epsilon: f64, direction: Direction) -> Self {
        Self { f, constant, epsilon, direction }
    }
}

impl<F> core::fmt::Debug for FnKernel<F> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnKernel")
            .field("constant", &self.constant)
            .field("epsilon", &self.epsilon)
            .field("direction", &self.direction)
            .finish_non_exhaustive()
    }
}

impl<F> CausalKernel for FnKernel<F>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }
    fn constant(&self) -> f64 {
        self.constant
    }
    fn epsilon(&self) -> f64 {
        self.epsilon
    }
    fn direction(&self) -> Direction {
        self.direction
    }
}

/// The zero kernel.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroKernel;

impl CausalKernel for ZeroKernel {
    fn eval(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn constant(&self) -> f64 {
        0.0
    }
    fn epsilon(&self) -> f64 {
        1.0
    }
}

/// `K'(x, y) = K(y, x)`.
#[derive(Debug, Clone, Copy)]
pub struct Transposed<K>(pub K);

impl<K: CausalKernel> CausalKernel for Transposed<K> {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.0.eval(y, x)
    }
    fn constant(&self) -> f64 {
        self.0.constant()
    }
    fn epsilon(&self) -> f64 {
        self.0.epsilon()
    }
    fn direction(&self) -> Direction {
        self.0.direction().flip()
    }
}

/// Worst observed ratios in [`kernel_axioms_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomReport {
    pub samples: usize,
    /// Largest `|K(x, y)|` seen on the vanishing side.
    pub causality_violation: f64,
    /// Largest `|K(x, y)| · |x − y|`.
    pub size_constant: f64,
    /// Largest `(|K(x,y) − K(x+h,y)| + |K(x,y) − K(x,y−h)|) · |x−y|^(1+ε) / |h|^ε`.
    pub smoothness_constant: f64,
    pub declared_constant: f64,
    pub passes: bool,
}

fn smooth_ratio<K: CausalKernel>(k: &K, x: f64, y: f64, h: f64) -> f64 {
    let t = (x - y).abs();
    let eps = k.epsilon();
    let k0 = k.eval(x, y);
    let d = (k0 - k.eval(x + h, y)).abs() + (k0 - k.eval(x, y - h)).abs();
    d * t.powf(1.0 + eps) / h.abs().powf(eps)
}

/// Samples `samples` admissible triples with `x, y` in `[lo, hi)` and reports
/// the worst ratios, refining locally around the worst smoothness sample.
pub fn kernel_axioms_check<K: CausalKernel>(kernel: &K, lo: f64, hi: f64, samples: usize, seed: u64) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = kernel.direction();
    let mut causality: f64 = 0.0;
    let mut size: f64 = 0.0;
    let mut smooth: f64 = 0.0;
    let mut worst = (lo, lo, 0.0);
    let span = hi - lo;
    for _ in 0..samples {
        let x = rng.gen_range(lo..hi);
        let y = rng.gen_range(lo..hi);
        if x == y {
            continue;
        }
        let kv = kernel.eval(x, y);
        if !dir.admits(x, y) {
            causality = causality.max(kv.abs());
            continue;
        }
        let t = (x - y).abs();
        size = size.max(kv.abs() * t);
        // |h| <= t/2 keeps x + h on the same side of y; log-uniform magnitude.
        let mag = 0.5 * t * (rng.gen_range(-12.0..0.0f64)).exp2();
        let h = if rng.gen_bool(0.5) { mag } else { -mag };
        let s = smooth_ratio(kernel, x, y, h);
        if s > smooth {
            smooth = s;
            worst = (x, y, h);
        }
    }
    // Local refinement of the worst smoothness triple.
    let (mut bx, mut by, mut bh) = worst;
    for round in 0..200 {
        let scale = span * 1e-3 / (1 + round / 20) as f64;
        let x = bx + rng.gen_range(-scale..scale);
        let y = by + rng.gen_range(-scale..scale);
        if !dir.admits(x, y) {
            continue;
        }
        let t = (x - y).abs();
        let h = (bh * rng.gen_range(0.9..1.1)).clamp(-0.5 * t, 0.5 * t);
        if h == 0.0 {
            continue;
        }
        let s = smooth_ratio(kernel, x, y, h);
        if s > smooth {
            smooth = s;
            (bx, by, bh) = (x, y, h);
        }
    }
    let c = kernel.constant();
    let tol = 1e-9;
    AxiomReport {
        samples,
        causality_violation: causality,
        size_constant: size,
        smoothness_constant: smooth,
        declared_constant: c,
        passes: causality == 0.0 && size <= c * (1.0 + tol) && smooth <= c * (1.0 + tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_axioms() {
        let r = kernel_axioms_check(&CausalHilbert, 0.0, 1.0, 20_000, 1);
        assert!(r.passes, "{r:?}");
        assert_eq!(r.causality_violation, 0.0);
        assert!((r.size_constant - 1.0).abs() < 1e-9);
        // The supremum 4 is approached at h = -t/2.
        assert!(r.smoothness_constant > 3.5 && r.smoothness_constant <= 4.0 + 1e-9, "{r:?}");
    }

    #[test]
    fn hilbert_smoothness_sup_at_half() {
        let (x, y) = (0.7, 0.2);
        let s = smooth_ratio(&CausalHilbert, x, y, -0.25);
        assert!((s - 4.0).abs() < 1e-12);
    }

    #[test]
    fn log_oscillating_axioms() {
        let r = kernel_axioms_check(&LogOscillating, 0.0, 4.0, 20_000, 2);
        assert!(r.passes, "{r:?}");
        assert!(r.size_constant <= 1.0);
    }

    #[test]
    fn symmetric_kernel_violates_causality() {
        let k = FnKernel::new(|x: f64, y: f64| 1.0 / (1.0 + (x - y).abs()), 10.0, 1.0, Direction::Up);
        let r = kernel_axioms_check(&k, 0.0, 1.0, 1000, 3);
        assert!(!r.passes);
        assert!(r.causality_violation > 0.0);
    }

    #[test]
    fn zero_kernel_passes() {
        let r = kernel_axioms_check(&ZeroKernel, 0.0, 1.0, 1000, 4);
        assert!(r.passes);
        assert_eq!(r.size_constant, 0.0);
        assert_eq!(r.smoothness_constant, 0.0);
    }

    #[test]
    fn transposed_is_downward() {
        let t = Transposed(CausalHilbert);
        assert_eq!(t.direction(), Direction::Down);
        assert_eq!(t.eval(0.2, 0.7), CausalHilbert.eval(0.7, 0.2));
        assert!(kernel_axioms_check(&t, 0.0, 1.0, 5000, 5).passes);
    }
}
