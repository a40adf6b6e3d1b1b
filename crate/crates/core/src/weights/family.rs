//! Deterministic weight families and the standard corpus.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::Grid;
use crate::error::{Error, Result};
use crate::weights::Weight;
#[allow(unused_imports)]
use num_traits::Float;

/// Parametrized weight families. Coordinates are physical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// `|x − center|^exponent`.
    Power { exponent: f64, center: f64 },
    /// `exp(−rate·x)`, decreasing for `rate > 0`.
    ExpMonotone { rate: f64 },
    /// `exp(−rate·x)` below `z`, zero above.
    Cutoff { z: f64, rate: f64 },
    /// Product of independent factors, one per interval of the standard
    /// dyadic tree, each log-uniform in `[1/β, β]`.
    RandomDyadic { beta: f64 },
}

impl WeightKind {
    pub fn name(&self) -> &'static str {
        match self {
            WeightKind::Power { .. } => "power",
            WeightKind::ExpMonotone { .. } => "exp_monotone",
            WeightKind::Cutoff { .. } => "cutoff",
            WeightKind::RandomDyadic { .. } => "random_dyadic",
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        let ok = match *self {
            WeightKind::Power { exponent, center } => exponent.is_finite() && exponent > -1.0 && center.is_finite(),
            WeightKind::ExpMonotone { rate } => rate.is_finite(),
            WeightKind::Cutoff { z, rate } => rate.is_finite() && z > grid.lo() && z.is_finite(),
            WeightKind::RandomDyadic { beta } => beta.is_finite() && beta >= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("invalid weight family parameters"))
        }
    }
}

/// The weight of `kind` on `grid`; `seed` only matters for random kinds.
pub fn family_generate(grid: &Grid, kind: WeightKind, seed: u64) -> Result<Weight> {
    kind.validate(grid)?;
    match kind {
        WeightKind::Power { exponent, center } => {
            if exponent == 0.0 {
                return Ok(Weight::constant(grid, 1.0));
            }
            Weight::from_fn(grid, |x| (x - center).abs().powf(exponent), None)
        }
        WeightKind::ExpMonotone { rate } => Weight::from_fn(grid, |x| (-rate * x).exp(), None),
        WeightKind::Cutoff { z, rate } => Weight::from_fn(grid, |x| (-rate * x).exp(), Some(z)),
        WeightKind::RandomDyadic { beta } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lb = beta.ln();
            let n = grid.n();
            let mut values = vec![1.0; n];
            // Top-down: every interval of level k below the root draws a factor for its cells.
            for k in (0..grid.m()).rev() {
                let size = 1usize << k;
                for block in values.chunks_mut(size) {
                    let f = if lb > 0.0 { rng.gen_range(-lb..=lb).exp() } else { 1.0 };
                    block.iter_mut().for_each(|v| *v *= f);
                }
            }
            Weight::new(grid, values, None)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub kind: WeightKind,
    pub seed: u64,
    pub weight: Weight,
}

/// A reproducible mixed corpus of `size` weights: the constant weight, then
/// power, decreasing exponential, cutoff and random dyadic weights in turn.
pub fn standard_corpus(grid: &Grid, size: usize, seed: u64) -> Result<Vec<CorpusEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = grid.hi() - grid.lo();
    let mut out = Vec::with_capacity(size);
    for k in 0..size {
        let s: u64 = rng.gen();
        let kind = match k % 4 {
            _ if k == 0 => WeightKind::Power { exponent: 0.0, center: grid.lo() },
            0 => WeightKind::Power { exponent: rng.gen_range(-0.9..0.9), center: grid.lo() + span * rng.gen_range(0.1..0.9) },
            1 => WeightKind::ExpMonotone { rate: rng.gen_range(-6.0..6.0) / span },
            2 => WeightKind::Cutoff { z: grid.lo() + span * rng.gen_range(0.3..1.0), rate: rng.gen_range(-4.0..4.0) / span },
            _ => WeightKind::RandomDyadic { beta: [2.0, 4.0, 8.0][rng.gen_range(0..3)] },
        };
        let weight = family_generate(grid, kind, s)?;
        out.push(CorpusEntry { id: corpus_id(k, &kind), kind, seed: s, weight });
    }
    Ok(out)
}

fn corpus_id(k: usize, kind: &WeightKind) -> String {
    match *kind {
        WeightKind::Power { exponent, center } => format!("{k:03}-power-a{exponent:.4}-c{center:.4}"),
        WeightKind::ExpMonotone { rate } => format!("{k:03}-exp-r{rate:.4}"),
        WeightKind::Cutoff { z, rate } => format!("{k:03}-cutoff-z{z:.4}-r{rate:.4}"),
        WeightKind::RandomDyadic { beta } => format!("{k:03}-dyadic-b{beta}"),
    }
}
