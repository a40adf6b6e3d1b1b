//! Weights named in a config, materialized on a grid.

use onesided_core::weights::{family_generate, standard_corpus};
use onesided_core::{CellRange, Grid, Weight};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, Family, WeightConfig};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedWeight {
    pub id: String,
    pub seed: u64,
    pub weight: Weight,
}

fn materialize_entry(entry: &WeightConfig, grid: &Grid, out: &mut Vec<NamedWeight>) -> Result<()> {
    let multi = entry.seeds.len() > 1;
    for &seed in &entry.seeds {
        let base = entry.id.clone().unwrap_or_else(|| entry.family.name().to_string());
        let tag = |id: String| if multi { format!("{id}-s{seed}") } else { id };
        match &entry.family {
            Family::Constant { value } => {
                out.push(NamedWeight { id: tag(base), seed, weight: Weight::constant(grid, *value) });
            }
            Family::Corpus { size } => {
                for e in standard_corpus(grid, *size, seed)? {
                    let id = match &entry.id {
                        Some(p) => format!("{p}-{}", e.id),
                        None => e.id,
                    };
                    out.push(NamedWeight { id: tag(id), seed: e.seed, weight: e.weight });
                }
            }
            f => {
                let kind = f.kind().expect("core family");
                out.push(NamedWeight { id: tag(base), seed, weight: family_generate(grid, kind, seed)? });
            }
        }
    }
    Ok(())
}

/// Every weight of the config on `grid`, in config order.
pub fn materialize(cfg: &ExperimentConfig, grid: &Grid) -> Result<Vec<NamedWeight>> {
    let mut out = Vec::new();
    for entry in &cfg.weights {
        materialize_entry(entry, grid, &mut out)?;
    }
    Ok(out)
}

/// Hex SHA-256 over the grid, the ids and the bit patterns of the values.
pub fn corpus_hash(weights: &[NamedWeight]) -> String {
    let mut h = Sha256::new();
    for w in weights {
        let g = w.weight.grid();
        h.update(g.lo().to_bits().to_le_bytes());
        h.update(g.hi().to_bits().to_le_bytes());
        h.update(g.m().to_le_bytes());
        h.update((w.id.len() as u64).to_le_bytes());
        h.update(w.id.as_bytes());
        for v in w.weight.values() {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// Hex SHA-256 over the bit patterns of `values`.
pub fn values_hash(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// A nonnegative density on `i0` and a level for it.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCase {
    pub f: Vec<f64>,
    pub lambda: f64,
}

/// `count` seeded densities on `i0 ⊆ [0, n)`, each with a level `λ` strictly
/// between `4⟨f⟩_{I₀}` and `max f`.
///
/// Each density lives in the lower three quarters of `I₀`, so a point of its
/// level set is at least `|I₀|/4` cells below `I₀.end`; a component reaching
/// the end would need an average above `λ` over that tail, which `λ > 4⟨f⟩`
/// rules out.
pub fn density_corpus(n: usize, i0: CellRange, count: usize, seed: u64) -> Vec<DensityCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = i0.len();
    let top = len - len / 4;
    let mut out = Vec::with_capacity(count);
    while out.len() < count && len >= 4 {
        let lo = rng.gen_range(0..top / 2);
        let hi = rng.gen_range(lo + 1..=top);
        let mut f = vec![0.0; n];
        for k in lo..hi {
            if rng.gen_bool(0.7) {
                f[i0.start + k] = rng.gen_range(0.0..4.0);
            }
        }
        let sup = f.iter().fold(0.0f64, |m, x| m.max(*x));
        let floor = 4.0 * f.iter().sum::<f64>() / len as f64;
        if !(floor < sup) {
            continue;
        }
        let lambda = rng.gen_range(floor..sup);
        if lambda > floor {
            out.push(DensityCase { f, lambda });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn ids_and_determinism() {
        let c = cfg(r#"{"weights": [
            {"family": {"kind": "constant"}},
            {"family": {"kind": "random_dyadic", "beta": 4}, "seeds": [1, 2], "id": "rd"},
            {"family": {"kind": "corpus", "size": 3}}
        ]}"#);
        let g = Grid::unit(6).unwrap();
        let a = materialize(&c, &g).unwrap();
        let ids: Vec<_> = a.iter().map(|w| w.id.as_str()).collect();
        assert_eq!(ids[..3], ["constant", "rd-s1", "rd-s2"]);
        assert_eq!(a.len(), 6);
        assert!(ids[3].starts_with("000-power"));
        let b = materialize(&c, &g).unwrap();
        assert_eq!(corpus_hash(&a), corpus_hash(&b));
        assert_eq!(corpus_hash(&a).len(), 64);
        assert_ne!(corpus_hash(&a), corpus_hash(&a[1..]));
        assert_ne!(corpus_hash(&a), corpus_hash(&materialize(&c, &Grid::unit(7).unwrap()).unwrap()));
    }

    #[test]
    fn densities_never_reach_the_end() {
        use onesided_core::weaktype::cz_split;
        let i0 = CellRange::new(16, 128);
        let cases = density_corpus(128, i0, 40, 3);
        assert_eq!(cases.len(), 40);
        assert_eq!(cases, density_corpus(128, i0, 40, 3));
        for c in &cases {
            assert!(c.f[..16].iter().all(|v| *v == 0.0));
            let cz = cz_split(&c.f, c.lambda, i0).unwrap();
            assert!(!cz.components.is_empty());
            assert!(cz.invariants(&c.f).hold());
        }
    }
}
