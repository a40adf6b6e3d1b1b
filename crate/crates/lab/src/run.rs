//! Subcommands. Each produces a [`ReportBundle`] in memory; nothing here
//! writes to disk except [`ReportBundle::write_to`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use onesided_core::analysis::build_sparse;
use onesided_core::operators::{weighted_operator_norm, NormMode};
use onesided_core::testing::testing_report;
use onesided_core::weaktype::{rdf_constant, rubio_de_francia, two_weight_maximal_check, weak11_experiment};
use onesided_core::weights::{ap_classical, ap_down, ap_up, joint_characteristic};
use onesided_core::{Grid, Lattice, MeasurePair};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::corpus::{corpus_hash, density_corpus, materialize, NamedWeight};
use crate::error::{LabError, Result};
use crate::formats::{plot_csv, sweep_csv, table_csv, to_json, FittedConstants, InvariantResult, SparseTreeRecord, SweepMeta};
use crate::suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Characteristic,
    Norm,
    Testing,
    Sparse,
    Czdecomp,
    Weak,
    Sweep,
    Verify,
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub m: Option<u32>,
    pub threads: Option<usize>,
}

/// Everything a subcommand produced: files by name, invariant results and
/// the text for standard output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportBundle {
    pub files: BTreeMap<String, String>,
    pub invariants: Vec<InvariantResult>,
    pub stdout: String,
}

impl ReportBundle {
    pub fn passed(&self) -> bool {
        self.invariants.iter().all(|i| i.passed)
    }

    fn invariant(&mut self, id: impl Into<String>, name: &str, passed: bool, detail: impl Into<String>) {
        self.invariants.push(InvariantResult { id: id.into(), name: name.to_string(), passed, detail: detail.into() });
    }

    fn file(&mut self, name: &str, contents: String) {
        self.files.insert(name.to_string(), contents);
    }

    /// Writes every file, plus `invariants.json` when invariants were checked.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
        let mut files = self.files.clone();
        if !self.invariants.is_empty() {
            files.insert("invariants.json".into(), to_json(&self.invariants)?);
        }
        for (name, body) in &files {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| LabError::io(p, e))?;
        }
        Ok(())
    }
}

/// Runs `cmd` on a pool of `opts.threads` workers (all cores by default).
pub fn run(cmd: Subcommand, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ReportBundle> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| LabError::Resource(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cmd, cfg, opts))
}

fn dispatch(cmd: Subcommand, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ReportBundle> {
    let seed = opts.seed.unwrap_or(cfg.seed);
    let ms = match opts.m {
        Some(m) if !(1..=crate::config::MAX_M).contains(&m) => {
            return Err(LabError::config("--m", format!("must lie in 1..={}", crate::config::MAX_M)))
        }
        Some(m) => vec![m],
        None => cfg.grid.m.clone(),
    };
    let dense = matches!(cmd, Subcommand::Norm | Subcommand::Testing | Subcommand::Sweep | Subcommand::Weak);
    if dense {
        for &m in &ms {
            cfg.check_dense(m)?;
        }
    }
    let ctx = Ctx { cfg, seed, ms };
    match cmd {
        Subcommand::Characteristic => ctx.characteristic(),
        Subcommand::Norm => ctx.norm(),
        Subcommand::Testing => ctx.testing(),
        Subcommand::Sparse => ctx.sparse(),
        Subcommand::Czdecomp => ctx.czdecomp(),
        Subcommand::Weak => ctx.weak(),
        Subcommand::Sweep => ctx.sweep(),
        Subcommand::Verify => Ok(verify()),
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    ms: Vec<u32>,
}

/// Rows for one grid size, computed in parallel and kept in corpus order.
fn per_weight<T: Send>(weights: &[NamedWeight], f: impl Fn(&NamedWeight) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    weights.par_iter().map(f).collect()
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

impl Ctx<'_> {
    fn grids(&self) -> Result<Vec<(Grid, Vec<NamedWeight>)>> {
        self.ms
            .iter()
            .map(|&m| {
                let g = self.cfg.grid.grid(m)?;
                let w = materialize(self.cfg, &g)?;
                Ok((g, w))
            })
            .collect()
    }

    fn characteristic(&self) -> Result<ReportBundle> {
        let mut b = ReportBundle::default();
        let mut rows = Vec::new();
        for (g, weights) in self.grids()? {
            let vals = per_weight(&weights, |e| {
                let w = &e.weight;
                Ok([
                    ap_up(w, 2.0, None)?,
                    ap_down(w, 2.0, None)?,
                    ap_classical(w, 2.0, None)?,
                    joint_characteristic(&MeasurePair::from_weight(w))?,
                ])
            })?;
            for (e, v) in weights.iter().zip(vals) {
                writeln!(b.stdout, "{} m={} {}", e.id, g.m(), num(v[0])).expect("string write");
                let mut row = vec![e.id.clone(), g.m().to_string()];
                row.extend(v.iter().map(|x| num(*x)));
                rows.push(row);
            }
        }
        b.file("characteristic.csv", table_csv(&["weight_id", "m", "A2_up", "A2_down", "A2", "joint"], &rows)?);
        Ok(b)
    }

    fn norm(&self) -> Result<ReportBundle> {
        let mut b = ReportBundle::default();
        let mut rows = Vec::new();
        for (g, weights) in self.grids()? {
            let t = self.cfg.kernel.matrix(&g)?;
            let vals = per_weight(&weights, |e| Ok((ap_up(&e.weight, 2.0, None)?, weighted_operator_norm(&t, &e.weight, NormMode::L2w)?)))?;
            for (e, (c, n)) in weights.iter().zip(vals) {
                writeln!(b.stdout, "{} m={} char={} norm={}", e.id, g.m(), num(c), num(n)).expect("string write");
                rows.push(vec![e.id.clone(), g.m().to_string(), num(c), num(n)]);
            }
        }
        b.file("norm.csv", table_csv(&["weight_id", "m", "char", "norm"], &rows)?);
        Ok(b)
    }

    fn testing(&self) -> Result<ReportBundle> {
        #[derive(Serialize)]
        struct Record {
            weight_id: String,
            m: u32,
            characteristic: f64,
            k_chi: f64,
            k_sl: f64,
            k_gl: f64,
            k_wb: f64,
            k_wb_near: f64,
            norm: f64,
            weak2_lower: f64,
            weak2_dual_lower: f64,
            /// `√K_gl / (weak₂ + weak₂′)`.
            kgl_to_weak: f64,
        }
        let mut b = ReportBundle::default();
        let mut records = Vec::new();
        let mut all = Vec::new();
        for (g, weights) in self.grids()? {
            let t = self.cfg.kernel.matrix(&g)?;
            let reps = per_weight(&weights, |e| Ok(testing_report(&t, &e.weight, self.seed)?))?;
            for (e, r) in weights.iter().zip(reps) {
                let chain = r.primal.k_chi <= r.primal.k_sl && r.primal.k_sl <= r.primal.k_gl;
                let weak_ok = r.weak_norm_t <= r.norm_l2w * (1.0 + suite::SVD_TOLERANCE);
                b.invariant(
                    format!("{}-m{}", e.id, g.m()),
                    "testing chain and weak <= strong",
                    chain && weak_ok,
                    format!("K_chi {} K_sl {} K_gl {}", num(r.primal.k_chi), num(r.primal.k_sl), num(r.primal.k_gl)),
                );
                writeln!(b.stdout, "{} m={} K_gl={} norm={}", e.id, g.m(), num(r.k_gl), num(r.norm_l2w)).expect("string write");
                records.push(Record {
                    weight_id: e.id.clone(),
                    m: g.m(),
                    characteristic: r.characteristic,
                    k_chi: r.k_chi,
                    k_sl: r.k_sl,
                    k_gl: r.k_gl,
                    k_wb: r.k_wb,
                    k_wb_near: r.k_wb_near,
                    norm: r.norm_l2w,
                    weak2_lower: r.weak_norm_t,
                    weak2_dual_lower: r.weak_norm_tprime,
                    kgl_to_weak: r.k_gl.sqrt() / (r.weak_norm_t + r.weak_norm_tprime),
                });
            }
            all.extend(weights);
        }
        let fit = records.iter().fold(0.0f64, |m, r| m.max(r.kgl_to_weak));
        b.file("testing.json", to_json(&records)?);
        b.file(
            "fitted.json",
            to_json(&FittedConstants { corpus_hash: corpus_hash(&all), constants: BTreeMap::from([("kgl_to_weak".to_string(), fit)]) })?,
        );
        Ok(b)
    }

    fn sparse(&self) -> Result<ReportBundle> {
        #[derive(Serialize)]
        struct Entry {
            weight_id: String,
            m: u32,
            tree: SparseTreeRecord,
        }
        let mut b = ReportBundle::default();
        let mut entries = Vec::new();
        for (g, weights) in self.grids()? {
            let trees = per_weight(&weights, |e| {
                let mp = MeasurePair::from_weight(&e.weight);
                let k = onesided_core::analysis::pivotal_constant(&mp, g.whole(), Lattice::standard(), self.cfg.eps)?;
                let root = Lattice::standard().interval(g.m(), 0);
                Ok(build_sparse(&root, k, self.cfg.stop_multiplier, &mp, self.cfg.eps)?)
            })?;
            for (e, tree) in weights.iter().zip(trees) {
                let c = tree.check();
                // Sparsity is only guaranteed from multiplier 2 up.
                let sparse_ok = if tree.multiplier >= 2.0 { c.holds() } else { c.child_ratio <= 1.0 / tree.multiplier };
                b.invariant(
                    format!("{}-m{}", e.id, g.m()),
                    "sparse tree",
                    tree.is_consistent() && sparse_ok,
                    format!("{} nodes, child ratio {}, packing {}", tree.len(), num(c.child_ratio), num(c.pack_ratio)),
                );
                writeln!(b.stdout, "{} m={} nodes={} K={}", e.id, g.m(), tree.len(), num(tree.pivotal)).expect("string write");
                entries.push(Entry { weight_id: e.id.clone(), m: g.m(), tree: SparseTreeRecord::new(&tree, &g) });
            }
        }
        b.file("sparse.json", to_json(&entries)?);
        Ok(b)
    }

    fn czdecomp(&self) -> Result<ReportBundle> {
        #[derive(Serialize)]
        struct Entry {
            m: u32,
            case: usize,
            lambda: f64,
            components: Vec<(usize, usize, f64)>,
            average_defect: f64,
            g_excess: f64,
            mean_defect: f64,
            h_ratio: f64,
            residual: f64,
        }
        let mut b = ReportBundle::default();
        let mut entries = Vec::new();
        for &m in &self.ms {
            let g = self.cfg.grid.grid(m)?;
            let cases = density_corpus(g.n(), g.whole(), 20, self.seed);
            let reps = cases
                .par_iter()
                .map(|c| {
                    let cz = onesided_core::weaktype::cz_split(&c.f, c.lambda, g.whole())?;
                    Ok((cz.invariants(&c.f), cz))
                })
                .collect::<Result<Vec<_>>>()?;
            for (k, (inv, cz)) in reps.into_iter().enumerate() {
                let ok = inv.hold() && inv.h_ratio <= 2.0;
                b.invariant(
                    format!("cz-m{m}-{k}"),
                    "Calderon-Zygmund invariants",
                    ok,
                    format!("{} components, h ratio {}", cz.components.len(), num(inv.h_ratio)),
                );
                entries.push(Entry {
                    m,
                    case: k,
                    lambda: cz.lambda,
                    components: cz.components.iter().map(|c| (c.interval.start, c.interval.end, c.average)).collect(),
                    average_defect: inv.average_defect,
                    g_excess: inv.g_excess,
                    mean_defect: inv.mean_defect,
                    h_ratio: inv.h_ratio,
                    residual: inv.residual,
                });
            }
            writeln!(b.stdout, "m={m}: {} decompositions", cases.len()).expect("string write");
        }
        b.file("czdecomp.json", to_json(&entries)?);
        Ok(b)
    }

    fn weak(&self) -> Result<ReportBundle> {
        #[derive(Serialize)]
        struct Entry {
            weight_id: String,
            m: u32,
            characteristic: f64,
            max_normalized: f64,
            max_omega_tilde_ratio: f64,
            max_extension_ratio: f64,
            covering: bool,
            two_weight_ratio: f64,
            two_weight_holds: bool,
            rdf_norm_ratio: f64,
            rdf_tail: f64,
            rdf_a1_ratio: f64,
        }
        let mut b = ReportBundle::default();
        let mut entries = Vec::new();
        for (g, weights) in self.grids()? {
            let t = self.cfg.kernel.matrix(&g)?;
            if t.direction() != onesided_core::Direction::Up {
                return Err(LabError::config("kernel.direction", "the weak subcommand takes an upward kernel"));
            }
            let rows = per_weight(&weights, |e| {
                let w = &e.weight;
                let i0 = w.support();
                let cases = density_corpus(g.n(), i0, 8, self.seed);
                let mut en = Entry {
                    weight_id: e.id.clone(),
                    m: g.m(),
                    characteristic: onesided_core::weights::a1_up_local(w, i0)?,
                    max_normalized: 0.0,
                    max_omega_tilde_ratio: 0.0,
                    max_extension_ratio: 0.0,
                    covering: true,
                    two_weight_ratio: 0.0,
                    two_weight_holds: true,
                    rdf_norm_ratio: 0.0,
                    rdf_tail: 0.0,
                    rdf_a1_ratio: 0.0,
                };
                for c in &cases {
                    let r = weak11_experiment(&t, w, &c.f, i0, c.lambda)?;
                    en.max_normalized = en.max_normalized.max(r.normalized);
                    en.max_omega_tilde_ratio = en.max_omega_tilde_ratio.max(r.omega_tilde_ratio);
                    en.max_extension_ratio = en.max_extension_ratio.max(r.extension_ratio);
                    en.covering &= r.covering_holds;
                    let two = two_weight_maximal_check(w, w, i0, &c.f, c.lambda)?;
                    en.two_weight_ratio = en.two_weight_ratio.max(two.ratio);
                    en.two_weight_holds &= two.holds();
                }
                let h: Vec<f64> = (0..g.n()).map(|i| if i0.contains_cell(i) { 1.0 } else { 0.0 }).collect();
                let rdf = rubio_de_francia(&h, w, 30, rdf_constant(w, self.seed)?)?;
                en.rdf_norm_ratio = rdf.norm_ratio;
                en.rdf_tail = rdf.tail;
                en.rdf_a1_ratio = rdf.a1_ratio;
                Ok(en)
            })?;
            for en in rows {
                let ok = en.covering
                    && en.max_extension_ratio <= 1.0 + suite::ROUNDING
                    && en.two_weight_holds
                    && en.two_weight_ratio <= 1.0 + suite::ROUNDING
                    && en.rdf_norm_ratio <= 2.0 + en.rdf_tail;
                b.invariant(
                    format!("{}-m{}", en.weight_id, en.m),
                    "weak (1,1) pieces",
                    ok,
                    format!(
                        "extension {}, two-weight {}, Rh norm {}",
                        num(en.max_extension_ratio),
                        num(en.two_weight_ratio),
                        num(en.rdf_norm_ratio)
                    ),
                );
                writeln!(b.stdout, "{} m={} A1={} weak/([w]log)={}", en.weight_id, en.m, num(en.characteristic), num(en.max_normalized))
                    .expect("string write");
                entries.push(en);
            }
        }
        b.file("weak.json", to_json(&entries)?);
        Ok(b)
    }

    fn sweep(&self) -> Result<ReportBundle> {
        let mut b = ReportBundle::default();
        let mut rows = Vec::new();
        let mut all = Vec::new();
        for &m in &self.ms {
            let g = self.cfg.grid.grid(m)?;
            let t = self.cfg.kernel.matrix(&g)?;
            let weights = suite::sweep_weights(&g, &self.cfg.sweep.exponents, self.cfg.sweep.center)?;
            rows.extend(suite::sweep_rows(&t, &weights, self.seed)?);
            all.extend(weights);
        }
        onesided_core::testing::sort_rows(&mut rows);
        for r in &rows {
            writeln!(
                b.stdout,
                "{} m={} char={} norm={} ratio1={} ratio2={} ratio3={}",
                r.weight_id,
                r.m,
                num(r.characteristic),
                num(r.norm),
                num(r.ratio1),
                num(r.ratio2),
                num(r.ratio3)
            )
            .expect("string write");
        }
        let hash = corpus_hash(&all);
        let mut constants = BTreeMap::new();
        if rows.len() >= 2 {
            let (r1, r2, r3, slope) = suite::sweep_summary(&rows)?;
            constants.extend([
                ("ratio1".to_string(), r1),
                ("ratio2".to_string(), r2),
                ("ratio3".to_string(), r3),
                ("slope".to_string(), slope),
            ]);
        }
        let meta = SweepMeta {
            kernel: self.cfg.kernel.name(),
            band: self.cfg.kernel.band,
            r: self.cfg.goodness_r,
            seeds: vec![self.seed],
            m: self.ms.clone(),
            corpus_hash: hash.clone(),
        };
        b.file("sweep.csv", sweep_csv(&rows)?);
        b.file("sweep.meta.json", to_json(&meta)?);
        b.file("fitted.json", to_json(&FittedConstants { corpus_hash: hash, constants })?);
        b.file("plot_char_norm.csv", plot_csv("char", "norm", rows.iter().map(|r| (r.characteristic, r.norm)))?);
        b.file("plot_char_sqrt_kgl.csv", plot_csv("char", "sqrt_K_gl", rows.iter().map(|r| (r.characteristic, r.k_gl.sqrt())))?);
        Ok(b)
    }
}

fn verify() -> ReportBundle {
    let mut b = ReportBundle::default();
    let mut fitted = Vec::new();
    for o in suite::run_all() {
        writeln!(
            b.stdout,
            "criterion {:>2} {}: {} [{:.2}s] {}",
            o.id,
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.elapsed.as_secs_f64(),
            o.detail
        )
        .expect("string write");
        b.invariant(format!("criterion-{}", o.id), o.name, o.passed, o.detail);
        if let (Some(hash), false) = (o.corpus_hash, o.fitted.is_empty()) {
            fitted.push(FittedConstants { corpus_hash: hash, constants: o.fitted.into_iter().collect() });
        }
    }
    b.file("fitted.json", to_json(&fitted).expect("fitted constants serialize"));
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_override_is_validated() {
        let cfg = ExperimentConfig::default();
        let e = run(Subcommand::Characteristic, &cfg, &RunOptions { m: Some(40), ..Default::default() }).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = run(Subcommand::Testing, &cfg, &RunOptions { m: Some(13), ..Default::default() }).unwrap_err();
        assert!(matches!(e, LabError::Resource(_)));
        // Non-dense modes accept larger grids.
        assert!(run(Subcommand::Czdecomp, &cfg, &RunOptions { m: Some(13), ..Default::default() }).is_ok());
    }

    #[test]
    fn seed_override_changes_random_weights() {
        let cfg =
            ExperimentConfig::from_json(r#"{"grid": {"m": [4]}, "weights": [{"family": {"kind": "random_dyadic", "beta": 4}}]}"#).unwrap();
        let a = run(Subcommand::Characteristic, &cfg, &RunOptions::default()).unwrap();
        let b = run(Subcommand::Czdecomp, &cfg, &RunOptions { seed: Some(5), ..Default::default() }).unwrap();
        let c = run(Subcommand::Czdecomp, &cfg, &RunOptions::default()).unwrap();
        assert_ne!(b.files, c.files);
        assert!(a.invariants.is_empty() && a.passed());
    }

    #[test]
    fn bundle_writes_invariants() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = ReportBundle::default();
        b.file("x.txt", "hello\n".into());
        b.write_to(dir.path()).unwrap();
        assert!(!dir.path().join("invariants.json").exists());
        b.invariant("a", "demo", false, "broken");
        assert!(!b.passed());
        b.write_to(dir.path()).unwrap();
        let inv: Vec<InvariantResult> =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("invariants.json")).unwrap()).unwrap();
        assert_eq!(inv, b.invariants);
        assert_eq!(std::fs::read_to_string(dir.path().join("x.txt")).unwrap(), "hello\n");
    }
}
