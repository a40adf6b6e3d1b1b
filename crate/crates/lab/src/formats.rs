//! File formats. Every writer returns the file contents so that reports can
//! be compared byte for byte before anything touches the disk.

use std::collections::BTreeMap;
use std::path::Path;

use onesided_core::analysis::SparseTree;
use onesided_core::testing::SweepRow;
use onesided_core::{Grid, OperatorMatrix, Weight};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w)?;
    let bytes = w.into_inner().map_err(|e| LabError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// `# lo=…,hi=…,m=…,cutoff=…` followed by `cell,value` rows.
pub fn weight_csv(w: &Weight) -> Result<String> {
    let g = w.grid();
    let cutoff = w.cutoff().map_or_else(|| "none".to_string(), |z| z.to_string());
    let mut out = format!("# lo={},hi={},m={},cutoff={}\n", g.lo(), g.hi(), g.m(), cutoff);
    out += &csv_string(|c| {
        c.write_record(["cell", "value"])?;
        for (i, v) in w.values().iter().enumerate() {
            c.write_record([i.to_string(), v.to_string()])?;
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn read_weight_csv(text: &str, path: &Path) -> Result<Weight> {
    let bad = |message: String| LabError::Format { what: "weight CSV", path: path.to_path_buf(), message };
    let (head, body) = text.split_once('\n').ok_or_else(|| bad("missing header line".into()))?;
    let head = head.strip_prefix("# ").ok_or_else(|| bad("first line must start with `# `".into()))?;
    let mut fields = BTreeMap::new();
    for kv in head.split(',') {
        let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("bad header field `{kv}`")))?;
        fields.insert(k.trim(), v.trim());
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(format!("header lacks `{k}`")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(format!("`{k}` is not a number"))) };
    let lo = num("lo")?;
    let hi = num("hi")?;
    let m: u32 = get("m")?.parse().map_err(|_| bad("`m` is not an integer".into()))?;
    let cutoff = match get("cutoff")? {
        "none" => None,
        _ => Some(num("cutoff")?),
    };
    let grid = Grid::new(lo, hi, m)?;
    let mut values = vec![f64::NAN; grid.n()];
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    for (row, rec) in rd.deserialize::<(usize, f64)>().enumerate() {
        let (cell, v) = rec?;
        if cell != row || cell >= values.len() {
            return Err(bad(format!("row {row} has cell {cell}")));
        }
        values[cell] = v;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(bad(format!("expected {} rows", grid.n())));
    }
    Ok(Weight::new(&grid, values, cutoff)?)
}

/// Row-major entries, one matrix row per line, no header.
pub fn matrix_csv(t: &OperatorMatrix) -> Result<String> {
    let e = t.entries();
    csv_string(|c| {
        for i in 0..e.rows() {
            c.write_record(e.row(i).iter().map(|v| v.to_string()))?;
        }
        Ok(())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseNodeRecord {
    pub start: i64,
    pub end: i64,
    pub lo: f64,
    pub hi: f64,
    pub parent: Option<usize>,
    pub generation: usize,
    pub stopping_value: f64,
    pub mu_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseTreeRecord {
    pub pivotal: f64,
    pub multiplier: f64,
    pub child_ratio: f64,
    pub pack_ratio: f64,
    pub nodes: Vec<SparseNodeRecord>,
}

impl SparseTreeRecord {
    pub fn new(tree: &SparseTree, grid: &Grid) -> Self {
        let check = tree.check();
        let nodes = tree
            .nodes
            .iter()
            .map(|n| SparseNodeRecord {
                start: n.interval.start(),
                end: n.interval.end(),
                lo: grid.edge(n.interval.start()),
                hi: grid.edge(n.interval.end()),
                parent: n.parent,
                generation: n.generation,
                stopping_value: n.stopping_value,
                mu_mass: n.mu_mass,
            })
            .collect();
        Self { pivotal: tree.pivotal, multiplier: tree.multiplier, child_ratio: check.child_ratio, pack_ratio: check.pack_ratio, nodes }
    }
}

pub const SWEEP_COLUMNS: [&str; 13] =
    ["weight_id", "m", "char", "norm", "K_chi", "K_sl", "K_gl", "K_WB", "weak2", "weak2_dual", "ratio1", "ratio2", "ratio3"];

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    csv_string(|c| {
        c.write_record(SWEEP_COLUMNS)?;
        for r in rows {
            let nums = [r.characteristic, r.norm, r.k_chi, r.k_sl, r.k_gl, r.k_wb, r.weak2, r.weak2_dual, r.ratio1, r.ratio2, r.ratio3];
            let mut rec = vec![r.weight_id.clone(), r.m.to_string()];
            rec.extend(nums.iter().map(|v| v.to_string()));
            c.write_record(&rec)?;
        }
        Ok(())
    })
}

/// Parses a sweep CSV back into rows.
pub fn read_sweep_csv(text: &str, path: &Path) -> Result<Vec<SweepRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != SWEEP_COLUMNS {
        return Err(LabError::Format { what: "sweep CSV", path: path.to_path_buf(), message: format!("unexpected columns {header:?}") });
    }
    let mut rows = Vec::new();
    for rec in rd.deserialize::<(String, u32, f64, f64, f64, f64, f64, f64, f64, f64, f64, f64, f64)>() {
        let (weight_id, m, characteristic, norm, k_chi, k_sl, k_gl, k_wb, weak2, weak2_dual, ratio1, ratio2, ratio3) = rec?;
        rows.push(SweepRow { weight_id, m, characteristic, norm, k_chi, k_sl, k_gl, k_wb, weak2, weak2_dual, ratio1, ratio2, ratio3 });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub kernel: String,
    pub band: usize,
    pub r: u32,
    pub seeds: Vec<u64>,
    pub m: Vec<u32>,
    pub corpus_hash: String,
}

/// Constants fitted on one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedConstants {
    pub corpus_hash: String,
    pub constants: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantResult {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A generic table with a header row.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    csv_string(|c| {
        c.write_record(header)?;
        for r in rows {
            c.write_record(r)?;
        }
        Ok(())
    })
}

/// Two-column plot data.
pub fn plot_csv(x_name: &str, y_name: &str, points: impl IntoIterator<Item = (f64, f64)>) -> Result<String> {
    csv_string(|c| {
        c.write_record([x_name, y_name])?;
        for (x, y) in points {
            c.write_record([x.to_string(), y.to_string()])?;
        }
        Ok(())
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use onesided_core::analysis::build_sparse;
    use onesided_core::operators::{discretize, CausalHilbert};
    use onesided_core::weights::{family_generate, WeightKind};
    use onesided_core::{Lattice, MeasurePair};

    #[test]
    fn weight_round_trip() {
        let g = Grid::new(-1.0, 3.0, 5).unwrap();
        let w = Weight::from_fn(&g, |x| (x + 2.0).sqrt(), Some(2.0)).unwrap();
        let text = weight_csv(&w).unwrap();
        assert!(text.starts_with("# lo=-1,hi=3,m=5,cutoff=2\ncell,value\n0,"));
        assert_eq!(read_weight_csv(&text, Path::new("w.csv")).unwrap(), w);
        let one = Weight::constant(&g, 1.0);
        assert_eq!(read_weight_csv(&weight_csv(&one).unwrap(), Path::new("w.csv")).unwrap(), one);
    }

    proptest::proptest! {
        #[test]
        fn weight_csv_round_trips(values in proptest::collection::vec(1e-6f64..1e6, 16), lo in -5.0f64..5.0, span in 0.1f64..10.0) {
            let g = Grid::new(lo, lo + span, 4).unwrap();
            let w = Weight::new(&g, values, None).unwrap();
            let back = read_weight_csv(&weight_csv(&w).unwrap(), Path::new("w.csv")).unwrap();
            proptest::prop_assert_eq!(back, w);
        }
    }

    #[test]
    fn weight_reader_rejects_garbage() {
        let p = Path::new("w.csv");
        for text in ["cell,value\n0,1\n", "# lo=0,hi=1,m=1,cutoff=none\ncell,value\n0,1\n", "# lo=0,hi=1,m=1\ncell,value\n0,1\n1,1\n"] {
            let e = read_weight_csv(text, p).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}: {e}");
        }
        assert!(read_weight_csv("# lo=0,hi=1,m=1,cutoff=none\ncell,value\n0,1\n1,x\n", p).is_err());
    }

    #[test]
    fn sweep_round_trip() {
        let row = SweepRow {
            weight_id: "a,b".into(),
            m: 4,
            characteristic: 1.0,
            norm: 2.5,
            k_chi: 0.1,
            k_sl: 0.2,
            k_gl: 0.3,
            k_wb: 0.4,
            weak2: 1.0 / 3.0,
            weak2_dual: 0.6,
            ratio1: 0.7,
            ratio2: 0.8,
            ratio3: 0.9,
        };
        let text = sweep_csv(std::slice::from_ref(&row)).unwrap();
        assert!(text.starts_with("weight_id,m,char,norm,K_chi,K_sl,K_gl,K_WB,weak2,weak2_dual,ratio1,ratio2,ratio3\n\"a,b\",4,1,2.5,"));
        assert_eq!(read_sweep_csv(&text, Path::new("s.csv")).unwrap(), vec![row]);
    }

    #[test]
    fn matrix_and_tree() {
        let g = Grid::unit(3).unwrap();
        let t = discretize(&CausalHilbert, &g, 1).unwrap();
        let text = matrix_csv(&t).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert!(text.lines().all(|l| l.split(',').count() == 8));
        let w = family_generate(&g, WeightKind::RandomDyadic { beta: 4.0 }, 1).unwrap();
        let mp = MeasurePair::from_weight(&w);
        let tree = build_sparse(&Lattice::standard().interval(3, 0), 1.0, 0.05, &mp, 1.0).unwrap();
        let rec = SparseTreeRecord::new(&tree, &g);
        assert_eq!(rec.nodes.len(), tree.len());
        assert_eq!((rec.nodes[0].lo, rec.nodes[0].hi, rec.nodes[0].parent), (0.0, 1.0, None));
        let back: SparseTreeRecord = serde_json::from_str(&to_json(&rec).unwrap()).unwrap();
        assert_eq!(back, rec);
    }
}
