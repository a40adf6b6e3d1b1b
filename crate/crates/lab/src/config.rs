//! Experiment configuration: one JSON document, every field defaulted.

use std::path::{Path, PathBuf};

use onesided_core::operators::{discretize, CausalHilbert, LogOscillating, OperatorMatrix, ZeroKernel};
use onesided_core::weights::{family_generate, WeightKind};
use onesided_core::{Direction, Grid};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::expr::ExprKernel;

/// Largest `m` the dense modes accept (`n = 4096`).
pub const DENSE_MAX_M: u32 = 12;
/// Largest `m` for the subcommands that never form a dense matrix.
pub const MAX_M: u32 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_weights")]
    pub weights: Vec<WeightConfig>,
    /// Goodness parameter `r` of the bad-interval predicate.
    #[serde(default = "default_r")]
    pub goodness_r: u32,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_multiplier")]
    pub stop_multiplier: f64,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kernel: KernelConfig::default(),
            grid: GridConfig::default(),
            weights: default_weights(),
            goodness_r: default_r(),
            eps: default_eps(),
            stop_multiplier: default_multiplier(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }
}

fn default_weights() -> Vec<WeightConfig> {
    vec![WeightConfig { family: Family::Corpus { size: 12 }, seeds: vec![0], id: None }]
}

fn default_r() -> u32 {
    4
}

fn default_eps() -> f64 {
    1.0
}

fn default_multiplier() -> f64 {
    onesided_core::analysis::DEFAULT_STOP_MULTIPLIER
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Hilbert,
    LogOscillating,
    Zero,
    Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DirectionChoice {
    #[default]
    Up,
    Down,
}

impl From<DirectionChoice> for Direction {
    fn from(d: DirectionChoice) -> Self {
        match d {
            DirectionChoice::Up => Direction::Up,
            DirectionChoice::Down => Direction::Down,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default)]
    pub kind: KernelKind,
    /// Cells on and next to the diagonal left out of the matrix.
    #[serde(default = "default_band")]
    pub band: usize,
    /// Expression in `x`, `y`, `t = x − y` for `kind = "expr"`.
    #[serde(default)]
    pub expr: Option<String>,
    #[serde(default)]
    pub constant: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub direction: DirectionChoice,
}

fn default_band() -> usize {
    1
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { kind: KernelKind::Hilbert, band: 1, expr: None, constant: None, epsilon: None, direction: DirectionChoice::Up }
    }
}

impl KernelConfig {
    pub fn name(&self) -> String {
        match self.kind {
            KernelKind::Hilbert => "hilbert".into(),
            KernelKind::LogOscillating => "log_oscillating".into(),
            KernelKind::Zero => "zero".into(),
            KernelKind::Expr => format!("expr:{}", self.expr.as_deref().unwrap_or("")),
        }
    }

    fn expr_kernel(&self) -> Result<ExprKernel> {
        let src = self.expr.as_deref().ok_or_else(|| LabError::config("kernel.expr", "required when kind is \"expr\""))?;
        ExprKernel::parse(src, self.constant.unwrap_or(1.0), self.epsilon.unwrap_or(1.0), self.direction.into())
            .map_err(|e| LabError::config("kernel.expr", e))
    }

    /// The discretized operator on `grid`. Builtin kernels are upward; a
    /// downward direction uses the transposed matrix.
    pub fn matrix(&self, grid: &Grid) -> Result<OperatorMatrix> {
        let t = match self.kind {
            KernelKind::Hilbert => discretize(&CausalHilbert, grid, self.band)?,
            KernelKind::LogOscillating => discretize(&LogOscillating, grid, self.band)?,
            KernelKind::Zero => discretize(&ZeroKernel, grid, self.band)?,
            KernelKind::Expr => return Ok(discretize(&self.expr_kernel()?, grid, self.band)?),
        };
        Ok(match self.direction {
            DirectionChoice::Up => t,
            DirectionChoice::Down => t.transpose(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub lo: f64,
    #[serde(default = "one")]
    pub hi: f64,
    #[serde(default = "default_m")]
    pub m: Vec<u32>,
}

fn one() -> f64 {
    1.0
}

fn default_m() -> Vec<u32> {
    vec![8]
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { lo: 0.0, hi: 1.0, m: default_m() }
    }
}

impl GridConfig {
    pub fn grid(&self, m: u32) -> Result<Grid> {
        Ok(Grid::new(self.lo, self.hi, m)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    Power {
        exponent: f64,
        #[serde(default = "half")]
        center: f64,
    },
    ExpMonotone {
        rate: f64,
    },
    Cutoff {
        z: f64,
        #[serde(default)]
        rate: f64,
    },
    RandomDyadic {
        beta: f64,
    },
    /// The mixed reproducible corpus of `size` weights.
    Corpus {
        size: usize,
    },
}

fn half() -> f64 {
    0.5
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Constant { .. } => "constant",
            Family::Power { .. } => "power",
            Family::ExpMonotone { .. } => "exp_monotone",
            Family::Cutoff { .. } => "cutoff",
            Family::RandomDyadic { .. } => "random_dyadic",
            Family::Corpus { .. } => "corpus",
        }
    }

    /// The core family, for everything but `constant` and `corpus`.
    pub fn kind(&self) -> Option<WeightKind> {
        match *self {
            Family::Power { exponent, center } => Some(WeightKind::Power { exponent, center }),
            Family::ExpMonotone { rate } => Some(WeightKind::ExpMonotone { rate }),
            Family::Cutoff { z, rate } => Some(WeightKind::Cutoff { z, rate }),
            Family::RandomDyadic { beta } => Some(WeightKind::RandomDyadic { beta }),
            Family::Constant { .. } | Family::Corpus { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub family: Family,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Prefix for the generated weight ids.
    #[serde(default)]
    pub id: Option<String>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// The power family `|x − center|^a` over `exponents`, for the scaling table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_exponents")]
    pub exponents: Vec<f64>,
    #[serde(default = "half")]
    pub center: f64,
}

/// Exponents whose characteristics run from 1 to about 10⁴ at `m = 10`.
pub fn default_exponents() -> Vec<f64> {
    (0..10).map(|k| 0.25 * k as f64).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { exponents: default_exponents(), center: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            LabError::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::config(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text)
    }

    /// Checks everything that can be checked without running an experiment.
    pub fn validate(&self) -> Result<()> {
        if !(self.grid.lo.is_finite() && self.grid.hi.is_finite() && self.grid.lo < self.grid.hi) {
            return Err(LabError::config("grid", "need finite lo < hi"));
        }
        if self.grid.m.is_empty() {
            return Err(LabError::config("grid.m", "at least one grid size is needed"));
        }
        for (k, &m) in self.grid.m.iter().enumerate() {
            if !(1..=MAX_M).contains(&m) {
                return Err(LabError::config(format!("grid.m[{k}]"), format!("must lie in 1..={MAX_M}")));
            }
        }
        if self.kernel.band == 0 {
            return Err(LabError::config("kernel.band", "must be at least 1"));
        }
        if self.kernel.kind == KernelKind::Expr {
            self.kernel.expr_kernel()?;
        } else if self.kernel.expr.is_some() {
            return Err(LabError::config("kernel.expr", "only allowed when kind is \"expr\""));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(LabError::config("eps", "must be positive"));
        }
        if !(self.stop_multiplier > 0.0 && self.stop_multiplier.is_finite()) {
            return Err(LabError::config("stop_multiplier", "must be positive"));
        }
        if self.weights.is_empty() {
            return Err(LabError::config("weights", "at least one weight family is needed"));
        }
        let probe = self.grid.grid(4)?;
        for (k, w) in self.weights.iter().enumerate() {
            if w.seeds.is_empty() {
                return Err(LabError::config(format!("weights[{k}].seeds"), "at least one seed is needed"));
            }
            let bad = match &w.family {
                Family::Constant { value } => !(*value > 0.0 && value.is_finite()),
                Family::Corpus { size } => *size == 0,
                f => family_generate(&probe, f.kind().expect("core family"), w.seeds[0]).is_err(),
            };
            if bad {
                return Err(LabError::config(format!("weights[{k}].family"), format!("invalid parameters for `{}`", w.family.name())));
            }
        }
        if self.sweep.exponents.is_empty() {
            return Err(LabError::config("sweep.exponents", "at least one exponent is needed"));
        }
        if let Some(k) = self.sweep.exponents.iter().position(|a| !(a.is_finite() && *a > -1.0)) {
            return Err(LabError::config(format!("sweep.exponents[{k}]"), "exponents must exceed -1"));
        }
        Ok(())
    }

    /// Rejects grids too large for dense matrices.
    pub fn check_dense(&self, m: u32) -> Result<()> {
        if m > DENSE_MAX_M {
            return Err(LabError::Resource(format!("m = {m} exceeds {DENSE_MAX_M} for a dense mode")));
        }
        Ok(())
    }
}
