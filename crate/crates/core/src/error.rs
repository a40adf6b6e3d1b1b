use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("interval with {0} cell(s) cannot be halved")]
    Indivisible(u64),
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("singular configuration: {0}")]
    Singular(&'static str),
    #[error("invalid weight at cell {cell}: {reason}")]
    InvalidWeight { cell: usize, reason: &'static str },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no admissible interval: {0}")]
    NoAdmissibleInterval(&'static str),
    #[error("kernel is not finite at x = {x}, y = {y}")]
    NonFiniteKernel { x: f64, y: f64 },
    #[error("interval [{inner_start}, {inner_end}) is not contained in [{outer_start}, {outer_end})")]
    NotContained { inner_start: usize, inner_end: usize, outer_start: usize, outer_end: usize },
    #[error("zero mass: {0}")]
    ZeroMass(&'static str),
    #[error("Calderón-Zygmund component [{start}, {end}) reaches the right end of the ambient interval")]
    ComponentAtBoundary { start: usize, end: usize },
    #[error("series diverges: term ratio {ratio} at term {term}")]
    Divergent { term: usize, ratio: f64 },
    #[error("internal error: {0}")]
    Internal(&'static str),
}
