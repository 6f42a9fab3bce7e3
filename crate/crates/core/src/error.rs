use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 8")]
    GridSize(usize),
    #[error("box length must be positive and finite, got {0}")]
    BoxLength(f64),
    #[error("lattice half-width must be positive")]
    LatticeSize,
    #[error("fields live on different domains")]
    DomainMismatch,
    #[error("operation needs a nonzero field")]
    ZeroField,
    #[error("{name} = {value} is outside its valid range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("invalid dispersion profile: {0}")]
    Profile(String),
    #[error("invalid measure: {0}")]
    Measure(String),
    #[error("measure node {index} at r = {node:e} is too close to zero for the dual map")]
    NodeNearZero { index: usize, node: f64 },
    #[error("tau = {0} is a critical value of D; the density is undefined there")]
    CriticalValue(f64),
    #[error("kernel offset {0} exceeds the series budget of 200")]
    OffsetBudget(i64),
    #[error("iteration stalled: |Q(f,f,f)| fell below 1e-14")]
    Stalled,
    #[error("time step misaligned: {0}")]
    Misaligned(String),
    #[error("norm drift {drift:e} exceeds 1e-4; reduce the step size (dt = {dt})")]
    NormDrift { drift: f64, dt: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
