use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("face {face} references vertex {index} but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("degenerate faces (area <= 1e-12): {0:?}")]
    DegenerateFaces(Vec<usize>),
    #[error("mesh is not closed: {boundary_edges} boundary edges")]
    OpenMesh { boundary_edges: usize },
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("parameter `{name}` = {value} outside bounds [{lower}, {upper}]")]
    OutOfBounds {
        name: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("invalid bounds for `{name}`: lower {lower} must be below upper {upper}")]
    InvalidBounds {
        name: &'static str,
        lower: f64,
        upper: f64,
    },
    #[error("morph rejected: longitudinal mapping is not monotone (shift slope {slope:.4} vs scale {scale:.4})")]
    MorphRejected { slope: f64, scale: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("expected {expected} samples, got {actual}")]
    CountMismatch { expected: usize, actual: usize },
    #[error("sample {index} does not match its location class or position")]
    SampleMismatch { index: usize },
    #[error("samples do not form a complete axis-aligned grid: {0}")]
    IncompleteGrid(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("unsupported Sobol dimension {0} (at most 16)")]
    UnsupportedDimension(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite feature at point {0}")]
    NonFiniteFeature(usize),
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("starting point is infeasible: {0}")]
    InfeasibleStart(String),
    #[error("no feasible records to build a Pareto front from")]
    EmptyFront,
    #[error("correlation undefined: zero variance")]
    ZeroVariance,
    #[error("least-squares system is rank deficient")]
    RankDeficient,
    #[error("{0}")]
    Unsupported(String),
}
