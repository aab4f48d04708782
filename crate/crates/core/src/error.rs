use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("manifold dimension must be at least 3, got {0}")]
    InvalidDimension(usize),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("zero vector")]
    ZeroVector,
    #[error("vector is not null (|q| = {0:e})")]
    NotNull(f64),
    #[error("vectors do not span a totally isotropic plane")]
    NotIsotropic,
    #[error("segment endpoints must satisfy start < end, got {start} >= {end}")]
    InvalidSegment { start: i64, end: i64 },
    #[error("point lies outside the Minkowski patch")]
    NotInPatch,
    #[error("point lies on the photon")]
    OnPhoton,
    #[error("photon is not the one fixed by the unipotent flag group")]
    NonStandardPhoton,
    #[error("lift is ambiguous: two branches are equidistant from the reference")]
    Ambiguous,
    #[error("vector is not tangent to the quadric at the point")]
    NotTangent,
    #[error("path continuation failed near t = {0}")]
    StepFailure(f64),
    #[error("matrix is not in the unipotent flag group: {0}")]
    NotUnipotent(String),
    #[error("linear parts do not span V")]
    NotSpanning,
    #[error("element is not in the kernel of D")]
    NotInKerD,
    #[error("data is not the graph of an endomorphism (residual {0:e})")]
    Inconsistent(f64),
    #[error("commutator values are not integral: {0}")]
    NonIntegral(String),
    #[error("degenerate generator: {0}")]
    DegenerateGamma(String),
    #[error("orbit did not enter the domain within {0} steps")]
    ScanExhausted(i64),
}
