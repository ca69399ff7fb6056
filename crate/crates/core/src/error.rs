use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square or has an invalid shape: {0}")]
    Shape(String),
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not Hermitian (‖M − M†‖_F = {deviation:e})")]
    NonHermitian { deviation: f64 },
    #[error("matrix is not a projection: {0}")]
    NotProjection(String),
    #[error("matrix is not unitary (‖MM† − I‖_F = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not a density state: {0}")]
    NotDensity(String),
    #[error("operators do not commute (‖[A, B]‖_F = {deviation:e})")]
    NonCommuting { deviation: f64 },
    #[error("operators generate the trivial algebra ℂ·1")]
    TrivialContext,
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("context ids collide for contexts that differ")]
    CanonicalizationClash,
    #[error("cannot build a family from an empty seed")]
    EmptySeed,
    #[error("contexts are not comparable")]
    NotComparable,
    #[error("projection is not an element of the context")]
    NotInContext,
    #[error("values belong to different context families")]
    FamilyMismatch,
    #[error("no context of the family contains the required element: {0}")]
    MissingContext(String),
    #[error("block index {index} out of range for a context with {blocks} blocks")]
    BlockOutOfRange { index: usize, blocks: usize },
    #[error("invalid probability data: {0}")]
    InvalidSection(String),
    #[error("function is not antitone: value rises by {violation:e} along an inclusion")]
    NotAntitone { violation: f64 },
    #[error("projection receives inconsistent values from different contexts (discrepancy {discrepancy:e})")]
    WellDefinednessViolation { discrepancy: f64 },
    #[error("invalid subobject components: {0}")]
    NotSubobject(String),
}
