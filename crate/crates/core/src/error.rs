use thiserror::Error;

/// Errors raised by frame, eigensteps and lifting operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not self-adjoint (asymmetry {0:.3e})")]
    NotSelfAdjoint(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("columns are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),
    #[error("real orthogonal matrices have opposite orientation")]
    OrientationMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("invalid eigensteps table: {0}")]
    InvalidTable(String),
    #[error("eigensteps polytope has empty interior for N={n}, d={d} (needs N >= d + 2)")]
    EmptyInterior { n: usize, d: usize },
    #[error("interior sampling failed after {0} attempts")]
    SamplingFailed(usize),
    #[error("frame is not a FUNTF (unit-norm residual {unit_norm:.3e}, tightness residual {tightness:.3e})")]
    NotFuntf { unit_norm: f64, tightness: f64 },
    #[error("no Naimark complement: N equals d")]
    NoComplement,
    #[error("subset enumeration needs {needed} checks, budget is {budget}")]
    TooLarge { needed: u128, budget: u128 },
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("frame is orthodecomposable")]
    FrameIsOd,
    #[error("frame is not orthodecomposable")]
    NotOd,
    #[error("vanishing denominator at step {n}; use the limit evaluator")]
    VanishingDenominator { n: usize },
    #[error("negative radicand {value:.3e} at step {n}")]
    NegativeRadicand { n: usize, value: f64 },
    #[error("(1-t) powers do not cancel at step {n}: net power {net_half_powers}/2")]
    NoncancellingPowers { n: usize, net_half_powers: i32 },
    #[error("partial spectra are degenerate at step {0}")]
    DegenerateSpectra(usize),
    #[error("eigensteps of the starting frame are not interior")]
    NotInterior,
    #[error("eigensteps differ by {0:.3e}")]
    EigenstepsMismatch(f64),
    #[error("real fiber components differ (block {0})")]
    OrientationObstruction(String),
    #[error("base data does not match the table block structure: {0}")]
    BaseMismatch(String),
    #[error("selected subframe is not tight on its span (deviation {0:.3e})")]
    NotTightOnSpan(f64),
    #[error("rotation does not preserve the invariant subspace (leak {0:.3e})")]
    RotationLeaksSubspace(f64),
    #[error("frame is not a union of two orthonormal bases")]
    NotTwoOnbs,
    #[error("same-block swap needs a chaperone from the other basis")]
    MissingChaperone,
    #[error("target and chaperone lie in the same subframe")]
    SameSubframe,
    #[error("subframe is not tight")]
    NotTight,
    #[error("not a simplex: {0}")]
    NotSimplex(String),
    #[error("alignment condition fails for column {0}")]
    DegenerateAlignment(usize),
    #[error("bad subframe: {0}")]
    BadSubframe(String),
    #[error("index {index} out of range for {len} columns")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
