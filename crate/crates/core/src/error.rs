use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u64),
    #[error("modulus is reducible over GF({p})")]
    ReducibleModulus { p: u32 },
    #[error("field order {p}^{m} does not fit below 2^32")]
    Overflow { p: u64, m: u32 },
    #[error("{r} does not divide q-1 = {order}")]
    NotADivisor { r: usize, order: usize },
    #[error("zero has no multiplicative coset")]
    ZeroElement,
    #[error("bad locality r={r} for q={q}: {reason}")]
    BadLocality { q: u32, r: usize, reason: &'static str },
    #[error("bad degree bound ell={ell} for q={q}")]
    BadDegree { q: u32, ell: usize },
    #[error("degree bound too small: 2*ell={} < q={q}", 2 * ell)]
    DegreeTooSmall { q: u32, ell: usize },
    #[error("polynomial degree {degree} does not fit {n} evaluation points")]
    DegreeOverflow { degree: usize, n: usize },
    #[error("folding parameter {s} does not divide length {n}")]
    FoldMismatch { s: usize, n: usize },
    #[error("shift constant must be nonzero")]
    ZeroShift,
    #[error("enumeration needs {required} evaluations, cap is {cap}")]
    CapExceeded { required: u128, cap: u128 },
    #[error("second code is not contained in the first")]
    NotASubcode,
    #[error("erasure pattern leaves a solution space of dimension {dim}")]
    AmbiguousErasure { dim: usize },
    #[error("unerased symbols are not consistent with any codeword")]
    Inconsistent,
    #[error("parity check is not in the dual code")]
    CheckNotInDual,
    #[error("parity check vanishes at position {0}")]
    ZeroPivot(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("X check {x_row} and Z check {z_row} are not orthogonal")]
    OrthogonalityViolation { x_row: usize, z_row: usize, x_check: Vec<u32>, z_check: Vec<u32> },
    #[error("no covering checks of locality {r} for position {position}")]
    NoCoveringCheck { position: usize, r: usize },
    #[error("classical decoder failed: {0}")]
    DecoderFailure(String),
    #[error("locality {0} is composite; pass allow_composite to build anyway")]
    CompositeLocality(usize),
    #[error("folding parameter {s} does not divide (q-1)/r = {coset_count}")]
    FoldNotDividing { s: usize, coset_count: usize },
    #[error("sibling block {sibling} of block {block} is erased")]
    SiblingErased { block: usize, sibling: usize },
    #[error("radius {e} exceeds the decoder limit {max}")]
    RadiusTooLarge { e: usize, max: usize },
    #[error("decoding failed: {0}")]
    DecodingFailed(String),
    #[error("orthogonal complement is exhausted by the existing row span")]
    SamplingExhausted,
    #[error("graph sampling failed after {0} retries")]
    SamplingFailedAfterRetries(usize),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("folding mismatch: {0}")]
    FoldingMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("uncertainty principle not verified for q={q}, r={r}")]
    UncertaintyUnverified { q: u32, r: usize },
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("inequality violated: {0}")]
    ViolationFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
