use thiserror::Error;

pub type Result<T> = std::result::Result<T, ScgError>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScgError {
    // field arithmetic
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero has no square class")]
    ZeroHasNoClass,
    #[error("invalid field parameters: {0}")]
    InvalidField(String),

    // linear algebra
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("element order exceeds cap {cap}")]
    OrderExceedsCap { cap: u64 },

    // orthogonal geometry
    #[error("degenerate quadratic form: {0}")]
    DegenerateForm(String),
    #[error("vector is singular (phi(u) = 0)")]
    SingularVector,
    #[error("operation requires odd characteristic")]
    EvenCharacteristic,
    #[error("matrix is not an isometry of the form")]
    NotIsometry,
    #[error("zero diagonal entry at position {index}")]
    ZeroDiagonal { index: usize },
    #[error("zero denominator")]
    ZeroDenominator,

    // group engine
    #[error("orbit exceeds cap {cap}")]
    OrbitCapExceeded { cap: u64 },
    #[error("action domain of size {size} exceeds cap {cap}")]
    DomainTooLarge { size: u128, cap: u128 },
    #[error("group of order {order} exceeds enumeration cap {cap}")]
    GroupTooLarge { order: u128, cap: u128 },
    #[error("empty generating set")]
    NoGenerators,

    // string C-groups
    #[error("generator {index} is not an involution")]
    NotInvolution { index: usize },
    #[error("generator {index} is not +/- a symmetry of the supplied form")]
    NotSymmetryForm { index: usize },
    #[error("rank {rank} is too small for rank reduction (need >= 4)")]
    RankTooSmall { rank: usize },
    #[error("representation is reducible: Schlafli entry {index} equals 2")]
    Reducible { index: usize },
    #[error("rho_2 rho_3 has even order {order}")]
    EvenOrderObstruction { order: u64 },
    #[error("representation has not been verified")]
    NotVerified,

    // constructions and search
    #[error("scalar xi rejected: {0}")]
    BadXi(String),
    #[error("no admissible scalars found for q = {q}")]
    NoScalarsFound { q: u32 },
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("unsupported rank {rank}")]
    UnsupportedRank { rank: usize },
    #[error("search budget exhausted")]
    BudgetExhausted,
}
