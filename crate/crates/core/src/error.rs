use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} is not normalized (sum = {sum})")]
    NonNormalized { what: &'static str, sum: f64 },
    #[error("{what} has a negative entry at index {index} ({value})")]
    NegativeEntry {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("equilibrium entry {index} is zero; equilibrium states need full support")]
    ZeroEquilibriumEntry { index: usize },
    #[error("{what} has a non-finite entry at index {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("inverse temperature must be nonzero and finite")]
    ZeroBeta,
    #[error("objects refer to different reference inverse temperatures ({0} vs {1})")]
    BetaMismatch(f64, f64),
    #[error("factor dimensions {left}x{right} do not match joint dimension {joint}")]
    BadFactorization {
        left: usize,
        right: usize,
        joint: usize,
    },
    #[error("{what} is not a density matrix: {reason}")]
    NotDensityMatrix { what: &'static str, reason: String },
    #[error("basis does not diagonalize the equilibrium state (off-diagonal {residual:e})")]
    BasisDoesNotDiagonalize { residual: f64 },
    #[error("states {0} and {1} have equal energies")]
    EqualEnergies(usize, usize),
    #[error("probability of state {0} is zero")]
    ZeroProbability(usize),
    #[error("index {index} out of range for {len} levels")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("energy gap must be positive, got {0}")]
    NonpositiveGap(f64),
    #[error("enumeration of {needed} items exceeds the cap of {cap}")]
    EnumerationCapExceeded { needed: u128, cap: u128 },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("simplex did not terminate within {0} pivots")]
    SolverStall(usize),
    #[error("levels {i} and {j} differ by {actual}, not the qubit gap {gap}")]
    GapMismatch {
        i: usize,
        j: usize,
        actual: f64,
        gap: f64,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("diagonal entries are not sorted in descending order")]
    NotSorted,
    #[error("sign pattern must be -1 on a leading block and +1 afterwards")]
    BadSignPattern,
    #[error("not a conversion witness: {0}")]
    InvalidWitness(String),
    #[error("{what} = {value} lies outside [0, 1]")]
    OutOfUnitInterval { what: &'static str, value: f64 },
    #[error("resource state does not commute with its equilibrium state (residual {0:e})")]
    NotCommuting(f64),
}
