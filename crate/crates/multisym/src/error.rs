use thiserror::Error;

/// Errors shared by all kernel modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ring mismatch: expected {expected}, got {got}")]
    RingMismatch { expected: String, got: String },
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("variable {0} has no image under the homomorphism")]
    MissingVariableImage(String),
    #[error("{0} is not a variable of the polynomial ring")]
    NotAVariable(String),
    #[error("{0} is not invertible")]
    NotInvertible(String),
    #[error("polynomial is not symmetric: swapping variables {0} and {1} changes it")]
    NotSymmetric(usize, usize),
    #[error("structure constants are not commutative at (i,j,k) = ({0},{1},{2})")]
    NonCommutative(usize, usize, usize),
    #[error("structure constants are not associative at (i,j,l) = ({0},{1},{2})")]
    NonAssociative(usize, usize, usize),
    #[error("declared unit does not act as identity on basis vector {0}")]
    BadUnit(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("algebra mismatch")]
    AlgebraMismatch,
    #[error("index {got} out of range 0..={max}")]
    IndexOutOfRange { got: usize, max: usize },
    #[error("tensor is not invariant under the requested subgroup")]
    NotInvariant,
    #[error("module action does not respect the multiplication table at ({0},{1})")]
    BadAction(usize, usize),
    #[error("n! = {0}! is not invertible in the base ring")]
    FactorialNotInvertible(u32),
    #[error("type weight {weight} exceeds tensor degree {degree}")]
    WeightExceedsDegree { weight: u32, degree: usize },
    #[error("submodule is not stable under the algebra action")]
    FlagNotStable,
    #[error("flag step is not part of a basis of the ambient module")]
    FlagNotAdapted,
    #[error("flag quotient has dimension {0}, expected {1}")]
    BadFlagQuotient(usize, usize),
    #[error("tower mismatch: {0}")]
    TowerMismatch(String),
    #[error("base rings cannot be tensored over the given ring: {0}")]
    BaseMismatch(String),
    #[error("multiset contains label {0} not present in the target set")]
    UnknownLabel(String),
    #[error("duplicate label {0}")]
    DuplicateLabel(String),
    #[error("morphism chain mismatch: target of first is {0:?}, source of second is {1:?}")]
    ChainMismatch(Vec<String>, Vec<String>),
    #[error("coefficient at ({0},{1}) is negative")]
    NegativeCoefficient(String, String),
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error("group action is not transitive")]
    NotTransitive,
    #[error("cover is not jointly surjective: {0} is not hit")]
    NotSurjective(String),
    #[error("cover is not unifibrant at {0}")]
    NotUnifibrant(String),
    #[error("double complex square at ({0},{1}) does not commute")]
    NonCommutingSquare(i32, i32),
    #[error("d*d != 0 between degrees {0} and {1}")]
    DifferentialNotSquareZero(i32, i32),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("json: {0}")]
    Json(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
