use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("probability space has no atoms")]
    EmptySpace,
    #[error("atom weight {value} at position {index} is not a positive finite number")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("edge {0:?} is empty")]
    EmptyEdge(Vec<usize>),
    #[error("edge {edge:?} refers to vertex {vertex} but the system has {n} spaces")]
    VertexOutOfRange { edge: Vec<usize>, vertex: usize, n: usize },
    #[error("edge {0:?} repeats a vertex")]
    RepeatedVertex(Vec<usize>),
    #[error("edge {0:?} occurs twice")]
    DuplicateEdge(Vec<usize>),
    #[error("edge {0:?} is not an edge of the system")]
    UnknownEdge(Vec<usize>),
    #[error("hypergraph has no edges")]
    EmptyHypergraph,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("value {value} at cell {index} is not finite")]
    NonFiniteValue { index: usize, value: f64 },
    #[error("value {value} at cell {index} is negative but a nonnegative weight is required")]
    NegativeWeight { index: usize, value: f64 },
    #[error("omega digit {digit} is out of range for ell = {ell}")]
    DigitOutOfRange { digit: usize, ell: usize },
    #[error("ell must be an even integer >= 2, got {0}")]
    OddEll(u32),
    #[error("ell^|e| = {ell}^{arity} does not fit below 2^62")]
    ExponentOverflow { ell: u32, arity: usize },
    #[error("workload of {required} exceeds the cap of {cap}")]
    SizeCapExceeded { required: f64, cap: f64 },
    #[error("{count} subsets exceed the cap of {cap}")]
    SubsetCapExceeded { count: f64, cap: f64 },
    #[error("{count} disjoint subset pairs exceed the cap of {cap}")]
    PairCapExceeded { count: f64, cap: f64 },
    #[error("even-power sum {value} is below the roundoff floor {floor}")]
    NumericalInconsistency { value: f64, floor: f64 },
    #[error("exponent {0} is out of range")]
    POutOfRange(f64),
    #[error("invalid exponent literal {0:?}")]
    BadExponent(String),
    #[error("edge {0:?} is not a doubleton")]
    NotDoubleton(Vec<usize>),
    #[error("hypergraph is not 2-uniform")]
    NotTwoUniform,
    #[error("hypergraph must consist of all (n-1)-subsets of [n] with n >= 3")]
    WrongHypergraph,
    #[error("malformed sup problem: {0}")]
    MalformedProblem(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("invalid generator spec: {0}")]
    BadSpec(String),
    #[error("instance file: {0}")]
    Instance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
