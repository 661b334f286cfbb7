//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("input is not Hermitian: max |H - H†| entry = {deviation:.3e} exceeds {tol:.3e}")]
    NonHermitianInput { deviation: f64, tol: f64 },

    #[error("operator has a negative eigenvalue {min_eigenvalue:.3e} below the allowed floor {floor:.3e}")]
    NegativeOperator { min_eigenvalue: f64, floor: f64 },

    #[error("trace is {trace:.12} but a unit-trace operator was required")]
    NonUnitTrace { trace: f64 },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("no-signalling violation: reduced states differ across inputs by {deviation:.3e}")]
    NoSignallingViolation { deviation: f64 },

    #[error("support violation: {context}")]
    SupportViolation { context: String },

    #[error("filter success probability {p:.3e} is vanishing")]
    VanishingSuccessProbability { p: f64 },

    #[error("filter is not a contraction: min eig(I - K†K) = {slack:.3e}")]
    ContractionViolation { slack: f64 },

    #[error("unitary does not witness the claimed SEO ordering: {context}")]
    InvalidWitness { context: String },

    #[error("witness list is empty")]
    EmptyWitnessList,

    #[error("{n_outputs}^{n_inputs} deterministic strategies exceed the enumeration guard of {guard}")]
    TooManyStrategies { n_inputs: usize, n_outputs: usize, guard: usize },

    #[error("noise model is not SDP-representable: {context}")]
    UnrepresentableNoiseModel { context: String },

    #[error("malformed probability distribution: {context}")]
    MalformedDistribution { context: String },

    #[error("malformed quantum instrument: {context}")]
    MalformedInstrument { context: String },

    #[error("ill-formed SDP: {context}")]
    IllFormedProblem { context: String },

    #[error("SDP solver failed: {context}")]
    SolverFailure { context: String },

    #[error("invalid value for {name}: {value} ({context})")]
    InvalidParameter { name: String, value: f64, context: String },

    #[error("document error: {context}")]
    Document { context: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}
