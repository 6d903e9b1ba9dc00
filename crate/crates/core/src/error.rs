use thiserror::Error;

/// Errors raised by graph construction, transport, orientation and the
/// geodesic solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("cycle length must be at least 3, got {0}")]
    CycleTooShort(usize),
    #[error("graph has {0} vertices, the limit is {1}")]
    TooManyVertices(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u64),
    #[error("unknown vertex {0}")]
    UnknownVertex(u64),
    #[error("geodesic enumeration exceeded {0} curves")]
    TooManyGeodesics(usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,

    #[error("({0}, {1}) is not an edge of the graph")]
    NotAnEdge(usize, usize),
    #[error("edge {{{0}, {1}}} is oriented both ways")]
    DoublyOriented(usize, usize),
    #[error("orientation contains a directed cycle")]
    CycleDetected,
    #[error("vertex tuple {0:?} is not oriented")]
    NotOriented(Vec<usize>),
    #[error("function has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("degenerate boundary system at vertex {0}")]
    DegenerateBoundary(usize),
    #[error("IPFP did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("t = {0} is outside [0, 1]")]
    TimeOutOfRange(f64),

    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("potential is not {k}-convex on {} oriented triples", .offending.len())]
    NotKConvex { k: f64, offending: Vec<(usize, usize, usize)> },
    #[error("stochastic domination does not hold")]
    NotDominated,
    #[error("graph is not a product")]
    NotAProduct,
    #[error("curve is not canonical: {0}")]
    NotCanonical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
