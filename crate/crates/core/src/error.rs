use crate::point::Vertex;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("invalid field parameters: {0}")]
    InvalidField(String),
    #[error("edge endpoints are not nearest neighbors: {0} -> {1}")]
    NotNeighbors(Vertex, Vertex),
    #[error("vertex {0} lies outside the box")]
    OutsideBox(Vertex),
    #[error("tolerance {0} outside (0, 1e-6]")]
    BadTolerance(f64),
    #[error("time interval runs backwards: s={0}, t={1}")]
    BackwardInterval(f64, f64),
    #[error("initial vector is not a sub-probability: {0}")]
    BadInitial(String),
    #[error("dimension {0} unsupported (1..={1})")]
    BadDimension(usize, usize),
    #[error("jump cap of {0} exceeded at time {1}")]
    JumpCapExceeded(usize, f64),
    #[error("time {0} outside sampled horizon [{1}, {2}]")]
    OutsideHorizon(f64, f64, f64),
    #[error("empty path set")]
    EmptyPaths,
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("power-law fit needs at least {0} points, got {1}")]
    FitTooFewPoints(usize, usize),
    #[error("power-law fit requires positive data, got ({0}, {1})")]
    FitNonpositive(f64, f64),
    #[error("replica {0}: {1}")]
    Replica(usize, Box<CoreError>),
    #[error("{0}")]
    Invalid(String),
}
