use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DstError {
    #[error("a frame needs between 2 and 63 states, got {0}")]
    InvalidFrame(usize),
    #[error("the empty set is not a valid query or focal set")]
    EmptySet,
    #[error("subset index {subset:#b} lies outside a frame of {n} states")]
    SubsetOutOfFrame { subset: u64, n: usize },
    #[error("state index {state} outside 1..={n}")]
    StateOutOfRange { state: usize, n: usize },
    #[error("mass functions are defined on different frames ({left} vs {right} states)")]
    FrameMismatch { left: usize, right: usize },
    #[error("invalid mass {mass} on subset {subset:#b}")]
    InvalidMass { subset: u64, mass: f64 },
    #[error("masses sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("cannot renormalise a mass assignment with total {0}")]
    NonPositiveTotal(f64),
    #[error("total conflict (K = {0}) under Dempster's rule")]
    TotalConflict(f64),
    #[error("invalid quality value {0}; qualities lie in [0, 1]")]
    InvalidQuality(f64),
    #[error("point is not on the mass simplex: {0}")]
    NotOnSimplex(String),
}
