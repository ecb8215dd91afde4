use thiserror::Error;

/// Errors raised by the analysis operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid net: {0}")]
    InvalidNet(String),

    #[error("`{0}` is not a node of the net")]
    NotInNet(String),

    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),

    #[error("step {index} (`{transition}`) of the firing sequence is not enabled")]
    SequenceNotEnabled { index: usize, transition: String },

    #[error("state space exceeds the cap of {cap} markings")]
    StateSpaceExceeded { cap: usize },

    #[error("net is unbounded: {larger} strictly covers its ancestor {smaller}")]
    Unbounded { smaller: String, larger: String },

    #[error("operation requires a complete reachability graph")]
    IncompleteStateSpace,

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("positions out of range: need i < j < {len}, got i = {i}, j = {j}")]
    IndexOutOfRange { i: usize, j: usize, len: usize },

    #[error("transition at position {j} cannot be expedited to position {i}")]
    ExpediteNotPermitted { i: usize, j: usize },

    #[error("initial marking is not safe: {0}")]
    UnsafeInitialMarking(String),

    #[error("cleaning the net failed: {0}")]
    CleanFailed(String),

    #[error("net is not free-choice: {0}")]
    NotFreeChoice(String),

    #[error("net is not proper: {0}")]
    NotProper(String),

    #[error("generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
