use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("network is not connected")]
    Disconnected,
    #[error("arc {0} has non-positive length")]
    NonPositiveLength(String),
    #[error("node {0} has degree 2 but is not flagged artificial")]
    IllegalDegreeTwo(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown arc {0}")]
    UnknownArc(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("point not on network: {0}")]
    PointOffNetwork(String),
    #[error("offset out of bounds on arc {0}")]
    OffsetOutOfBounds(String),
    #[error("points are equal; nothing to identify")]
    IdentifyEqualPoints,
    #[error("network is not a tree")]
    NotATree,
    #[error("network is not Eulerian")]
    NotEulerian,
    #[error("invalid passage pairing: {0}")]
    InvalidPairing(String),
    #[error("tour construction stuck: {0}")]
    TourStuck(String),
    #[error("tour is not closed")]
    TourNotClosed,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point visited fewer than {k} times: {witness}")]
    TooFewVisits { k: usize, witness: String },
    #[error("separation certificate not met: required {required}, achieved {achieved}")]
    SeparationNotMet { required: String, achieved: String },
    #[error("set is not independent: points {0} and {1} are closer than alpha")]
    NotIndependent(String, String),
    #[error("Leaf Condition fails: witness point {0}")]
    LeafConditionFails(String),
    #[error("mismatched networks between patrol and attack")]
    MismatchedNetworks,
    #[error("grid step does not divide {0}")]
    GridStepMismatch(String),
    #[error("attack discretizes to {0} components, over the bitmask limit of {1}")]
    TooManyComponents(usize, usize),
    #[error("empty payoff matrix")]
    EmptyMatrix,
    #[error("linear program failed: {0}")]
    LpFailure(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
