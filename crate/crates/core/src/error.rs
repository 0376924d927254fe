use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("points of a normalizing triple must be pairwise distinct")]
    InvalidTriple,
    #[error("singular Möbius transformation")]
    SingularMobius,
    #[error("the identity map has no isolated fixed points")]
    IdentityMap,
    #[error("point is not a fixed point")]
    NotFixed,
    #[error("fixed point of multiplicity {multiplicity} exceeds level {level}")]
    LevelExceeded { multiplicity: usize, level: usize },
    #[error("need at least 3 fixed points, got {0}")]
    TooFewPoints(usize),
    #[error("fixed points {0} and {1} coincide")]
    Collision(usize, usize),
    #[error("index of entry {0} vanishes")]
    DegenerateIndex(usize),
    #[error("indices sum to {0} instead of 1")]
    IndexFormula(String),
    #[error("epsilon values must be pairwise distinct")]
    SingularInput,
    #[error("solved index {0} vanishes")]
    ZeroLambda(usize),
    #[error("no limit: {0}")]
    NoLimit(String),
    #[error("inconsistent limit: {0}")]
    InconsistentLimit(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("validation failed: {}", summarize(.0))]
    Validation(Vec<Violation>),
    #[error("bad input: {0}")]
    Input(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
}

fn summarize(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    TooFewPunctures,
    DuplicatePuncture,
    CoincidentPositions,
    BadNode,
    PunctureCount,
    NodeCount,
    Disconnected,
    TooManyNodes,
    UnknownComponent,
    CrushedNode,
    CrushedTooSmall,
    NoOrdinary,
    MarkingShape,
    MarkingLabels,
    MissingMap,
    IdentityMap,
    StrayFixedPoint,
    LevelExceeded,
    NodalMultiplicity,
    NodalIndexSum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, detail: impl Into<String>) -> Self {
        Violation { kind, detail: detail.into() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}
