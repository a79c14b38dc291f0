use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    // --- formula ---
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("atom tag {0:?} contains a delimiter character")]
    BadAtomTag(String),
    #[error("unknown world {0:?}")]
    UnknownWorld(String),
    #[error("unknown atom tag {0:?}")]
    UnknownAtom(String),

    // --- kripke ---
    #[error("duplicate world {0:?}")]
    DuplicateWorld(String),
    #[error("dangling world reference {0:?}")]
    DanglingWorld(String),
    #[error("weight for world {world:?} out of [0,1]: {value}")]
    WeightRange { world: String, value: f64 },
    #[error("weights must sum to 1, got {0}")]
    WeightSum(f64),
    #[error("missing weight for world {0:?}")]
    MissingWeight(String),
    #[error("tag {0:?} is not in the frame")]
    TagOutsideFrame(String),

    // --- unfolding ---
    #[error("root node {0:?} is not in the seed node set")]
    RootMissing(String),
    #[error("edge endpoint {0:?} is not in the seed node set")]
    DanglingNode(String),
    #[error("atom node {0:?} has an outgoing edge that is not a self-loop")]
    AtomWithEdges(String),
    #[error("stage {alpha} exceeds the depth cap {cap}")]
    DepthCapExceeded { alpha: usize, cap: usize },
    #[error("projected node count {projected} exceeds the node cap {cap}")]
    NodeCapExceeded { projected: u128, cap: u64 },

    // --- bisim ---
    #[error("world count mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("invalid pairing: {0}")]
    InvalidPairing(String),

    // --- proximity ---
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("relation is not a tree: {0}")]
    NotATree(String),
    #[error("vector {0} is zero")]
    ZeroVector(usize),
    #[error("carrier size {size} exceeds the enumeration cap {cap}")]
    CarrierTooLarge { size: usize, cap: usize },

    // --- evidence ---
    #[error("singleton valuation assignment violated at world {0:?}")]
    SvaViolation(String),
    #[error("relation is not serial: world {0:?} has no successor")]
    NonSerial(String),
    #[error("model has no weighting function")]
    MissingWeights,
    #[error("invalid basic probability assignment: {0}")]
    InvalidBpa(String),
    #[error("basis is not orthonormal: {0}")]
    NonOrthonormal(String),
    #[error("state is not a unit vector (norm {0})")]
    NonUnitState(f64),
    #[error("degenerate Bayes normalizer {0}")]
    DegenerateNormalizer(f64),

    // --- embedding / shared numerics ---
    #[error("matrix is not symmetric at ({i},{j})")]
    NonSymmetric { i: usize, j: usize },
    #[error("Jacobi sweep limit {0} reached without convergence")]
    NoConvergence(usize),
    #[error("need at least two codewords")]
    TooFewWords,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    // --- input parsing ---
    #[error("malformed input: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(format!("{e} (line {}, column {})", e.line(), e.column()))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
