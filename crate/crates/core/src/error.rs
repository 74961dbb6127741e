use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rotation system: {0}")]
    InvalidRotation(String),
    #[error("map is not planar: V - E + F = {euler} (expected 2)")]
    NonPlanar { euler: i64 },
    #[error("map is disconnected")]
    Disconnected,
    #[error("vertex {vertex} has degree {degree} (< 2)")]
    DegreeTooLow { vertex: usize, degree: usize },
    #[error("graph is not simple: {0}")]
    NotSimple(String),
    #[error("embedding is not isoradial: {0}")]
    NotIsoradial(String),
    #[error("rhombus half-angle {theta} of edge {edge} is outside (0, pi/2)")]
    AngleOutOfRange { edge: usize, theta: f64 },
    #[error("enumeration exceeds cap: {what} (cap {cap})")]
    TooLarge { what: String, cap: u64 },
    #[error("edge set is not a spanning tree: {0}")]
    NotATree(String),
    #[error("configuration is not an oriented spanning tree: {0}")]
    NotAnOst(String),
    #[error("edge set is not a perfect matching: {0}")]
    NotAMatching(String),
    #[error("configuration violates the local rules at white vertices {0:?}")]
    NotInClass(Vec<usize>),
    #[error("not a cycle: {0}")]
    NotACycle(String),
    #[error("wrong stage: expected {expected}, got {got}")]
    WrongStage { expected: String, got: String },
    #[error("missing provenance on edge {0}")]
    MissingProvenance(usize),
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("bad generator parameters: {0}")]
    BadParams(String),
    #[error("unknown export target `{0}`")]
    UnknownTarget(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
