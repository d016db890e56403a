//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),
    #[error("edge `{a}` -- `{b}` does not join an even vertex to an odd vertex")]
    NonBipartiteEdge { a: String, b: String },
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("graph has no edges")]
    NoEdges,
    #[error("graph is disconnected; components: {}", components_summary(.components))]
    Disconnected { components: Vec<Vec<String>> },
    #[error("spin value for vertex `{0}` must be positive")]
    NonPositiveSpin(String),
    #[error("spin vector is missing a value for vertex `{0}`")]
    MissingSpin(String),
    #[error("spin vector has no modulus: {0}")]
    NoModulus(String),
    #[error("level mismatch: {left} vs {right}")]
    LevelMismatch { left: usize, right: usize },
    #[error("sign mismatch")]
    SignMismatch,
    #[error("operation requires level >= {required}, got {got}")]
    LevelTooSmall { required: usize, got: usize },
    #[error("loop does not lie on the graph: {0}")]
    LoopNotOnGraph(String),
    #[error("not a graph automorphism: {0}")]
    NotAnAutomorphism(String),
    #[error("block at pair ({even}, {odd}) is not unitary")]
    NonUnitaryBlock { even: String, odd: String },
    #[error("block at pair ({even}, {odd}) has wrong size: expected {expected}, got {got}")]
    BlockSizeMismatch {
        even: String,
        odd: String,
        expected: usize,
        got: usize,
    },
    #[error("character value must have modulus 1 on generator {0}")]
    NonUnitCharacter(usize),
    #[error("group closure exceeded bound {bound}")]
    ClosureBoundExceeded { bound: usize },
    #[error("group is not closed under composition: {0}")]
    GroupNotClosed(String),
    #[error("basis is not closed under multiplication (residual {residual:.3e})")]
    NotMultiplicativelyClosed { residual: f64 },
    #[error("element of the fixed zero-box space is not scalar; {0}")]
    NotScalar(String),
    #[error("algebra decomposition failed: {0}")]
    Decomposition(String),
    #[error("inclusion multiplicity {value} is not close to an integer")]
    NonIntegerMultiplicity { value: f64 },
    #[error("requested depth {depth} exceeds computed tower depth {computed}")]
    DepthExceedsTower { depth: usize, computed: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn components_summary(components: &[Vec<String>]) -> String {
    components
        .iter()
        .map(|c| format!("[{}]", c.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

pub type Result<T> = std::result::Result<T, Error>;
