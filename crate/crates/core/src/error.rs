use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("cannot parse Pauli string {text:?}: {reason}")]
    PauliParse { text: String, reason: String },

    #[error("line {line}: {message}")]
    StimParse { line: usize, message: String },

    #[error("gate {0} is not Clifford")]
    NonClifford(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("statevector oracle supports at most {max} qubits, got {got}")]
    OracleTooLarge { max: usize, got: usize },

    #[error("identity Pauli has no rotation")]
    IdentityRotation,

    #[error("qubit {0} has no ion assignment")]
    UnmappedQubit(usize),

    #[error("circuit needs {needed} ions but the chain has {available}")]
    ChainTooSmall { needed: usize, available: usize },

    #[error("infeasible pair-table targets: {0}")]
    InfeasibleTargets(String),

    #[error("vertex {vertex} out of range for {m}-vertex graph")]
    VertexOutOfRange { vertex: usize, m: usize },

    #[error("stabilizer {0} is not in the resource stabilizer group")]
    NotAStabilizer(String),

    #[error("duplicate stabilizer pair {0}")]
    DuplicatePair(String),

    #[error("empty outcome counts")]
    EmptyCounts,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
