use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("duplicate target qubits")]
    DuplicateTargets,

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("state vector is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("non-finite entries")]
    NonFinite,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parameter vector has length {got}, circuit expects {expected}")]
    ParameterLength { got: usize, expected: usize },

    #[error("sector index p = {p} outside 0..={n_qubits}")]
    InvalidSector { p: usize, n_qubits: usize },

    /// Depth scan exhausted without the rank settling; carries the partial
    /// (G, M, D_L) curve so callers can report it.
    #[error("no rank plateau within depth budget (last D = {last_rank})")]
    NoPlateau {
        last_rank: usize,
        partial: Vec<crate::rank::RankSample>,
    },

    #[error("rank R_L still growing at L = {l_max} (R = {last_rank}); no plateau in L")]
    NoPlateauInL {
        l_max: usize,
        last_rank: usize,
        partial: Vec<crate::rank::LRecord>,
    },

    #[error("operator span was truncated at dim {dim}; bound not certified")]
    TruncatedSpan { dim: usize },

    #[error("optimizer produced a non-finite {what} at step {step}")]
    NonFiniteCost { what: &'static str, step: usize },
}
