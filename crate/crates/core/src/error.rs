use thiserror::Error;

/// Errors surfaced by the engine.
///
/// Variants are grouped by how callers should react: configuration problems
/// (`UnsupportedRootSystem`, `InvalidArgument`) mean the request was malformed;
/// resource variants (`WeylTooLarge`, `DownsetOverflow`, `SeriesLimit`) mean a
/// documented cap was hit; the remaining variants signal that a mathematical
/// invariant failed and the result must not be trusted.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("unsupported root system: {0}")]
    UnsupportedRootSystem(String),

    #[error("Weyl group order exceeds cap of {cap} (stopped after {seen} elements)")]
    WeylTooLarge { seen: usize, cap: usize },

    #[error("downset of {lambda} exceeds limit {limit}")]
    DownsetOverflow { lambda: String, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("weight {0} is not dominant")]
    NotDominant(String),

    #[error("degenerate spectrum: <nu~,xi> collides with <lambda~,xi> for nu={nu} after {retries} retries")]
    DegenerateSpectrum { nu: String, retries: usize },

    #[error("coefficient positivity failed for lambda={lambda} at nu={nu}: a={coeff}")]
    PositivityViolation {
        lambda: String,
        nu: String,
        coeff: String,
    },

    #[error("float overflow evaluating exp(<nu,z>) with real part {re}")]
    EvalOverflow { re: f64 },

    #[error("series did not meet its tail bound within {terms} terms (|z| too large?)")]
    SeriesLimit { terms: usize },

    #[error("hypergeometric series does not terminate and |u| >= 1")]
    NonTerminatingSeries,

    #[error("intertwiner system is rank-deficient at degree {degree}")]
    RankDeficientIntertwiner { degree: usize },

    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;
