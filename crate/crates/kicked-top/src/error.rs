use thiserror::Error;

/// Unified error type for the crate.
///
/// The CLI maps variants onto exit codes: argument-level problems
/// ([`Error::Domain`], [`Error::Alignment`], [`Error::Spec`]) exit with 2,
/// runtime numerical problems ([`Error::Contract`], [`Error::Numerical`],
/// [`Error::Io`]) exit with 1.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical contract was violated (non-Hermitian input where
    /// Hermiticity is required, unnormalized state, and so on).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A numerical routine failed or degraded beyond tolerance.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A grid does not align with the requested shift or reflection.
    #[error("grid alignment error: {0}")]
    Alignment(String),

    /// A sweep specification is internally inconsistent.
    #[error("invalid sweep spec: {0}")]
    Spec(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Alignment(_) | Error::Spec(_) => 2,
            Error::Contract(_) | Error::Numerical(_) | Error::Io(_) => 1,
        }
    }
}
