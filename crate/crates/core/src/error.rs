use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the domain an operation is defined on.
    #[error("input out of domain: {0}")]
    InputDomain(String),

    /// The circular-path transform was evaluated at the circle centre.
    #[error("singular evaluation point: {0}")]
    Singularity(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::InputDomain(msg.into())
    }

    /// True for errors caused by bad input data rather than the environment.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InputDomain(_)
            | Error::Singularity(_)
            | Error::Parse { .. }
            | Error::Validation(_) => true,
            Error::Frame { source, .. } => source.is_validation(),
            Error::Io(_) | Error::Csv(_) => false,
        }
    }
}
