use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data for {what}: need at least {needed}, got {got}")]
    InsufficientData {
        what: String,
        needed: usize,
        got: usize,
    },

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("singular design matrix: {0}")]
    SingularDesign(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate classification: {0}")]
    DegenerateClassification(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Broad failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Config,
    Numeric,
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidInput(_)
            | Error::Schema(_)
            | Error::EmptyInput(_)
            | Error::Alignment(_)
            | Error::Io(_) => ErrorClass::Input,
            Error::Config(_) => ErrorClass::Config,
            Error::InsufficientData { .. }
            | Error::ZeroVariance(_)
            | Error::SingularDesign(_)
            | Error::Domain(_)
            | Error::DegenerateClassification(_) => ErrorClass::Numeric,
            Error::Context { source, .. } => source.class(),
        }
    }

    /// Exit code: 1 input error, 2 config error, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Input => 1,
            ErrorClass::Config => 2,
            ErrorClass::Numeric => 3,
        }
    }
}

pub trait ResultExt<T> {
    fn context(self, context: impl Into<String>) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl Into<String>) -> Result<T> {
        self.map_err(|e| e.context(context))
    }
}
