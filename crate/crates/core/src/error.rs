use thiserror::Error;

/// Errors raised by the relaxation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("polynomial term {0} is outside the monomial basis")]
    BasisMismatch(String),

    #[error("degree overflow: {0}")]
    DegreeOverflow(String),

    #[error("non-real coefficient where a real polynomial is required: {0}")]
    NonReal(String),

    #[error("invalid relaxation options: {0}")]
    InvalidOptions(String),

    #[error("problem is outside the supported class: {0}")]
    Unsupported(String),

    #[error("missing moment for word {0}")]
    MissingMoment(String),

    #[error("solution not usable: {0}")]
    Solution(String),

    #[error("extraction failed: {0}")]
    Extraction(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("SDPA parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::NotSquare { .. } => "not_square",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotPsd { .. } => "not_psd",
            Error::BasisMismatch(_) => "basis_mismatch",
            Error::DegreeOverflow(_) => "degree_overflow",
            Error::NonReal(_) => "non_real",
            Error::InvalidOptions(_) => "invalid_options",
            Error::Unsupported(_) => "unsupported",
            Error::MissingMoment(_) => "missing_moment",
            Error::Solution(_) => "solution",
            Error::Extraction(_) => "extraction",
            Error::Instance(_) => "instance",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}
