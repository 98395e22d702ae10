use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operands live on different gradings")]
    GradingMismatch,

    #[error("invalid grading: {0}")]
    InvalidGrading(String),

    #[error("invalid Jacobi parameters: {0}")]
    InvalidSpec(String),

    #[error("invalid mixed-preservation parameters: {0}")]
    InvalidMixedSpec(String),

    #[error("mixing matrix is singular (det = {0:e})")]
    SingularMatrix(f64),

    #[error("truncation level {truncation} too small: {reason}")]
    TruncationTooSmall { truncation: usize, reason: String },

    #[error("word `{word}` has length {len} > truncation {truncation}")]
    WordTooLong {
        word: String,
        len: usize,
        truncation: usize,
    },

    #[error("insufficient moments: {0}")]
    InsufficientMoments(String),

    #[error("moment functional is not positive semidefinite: {0}")]
    NotPsd(String),

    #[error("malformed moment functional: {0}")]
    MalformedMoments(String),

    #[error("system is not centered (E[X] = {mean_x:e}, E[Y] = {mean_y:e})")]
    NotCentered { mean_x: f64, mean_y: f64 },

    #[error("degenerate vector: {0}")]
    Degenerate(String),

    #[error("not of class M_L; violated brackets: {}", .0.join(", "))]
    NotMeixnerLie(Vec<String>),

    #[error("coupling quadratic has non-positive discriminant {0:e}")]
    NonPositiveDiscriminant(f64),

    #[error("inconsistent structure coefficients: {0}")]
    InconsistentCoefficients(String),

    #[error("stage postcondition failed: {0}")]
    Postcondition(String),

    #[error("moment audit failed at word `{worst_word}` (|diff| = {worst_diff:e})")]
    AuditFailed { worst_word: String, worst_diff: f64 },
}

impl Error {
    /// Whether the error stems from bad input rather than a failed
    /// classification stage.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::GradingMismatch
                | Error::InvalidGrading(_)
                | Error::InvalidSpec(_)
                | Error::InvalidMixedSpec(_)
                | Error::SingularMatrix(_)
                | Error::TruncationTooSmall { .. }
                | Error::WordTooLong { .. }
                | Error::InsufficientMoments(_)
                | Error::NotPsd(_)
                | Error::MalformedMoments(_)
        )
    }
}
