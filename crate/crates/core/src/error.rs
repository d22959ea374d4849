use thiserror::Error;

use crate::distributions::ModelFamily;

pub type Result<T, E = SurvivalError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurvivalError {
    /// Argument outside the domain of a special function.
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("invalid parameters for {family}: {detail}")]
    ParameterDomain { family: ModelFamily, detail: String },

    #[error("invalid cohort: {0}")]
    InvalidCohort(String),

    /// An interval whose life-table denominator or conditional death
    /// probability is unusable.
    #[error("degenerate cohort at interval {interval}: {detail}")]
    DegenerateCohort { interval: usize, detail: String },

    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{family}: hazard has no change-point ({detail})")]
    NoChangePoint { family: ModelFamily, detail: String },

    #[error("fit of {family} failed: {detail}")]
    FitFailure {
        family: ModelFamily,
        detail: String,
        best_log_lik: Option<f64>,
    },

    #[error("cannot rank models: {0}")]
    RankingImpossible(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at line {line}, column '{column}': {detail}")]
    Parse {
        line: u64,
        column: String,
        detail: String,
    },

    #[error("incomplete cohort {birth_year}: missing row for year {year}, age {age}")]
    IncompleteCohort { birth_year: i32, year: i32, age: u32 },

    #[error("duplicate row for year {year}, age {age} (line {line})")]
    DuplicateRow { year: i32, age: u32, line: u64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SurvivalError {
    fn from(err: std::io::Error) -> Self {
        SurvivalError::Io(err.to_string())
    }
}
