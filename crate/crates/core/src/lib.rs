//! Interval-censored survival analysis of establishment birth cohorts.
//!
//! Nonparametric estimators (life table and Peto-Turnbull), maximum
//! likelihood fits of nine parametric lifetime families, AIC model ranking
//! and hazard shape classification with change-point location.

pub mod cli;
pub mod distributions;
pub mod error;
pub mod fitting;
pub mod hazard_analysis;
pub mod ingestion;
pub mod nonparametric;
pub mod optim;
pub mod report;
pub mod selection;
pub mod special_fn;

pub use distributions::{ModelFamily, ParamVector, ShapeClass, ShapeReport};
pub use error::{Result, SurvivalError};
pub use fitting::{fit_mle, FitOptions, FitResult, FitStrategy};
pub use hazard_analysis::{analyze_cohort, AnalysisOptions, CohortShapeReport};
pub use ingestion::{build_cohort, parse_bds_csv, BdsRow};
pub use nonparametric::{life_table_estimate, peto_turnbull_closed_form, Cohort, SurvivalEstimate};
pub use selection::{rank_models, ModelRanking, SupportClass};
