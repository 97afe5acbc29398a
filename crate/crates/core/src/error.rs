use thiserror::Error;

use crate::subset::MAX_ELEMENTS;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ground set: n = {n}, k = {k} (need 1 <= k <= n <= {MAX_ELEMENTS})")]
    InvalidGroundSet { n: usize, k: usize },

    #[error("element {element} is already in the subset")]
    ElementPresent { element: usize },

    #[error("candidate set is empty")]
    EmptyCandidates,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible model: {0}")]
    Infeasible(String),

    #[error("enumeration guard exceeded: {count} subsets > {limit}")]
    GuardExceeded { count: f64, limit: f64 },

    #[error("function is not non-decreasing: f({{{element}}} | S) = {value} < 0 at S = {subset}")]
    NonMonotone { element: usize, subset: String, value: f64 },

    #[error("utility structure violates positivity (item {item})")]
    Positivity { item: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
