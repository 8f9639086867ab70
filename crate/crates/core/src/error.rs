use thiserror::Error;

pub type Result<T> = std::result::Result<T, GtsError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GtsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no Esscher solution for r = {rate}: admissible range is ({low}, {high})")]
    NoSolution { rate: f64, low: f64, high: f64 },

    #[error("invalid martingale measure: shifted lambda_plus = {lambda_plus} must exceed 1")]
    InvalidMeasure { lambda_plus: f64 },

    #[error("transform truncation: {0}")]
    Truncation(String),

    #[error("query point {x} outside grid span [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("observation {value} (index {index}) outside density grid [{lo}, {hi}]")]
    DataOutOfRange {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("contour integral has imaginary residual {residual:e} above bound {bound:e}")]
    Contour { residual: f64, bound: f64 },

    #[error("integrand is not finite at node {node}")]
    NonFiniteIntegrand { node: f64 },

    #[error("unsupported Newton-Cotes order {0} (only 12 is supported)")]
    UnsupportedOrder(usize),

    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),

    #[error("log-likelihood became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("series is empty or too short")]
    EmptySeries,

    #[error("io error: {0}")]
    Io(String),

    #[error("pricing cell (k = {k}, tau = {tau}) failed: {source}")]
    Cell {
        k: f64,
        tau: f64,
        #[source]
        source: Box<GtsError>,
    },
}

impl From<std::io::Error> for GtsError {
    fn from(e: std::io::Error) -> Self {
        GtsError::Io(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> GtsError {
    GtsError::Domain(msg.into())
}
