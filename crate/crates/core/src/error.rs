use thiserror::Error;

/// Errors raised by the kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tensor is not skew-symmetric (|A + Aᵀ| = {residual:e})")]
    NotSkew { residual: f64 },
    #[error("degenerate tensor (det = {det:e})")]
    Degenerate { det: f64 },
    #[error("degenerate chart (g = {g:e})")]
    DegenerateChart { g: f64 },
    #[error("degenerate surface (a = {a:e})")]
    DegenerateSurface { a: f64 },
    #[error("point {point:?} outside the sampled domain")]
    OutOfDomain { point: Vec<f64> },
    #[error("field value drifted from SO(3) (|QᵀQ − 1| = {drift:e})")]
    NotARotation { drift: f64 },
    #[error("no analytic derivative available for {what}")]
    NoAnalyticDerivative { what: &'static str },
    #[error("Nye relation violated by the inputs (residual {residual:e})")]
    NyeViolated { residual: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("line search stalled at iteration {iteration}")]
    LineSearchStalled { iteration: usize },
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
