use thiserror::Error;

use crate::airy::AiryError;
use crate::C64;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Airy(#[from] AiryError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("η grid too small: shifted support reaches {needed:.3}, grid ends at {have:.3}")]
    GridTooSmall { needed: f64, have: f64 },
    #[error("line field does not decay at the grid edge (edge/max = {ratio:.2e})")]
    TruncatedSpectrum { ratio: f64 },
    #[error("quadrature did not converge ({nodes} nodes, estimated relative error {error:.2e}) {context}")]
    Quadrature { nodes: usize, error: f64, context: String },
    #[error("Evans determinant underflow at c = {c} (ln|D| = {ln_abs:.1}); move the contour")]
    DeterminantUnderflow { c: C64, ln_abs: f64 },
    #[error("t = {t} is below the contour minimum time {t_min}")]
    TimeTooSmall { t: f64, t_min: f64 },
    #[error("contour tail not converged on segment {segment}: |e^(-iαct)| = {residual:.2e} at the last node")]
    TailNotConverged { segment: String, residual: f64 },
    #[error("under-resolved: ψ spectral tail {tail:.2e} exceeds 1e-6 of its norm; try N = {suggested_n}")]
    UnderResolved { tail: f64, suggested_n: usize },
    #[error("linear solve failed (condition estimate {condition:.2e})")]
    LinearSolve { condition: f64 },
    #[error("fit needs at least {need} positive samples, got {got}")]
    BadSamples { need: usize, got: usize },
    #[error("weight region under-resolved: {nodes} nodes within ε^(3/2) of a wall, need 4")]
    WeightUnderResolved { nodes: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
