//! Estimation routines: first-order Fourier fits with an unknown period,
//! normal fits with one-sigma band counts, and Pearson correlation.

mod correlation;
mod fourier;
mod normal;
pub mod special;

use thiserror::Error;

pub use correlation::{p_from_r, pearson, CorrelationResult};
pub use fourier::{
    fit_fourier1, fit_fourier1_with, fourier_extrema, solve_fixed_period, FitOptions, FourierFit,
    TimeSeries, DEFAULT_GRID_STEP, DEGENERATE_AMPLITUDE, MIN_FOURIER_POINTS,
};
pub use normal::{fit_normal, NormalFit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("time points must be finite and strictly increasing (index {0})")]
    UnorderedTime(usize),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("t and y have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty period range [{0}, {1}]")]
    EmptyPeriodRange(f64, f64),
    #[error("grid step must be positive, got {0}")]
    BadGridStep(f64),
    #[error("fit is degenerate: no oscillation to take extrema of")]
    Degenerate,
    #[error("input is constant; correlation is undefined")]
    ConstantInput,
}
