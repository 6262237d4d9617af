//! Control power of corporate shareholders.
//!
//! * [`power_index`]: weighted voting games and the exact Shapley-Shubik index.
//! * [`evolution`]: Fibonacci probability ladder, collapse walks, the
//!   `R_{SPI=1}` wave and the atom-plus-normal control-power density.
//! * [`fitting`]: first-order Fourier fits with unknown period, normal fits
//!   and Pearson correlation with p-values.
//! * [`dataset`]: firm-year registry CSV ingestion, grouping, filtering and
//!   calibrated synthetic generators.
//! * [`pipeline`]: per-year statistics, fitted reports and their emission.

pub mod dataset;
pub mod evolution;
pub mod fitting;
pub mod par;
pub mod pipeline;
pub mod power_index;

pub use par::Execution;
