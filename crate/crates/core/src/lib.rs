//! Spread-driven inflation model.
//!
//! The inflation rate is predicted as the logarithmic derivative of the
//! long-minus-short interest-rate spread, re-dated by a delay, and corrected
//! by the growth of the money supply and of output. The [`synthetic`] module
//! builds economies that satisfy the underlying income identity exactly, which
//! gives every numerical routine a ground-truth oracle.
//!
//! Numerics are generic over [`Real`] (`f32`, `f64`); the aliases below fix
//! the scalar to `f64`, which is what the CLI and file I/O use.

pub mod calendar;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod io;
pub mod model;
pub mod scalar;
pub mod series;
pub mod synthetic;

pub use calendar::Month;
pub use error::{Error, Result};
pub use scalar::Real;
pub use series::{align, Coverage, MaskedReport, TimeSeries, Units};

pub type Series = series::TimeSeries<f64>;
pub type Series32 = series::TimeSeries<f32>;
pub type Report = series::MaskedReport<f64>;
pub type Rates = model::RatePair<f64>;
pub type Params = model::ModelParams<f64>;
pub type Prediction = model::PredictionResult<f64>;
pub type Scenario = model::ScenarioSpec<f64>;
pub type Economy = model::EconomyPath<f64>;
pub type Metrics = estimation::FitMetrics<f64>;
pub type Fit = estimation::LagFit<f64>;
pub type Synthetic = synthetic::SyntheticSpec<f64>;
