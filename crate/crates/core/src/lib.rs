//! Multi-step conformal prediction intervals for hourly load forecasting.
//!
//! A multi-output ridge model forecasts the next `h` hours from a window of
//! lags and calendar features. Conformal ridge regression turns each step
//! into an interval, and one adaptive conformal controller per step tunes
//! its significance level online so the long-run error rate tracks a target.

pub mod aci;
pub mod config;
pub mod crr;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod ridge;
pub mod synth;
pub mod timeseries;

pub use error::{Error, Result};
