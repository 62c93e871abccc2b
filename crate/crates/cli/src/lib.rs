//! Experiment runner for the noisy encoding-decoding simulator: configuration,
//! sweeps, result tables, manifests and SVG plots.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
pub mod validate;
