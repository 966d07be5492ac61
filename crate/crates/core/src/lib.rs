//! Reconstruction of a counterparty network from quarterly top-25 derivative
//! activity rankings, with weighted k-core and correlation analysis.
//!
//! The numeric code is generic over [`num::Real`]; the aliases below fix the
//! scalar to `f64`, which is what the command-line tool uses.

pub mod activity;
pub mod cli;
pub mod correlate;
pub mod error;
pub mod fmt;
pub mod ingest;
pub mod kcore;
pub mod matrix;
pub mod network;
pub mod num;
pub mod quarter;

pub use error::{Error, Result};
pub use ingest::{InstitutionId, Panel};
pub use quarter::{Quarter, QuarterRange};

pub type Matrix64 = matrix::SquareMatrix<f64>;
pub type AggregatedGraph64 = network::AggregatedGraph<f64>;
pub type TemporalNetwork64 = network::TemporalNetwork<f64>;
pub type CoreDecomposition64 = kcore::CoreDecomposition<f64>;
pub type CorrelationMatrix64 = correlate::CorrelationMatrix<f64>;
pub type LogNormalFit64 = activity::LogNormalFit<f64>;
pub type GrowthTrend64 = activity::GrowthTrend<f64>;
