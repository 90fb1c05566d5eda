//! Shared numerical kernels: adaptive quadrature, compensated summation with
//! tail estimation, log-determinants, and special functions.
//!
//! Every public result carries a [`ConvergenceReport`]; truncation is never
//! silent.

mod config;
pub mod linalg;
pub mod quadrature;
pub mod special;
pub mod summation;

pub use config::{ChannelTruncation, ConvergenceReport, TruncationConfig};
pub use linalg::{logdet_one_minus, BandedRows, SquareMatrix};
pub use quadrature::{integrate, integrate_semi_infinite};
pub use summation::{sum_with_tail, NeumaierSum};
