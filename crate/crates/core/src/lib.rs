pub mod bessel;
pub mod cli;
pub mod correlations;
pub mod ed;
pub mod entropy;
pub mod error;
pub mod matrix;
pub mod permanent;
pub mod single_particle;
pub mod stats;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, C64};
