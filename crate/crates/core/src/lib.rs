//! Multipolynomials on finite-dimensional lp spaces: data model, sup-norm
//! estimation, random-sign and diagonal witness constructions, folding maps,
//! critical exponents, and scaling experiments.

pub mod cli;
pub mod constructions;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod norms;
pub mod poly;
pub mod seed;

pub use error::{Error, Result};
pub use poly::{BlockDegrees, MultiIndex, Multipolynomial, Point};
