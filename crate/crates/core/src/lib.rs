//! Numerical laboratory for scale-free unique continuation estimates and
//! their applications to Delone–Anderson random Schrödinger operators.

pub mod anderson;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod operator;
pub mod quadrature;
pub mod rng;
pub mod ucp;

pub use error::{Error, Result};
