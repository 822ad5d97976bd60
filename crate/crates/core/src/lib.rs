//! Numerical construction and certification of trisecants and multisecants
//! of theta divisors of hyperelliptic Jacobians.

pub mod context;
pub mod curve;
pub mod error;
pub mod gamma00;
pub mod geometry;
pub mod numeric;
pub mod report;
pub mod secant;
pub mod selftest;
pub mod theta;

pub use error::{Error, Result};

pub use nalgebra;
pub use num_complex;
