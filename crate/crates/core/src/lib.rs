//! Impulsive optimal control processes, nonsmooth target cones, Lie brackets
//! and residual checks for higher-order extremals.

pub mod brackets;
pub mod cones;
pub mod error;
pub mod example;
pub mod extremality;
pub mod fields;
pub mod linalg;
pub mod lp;
pub mod processes;

pub use error::{Error, Result};
