//! Simulation and estimate verification for the tropical climate model with
//! baroclinic diffusion on a periodic box.

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod io;
pub mod solver;
pub mod spectral;

pub use error::{Error, ErrorClass, Result};
