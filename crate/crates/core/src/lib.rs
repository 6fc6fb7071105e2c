//! Ground state and entanglement of helium confined in an impenetrable
//! spherical cavity.

pub mod analysis;
pub mod basis;
pub mod config;
pub mod entropy;
pub mod error;
pub mod io;
pub mod quadrature;
pub mod schmidt;
pub mod solver;
pub mod spline;

pub use error::{Error, Result};
