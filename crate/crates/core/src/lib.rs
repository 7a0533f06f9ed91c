//! Total-Lagrangian smoothed particle hydrodynamics for solids in generalized
//! coordinates, with overset subdomains, Johnson-Cook plasticity and damage,
//! and Rankine bond failure.

pub mod domain;
pub mod error;
pub mod io;
pub mod kernel;
pub mod mapping;
pub mod material;
pub mod mechanics;
pub mod particles;
pub mod tensor;
pub mod timeloop;

pub use error::{GsphError, Result};
pub use io::config::SimConfig;
pub use timeloop::{setup, Simulation};
