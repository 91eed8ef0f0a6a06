//! Combinatorial outer approximations of flows on box grids, finite
//! topological spaces, eventual sets, and pseudo-orbit chain verification.

pub mod boxmap;
pub mod chains;
pub mod config;
pub mod error;
pub mod flow;
pub mod grid;
pub mod limits;
pub mod report;
pub mod setmap;
pub mod space;

pub use error::{Error, Result};
