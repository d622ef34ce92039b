//! Plaquette boundaries of good-path clusters in bond percolation on `Z^d`,
//! self-avoiding walk counts, and oriented/admissible percolation estimates.

pub mod cli;
pub mod error;
mod explore;
pub mod good_cluster;
pub mod lattice;
pub mod mc;
pub mod oriented;
pub mod sampler;
pub mod saw;
pub mod sphere;
mod uf;

pub use error::{BoundError, LatticeError, OrientedError, PathError, SawError, SphereError};
pub use lattice::{Bond, Cone, Plaquette, Site, Slope};
pub use sampler::{BondConfig, BondField, BondState};

/// Version string embedded in result files.
pub const ENGINE_VERSION: &str = concat!("plaq ", env!("CARGO_PKG_VERSION"));
