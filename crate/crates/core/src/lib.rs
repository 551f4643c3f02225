//! Exact arithmetic on combinatorial cubes over `Z` and `F_p`.

pub mod cli;
pub mod cube;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod incidence;
pub mod numeric;
pub mod set;
pub mod setops;
pub mod structure;

pub use cube::CubeSpec;
pub use error::{Error, Result};
pub use numeric::{AmbientRing, Elem, Mode};
pub use set::FiniteSet;
