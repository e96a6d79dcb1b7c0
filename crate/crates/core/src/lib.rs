//! Leading constants and exact point counts for two squareful orbifolds on the
//! projective line: the three-point orbifold `z0 + z1 = z2` with all `z_i`
//! squareful, and the binary forms `a x^2 + b y^2` with squareful values.

pub mod arith;
pub mod constants;
pub mod counting;
pub mod enclosure;
mod error;
pub mod eulerprod;
pub mod localdensity;

pub use enclosure::Enclosure;
pub use error::{Error, Result};
