//! Zeta and real L-values, and Euler products accelerated by them.

pub mod character;
mod product;
mod products;
mod series;
mod zeta;

pub use character::{Character, DirichletCharacter};
pub use product::{
    eval_product, Accelerator, EulerProductSpec, FixedRational, LocalFactor, ProductResult,
    RationalLocal,
};
pub use products::{
    c_pstva_binary, c_pstva_three, cor16_half, cor16_ratio, three_orbifold_closed_product,
    three_orbifold_spec, twisted_product, PrimeSelection, TwistedProduct, DEFAULT_PRIME_CUTOFF,
};
pub use series::{CAUCHY_RADIUS, SERIES_DEGREE};
pub use zeta::{dirichlet_l, hurwitz_zeta, zeta, zeta_with, DEFAULT_CORRECTIONS, DEFAULT_DIRECT_TERMS};
