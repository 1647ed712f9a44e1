//! Sharp Poincaré inequalities for radial functions on hyperbolic space.
//!
//! Everything is expressed in the volume coordinate `s = |B(0, ρ)|`: radial
//! functions become [`profile::RadialProfile`]s on `[0, ∞)` and the
//! Laplace-Beltrami operator becomes `Δv = (A(s)² v')'` with `A` the surface
//! measure of the geodesic sphere enclosing volume `s`.

pub mod error;
pub mod extremizers;
pub mod geometry;
pub mod numerics;
pub mod profile;
pub mod rearrangement;
pub mod selfcheck;
pub mod variational;

pub use error::{Error, Result};
pub use geometry::SpaceParams;
pub use profile::RadialProfile;
