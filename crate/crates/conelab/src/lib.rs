//! conelab: a numerical laboratory for cone fields on the half-plane
//! `V = R x (-inf, 0)` and their future causal boundaries.
//!
//! The crate integrates the two null characteristic families of metrics
//! `-dt^2 + b(t/x) dx^2`, represents chronological pasts as strict hypographs
//! of 1-Lipschitz boundary functions, assembles terminal past sets into
//! boundary atlases, pushes those sets forward along cone inclusions, maps
//! the interpolating spacetime onto a region of the flat plane, and
//! cross-validates the chronology against a brute-force lattice oracle.
//!
//! All numeric code is generic over the scalar type through [`scalar::Real`];
//! `f64` aliases for the main types are exported at the crate root.

pub mod cboundary;
pub mod chronology;
pub mod confmap;
pub mod conefield;
pub mod error;
pub mod gridoracle;
pub mod nullflow;
pub mod pushforward;
pub mod scalar;
pub mod verification;

pub use error::{Error, Result};

/// f64 lane of the core types.
pub type Point64 = conefield::Point<f64>;
pub type BetaProfile64 = conefield::BetaProfile<f64>;
pub type ConeField64 = conefield::ConeField<f64>;
pub type NullCurve64 = nullflow::NullCurve<f64>;
pub type NumericConfig64 = nullflow::NumericConfig<f64>;
pub type PastSet64 = chronology::PastSet<f64>;
pub type Tip64 = cboundary::Tip<f64>;
pub type BoundaryAtlas64 = cboundary::BoundaryAtlas<f64>;

/// f32 lane, usable at correspondingly looser tolerances.
pub type Point32 = conefield::Point<f32>;
pub type ConeField32 = conefield::ConeField<f32>;
