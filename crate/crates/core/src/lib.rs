//! Joint spectral measures of the exceptional Lie group G2.

pub mod characters;
pub mod elliptic_densities;
pub mod exact_linalg;
pub mod invariant_measures;
pub mod jacobian_geometry;
pub mod laurent;
pub mod modular_verlinde;
pub mod quadrature;
pub mod verify;
pub mod walk_moments;
pub mod weyl_torus;

pub use characters::{DominantWeight, Fundamental};
pub use laurent::LaurentPoly2;
pub use weyl_torus::{TorusPoint, WeylElement};
