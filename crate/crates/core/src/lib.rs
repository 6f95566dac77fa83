//! Semiclassical hydrogen: the Moser and Fock maps, hydrogen coherent states,
//! Weyl matrix elements and the numerical checks of their classical limits.

pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod symbol;

pub use error::{Error, ErrorClass, Result};
pub use geometry::{AlphaFrame, KeplerOrbit, PhasePoint, SemiclassicalScale, SpherePoint, Vec3, Vec4};
pub use symbol::{Ball, SeparableTerm, SymbolKind, SymbolSpec};
pub mod experiments;
pub mod quantize;
pub mod states;
pub mod stationary;
pub use quantize::{cross_matrix_element, matrix_element, MatrixElementReport, Method, QuantizeOptions};
pub use states::{GridSpec, GridState, MomentumState, SphericalState};
