//! Axisymmetric, swirl-free, variable-density incompressible Navier–Stokes
//! on a staggered (r, z) grid, with diagnostics for the energy identity, the
//! Γ = ω/r maximum principle, a/r transport bounds and long-time decay.

pub mod config;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod gamma;
pub mod mesh;
pub mod momentum;
pub mod state;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
pub use field::{ScalarFieldRZ, Staggering, VelocityFieldRZ};
pub use mesh::{GridSpec, WeightedMeasure};
pub use state::{FlowState, InitialData};
