//! Two-dimensional flagellated microswimmer model: a rigid elliptical body with a
//! clamped elastic flagellum, force- and torque-balanced against Stokes drag.
//!
//! The crate integrates the coupled body-ODE / flagellum-PDE system in
//! nondimensional form, evaluates per-swimmer Kirkwood stresses and the effective
//! viscosity of a dilute suspension, provides the closed-form rigid-flagellum
//! (small `eps`) expansion for cross-validation, and classifies wall-escape
//! behaviour as a function of bending stiffness.
//!
//! Conventions used throughout:
//! * arc length `s` runs over `[0, 1]` after scaling by the flagellum length `L`,
//!   with `s = 0` clamped to the body and `s = 1` free;
//! * time is scaled by the shear rate, stresses by `zeta_f * gamma_dot * L^2`;
//! * the background shear flow is `u = (-gamma_dot * y, 0)`.

pub mod asymptotics;
pub mod dynamics;
pub mod linalg;
pub mod params;
pub mod quad;
pub mod rheology;
pub mod root;
pub mod wall;

mod error;

pub use error::Error;
pub use params::{BackgroundFlow, DimensionlessParams, PhysicalParams};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
