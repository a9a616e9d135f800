//! Numerical laboratory for the coupled cubic Klein-Gordon system
//!
//! ```text
//! u_i'' - Δu_i + u_i = μ_i u_i^3 + β u_j^2 u_i,   i ≠ j ∈ {1, 2}
//! ```
//!
//! on a periodic box: ground states and the mountain-pass level, sign-based
//! region classification, a spectral split-step integrator, Lorentz boosts and a
//! finite-sequence profile decomposition.

pub mod classify;
pub mod error;
pub mod functionals;
pub mod groundstate;
pub mod lorentz;
pub mod profiles;
pub mod propagator;
pub mod spectral;
pub mod validation;

pub use error::{Error, Result};
