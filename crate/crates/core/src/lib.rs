//! Normalized solutions of the mass-constrained nonlinear Schrodinger problem
//!
//! ```text
//! -Δu + λu + V(x)u = |u|^{p-2}u   in Ω,   u = 0 on ∂Ω,   ∫ u² = ρ²
//! ```
//!
//! on ℝᴺ or an exterior domain, in the mass-subcritical range `2 < p < 2 + 4/N`.
//!
//! The crate is organised bottom-up:
//! * [`scaling`]: exponents, scaling relations, integral identities and elementary inequalities.
//! * [`ground_state`]: the radial soliton of the autonomous problem by shooting.
//! * [`interaction`]: overlap integrals between two solitons and their asymptotic constants.
//! * [`domain`]: obstacles, the cutoff θ, potentials and smallness thresholds.
//! * [`field`]: finite-difference fields on boxes with Dirichlet masks.
//! * [`minmax`]: test surfaces, energy landmarks, the barycenter witness and the saddle search.

pub mod domain;
pub mod error;
pub mod field;
pub mod ground_state;
pub mod interaction;
pub mod linalg;
pub mod minmax;
pub mod ode;
pub mod quad;
pub mod scaling;
pub mod special;
pub mod svg;

pub use error::{Error, Result};
pub use scaling::{ModelParams, ScalingConstants};
