//! Self-similar solutions of the nonlinear cylindrical Cattaneo heat-conduction system
//!
//! ```text
//! q_t = −T^ε q − T^(ε+ω) T_r,      T_t = −q_r − q/r
//! ```
//!
//! with `κ ∝ T^ω` and `τ ∝ T^(−ε)`. The crate derives the similarity exponents,
//! integrates shape profiles in the `(f, η²)` phase plane, records shock fronts,
//! reconstructs `T(r, t)` and `q(r, t)`, and checks every field against the governing
//! equations with finite-difference residuals.

pub mod cli;
pub mod closed_forms;
pub mod error;
pub mod exponents;
pub mod fields;
pub mod integrator;
pub mod io;
pub mod materials;
pub mod phase_plane;
pub mod profile;
pub mod scan;
pub mod verification;

pub use error::{Error, Result};
pub use exponents::{derive_exponents, singular_geometry, SimilarityExponents, SingularGeometry};
pub use phase_plane::{
    integrate_trajectory, rhs_linear, rhs_nonlinear, FlowDirection, PhasePoint, PhaseTrajectory,
    Termination, TrajectoryControls,
};
pub use profile::{build_profile, FrontKind, Profile, ShockFront};
