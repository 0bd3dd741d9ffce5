//! Mean value of the external force operator for one-dimensional
//! Schrödinger, Klein-Fock-Gordon (Feshbach-Villars form) and Dirac
//! particles scattering off a finite step potential.
//!
//! The crate builds exact stationary scattering modes of the sharp step,
//! evaluates the mean force in three independent ways (closed form,
//! smoothed-step limit, boundary-term reconstruction), and provides the
//! limit checks and time-domain Ehrenfest run that probe them.
//!
//! All quantities are per unit incident amplitude unless stated otherwise.

pub mod error;
pub mod force;
pub mod grid;
pub mod modes;
pub mod params;
pub mod potential;
pub mod quad;
pub mod regularized;
pub mod timeevo;

pub use error::{Error, Result};
pub use force::{
    boundary_terms, current, delta_conventions, density, density_probe, kfg_density_jump,
    mean_force_closed, BoundaryTerms, DeltaIntegral, DensityProbe, MeanForce, MeanForceReport,
};
pub use grid::GridSpec;
pub use modes::{
    dispersion, solve_step_mode, Location, MatrixSet, Regime, ScatterMode, Theory, Wavenumber,
};
pub use params::PhysicalParams;
pub use potential::{RegularizedPotential, Shape, Side, StepPotential};
pub use regularized::{
    extrapolate, route_b_force, solve_smooth_mode, ConvergenceSeries, Extrapolation,
    NumericalMode, Resolution,
};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
