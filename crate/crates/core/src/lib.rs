//! Flux-qubit tunneling under continuous energy measurement.
//!
//! The crate covers the rf-SQUID double-well model ([`model`]), a
//! finite-difference eigensolver ([`spectrum`]), initial-state preparation
//! ([`state`]), the closed-form measured dynamics ([`damping`]) and two
//! independent oracles for it: direct integration of the master equation
//! ([`ode`]) and a quantum-jump Monte Carlo unravelling ([`trajectory`]).
//!
//! Units: energies in eV, time in seconds, flux in units of Φ₀ unless a
//! function says otherwise.

// `!(a > b)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod calibration;
pub mod damping;
pub mod error;
pub mod grid;
pub mod io;
pub mod model;
pub mod ode;
pub mod phase;
pub mod spectrum;
pub mod state;
pub mod sum;
pub mod trajectory;
pub mod tridiag;
pub mod units;

pub use damping::{
    decay_table, evolve_density, flux_trace, two_level_density, two_level_flux, DecayTable,
    FluxEvaluator, FluxTrace, MeasurementCoupling, TraceMetadata,
};
pub use error::{Error, Result};
pub use grid::Grid;
pub use model::{CircuitParams, QuarticPotential, WellGeometry};
pub use spectrum::{solve_spectrum, EnergyLevels, Parity, SpectralBasis};
pub use state::{DensityMatrix, GaussianSpec, Localization, ProjectedState, Wavefunction};
pub use trajectory::{run_trajectories, EnergyReference, TrajectoryConfig, TrajectoryResult};
