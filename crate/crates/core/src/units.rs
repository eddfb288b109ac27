//! Physical constants (CODATA 2018 exact/recommended values).
//!
//! Energies are carried in eV throughout the crate, flux in webers and time
//! in seconds.

use std::f64::consts::PI;

/// Planck constant in eV·s, from the exact SI values of h and e.
pub const PLANCK_H: f64 = 6.626_070_15e-34 / ELECTRONVOLT;
/// Reduced Planck constant in eV·s. Derived from h so that ħ·2π = h holds
/// to the last bit that matters.
pub const HBAR: f64 = PLANCK_H / (2.0 * PI);
/// Boltzmann constant in eV/K.
pub const BOLTZMANN: f64 = 8.617_333_262e-5;
/// Joules per electronvolt (numerically the elementary charge in coulombs).
pub const ELECTRONVOLT: f64 = 1.602_176_634e-19;
/// Superconducting flux quantum h/2e in webers.
pub const FLUX_QUANTUM: f64 = 6.626_070_15e-34 / (2.0 * ELECTRONVOLT);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub planck_h: f64,
    pub boltzmann: f64,
    pub flux_quantum: f64,
    pub electronvolt: f64,
}

pub const CODATA: PhysicalConstants = PhysicalConstants {
    hbar: HBAR,
    planck_h: PLANCK_H,
    boltzmann: BOLTZMANN,
    flux_quantum: FLUX_QUANTUM,
    electronvolt: ELECTRONVOLT,
};

#[inline]
pub fn joules_to_ev(j: f64) -> f64 {
    j / ELECTRONVOLT
}

#[inline]
pub fn ev_to_joules(ev: f64) -> f64 {
    ev * ELECTRONVOLT
}

/// Kinetic coefficient ħ²/(2CΦ₀²) of the flux-space Hamiltonian in eV, for
/// the dimensionless coordinate x = (Φ − Φ^ext)/Φ₀.
pub fn kinetic_coefficient(capacitance: f64) -> f64 {
    let hbar_js = HBAR * ELECTRONVOLT;
    joules_to_ev(hbar_js * hbar_js / (2.0 * capacitance * FLUX_QUANTUM * FLUX_QUANTUM))
}

/// Period h/ΔE in seconds of a Bohr oscillation with energy gap `gap` (eV).
pub fn bohr_period(gap: f64) -> f64 {
    2.0 * PI * HBAR / gap.abs()
}
