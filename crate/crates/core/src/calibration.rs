//! Capacitance calibration against a target ground-state energy.
//!
//! The capacitance fixes the kinetic coefficient but is only known to an
//! order of magnitude, so it is tuned until E₀ of the quartic well matches
//! a reference value. E₀ decreases monotonically with C (heavier flux
//! "mass"), which makes bisection safe.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::QuarticPotential;
use crate::spectrum::solve_spectrum;
use crate::units;

/// Ground-state energy (relative to V₀) the default well is calibrated to.
pub const REFERENCE_GROUND_ENERGY: f64 = -0.044_059_1;
/// Default scan window for the capacitance, in farads.
pub const DEFAULT_RANGE: (f64, f64) = (0.5e-16, 2.0e-16);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub capacitance: f64,
    pub ground_energy: f64,
    pub iterations: usize,
}

fn ground_energy(q: &QuarticPotential, grid: &Grid, capacitance: f64) -> Result<f64> {
    let k = units::kinetic_coefficient(capacitance);
    Ok(solve_spectrum(grid, k, |x| q.relative(x), 1)?.energies()[0])
}

/// Finds C in `range` with E₀(C) = `target` to a relative C tolerance of 1e-9.
pub fn calibrate_capacitance(
    q: &QuarticPotential,
    grid: &Grid,
    target: f64,
    range: (f64, f64),
) -> Result<Calibration> {
    let (mut lo, mut hi) = range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "bad capacitance range {range:?}"
        )));
    }
    let (e_lo, e_hi) = (ground_energy(q, grid, lo)?, ground_energy(q, grid, hi)?);
    if !(e_hi <= target && target <= e_lo) {
        return Err(Error::InvalidParameter(format!(
            "target E0 = {target} eV outside [{e_hi}, {e_lo}] spanned by C in {range:?}"
        )));
    }
    let mut iterations = 0;
    while (hi - lo) > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if ground_energy(q, grid, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let capacitance = 0.5 * (lo + hi);
    Ok(Calibration {
        capacitance,
        ground_energy: ground_energy(q, grid, capacitance)?,
        iterations,
    })
}
