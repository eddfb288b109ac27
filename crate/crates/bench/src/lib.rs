//! Shared fixtures for the benchmarks.

use fluxdamp_core::units::kinetic_coefficient;
use fluxdamp_core::{solve_spectrum, Grid, QuarticPotential, SpectralBasis};

pub const CAPACITANCE: f64 = 1.10063e-16;

pub fn potential() -> QuarticPotential {
    QuarticPotential::new(1.80487, 14.73360).expect("valid well")
}

pub fn basis(n_points: usize, n_levels: usize) -> SpectralBasis {
    let q = potential();
    let grid = Grid::new(-0.8, 0.8, n_points).expect("grid");
    solve_spectrum(
        &grid,
        kinetic_coefficient(CAPACITANCE),
        |x| q.relative(x),
        n_levels,
    )
    .expect("spectrum")
}
