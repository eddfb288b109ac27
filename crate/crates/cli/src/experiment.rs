//! Turns a validated config into a solved basis and an initial state.

use anyhow::{Context, Result};
use fluxdamp_core::calibration::calibrate_capacitance;
use fluxdamp_core::model::{self, CircuitParams};
use fluxdamp_core::state::{
    density_from_projection, lr_coefficients, make_gaussian, make_lr_state, project, MIN_CAPTURE,
};
use fluxdamp_core::units::kinetic_coefficient;
use fluxdamp_core::{
    DensityMatrix, EnergyLevels, GaussianSpec, Grid, Localization, QuarticPotential, SpectralBasis,
};
use num_complex::Complex64;

use crate::config::{config_error, ExperimentConfig, InitialState, PotentialConfig};

#[derive(Debug, Clone, Copy)]
pub enum Potential {
    Quartic(QuarticPotential),
    Harmonic { stiffness: f64 },
}

impl Potential {
    /// V(x) − V₀ in eV.
    pub fn relative(&self, x: f64) -> f64 {
        match self {
            Potential::Quartic(q) => q.relative(x),
            Potential::Harmonic { stiffness } => 0.5 * stiffness * x * x,
        }
    }
}

pub struct Experiment {
    pub potential: Potential,
    pub capacitance: f64,
    /// Set when C was fitted to a target ground energy.
    pub calibration_iterations: Option<usize>,
    pub grid: Grid,
    pub basis: SpectralBasis,
}

impl Experiment {
    pub fn levels(&self) -> &EnergyLevels {
        self.basis.levels()
    }

    pub fn kinetic(&self) -> f64 {
        kinetic_coefficient(self.capacitance)
    }
}

fn potential(cfg: &ExperimentConfig) -> Result<Potential> {
    if let Some(p) = &cfg.potential {
        return Ok(match *p {
            PotentialConfig::Quartic { mu, lambda } => {
                let q = QuarticPotential::new(mu, lambda)
                    .map_err(|e| config_error(format!("potential: {e}")))?;
                if q.mu <= 0.0 {
                    return Err(config_error(format!(
                        "potential: mu = {mu} gives a single well"
                    )));
                }
                Potential::Quartic(q)
            }
            PotentialConfig::Harmonic { stiffness } => {
                if !(stiffness > 0.0 && stiffness.is_finite()) {
                    return Err(config_error(format!(
                        "potential: stiffness must be positive, got {stiffness}"
                    )));
                }
                Potential::Harmonic { stiffness }
            }
        });
    }
    let c = cfg.circuit.as_ref().expect("validated: one block present");
    let params = CircuitParams::symmetric(None, c.inductance, c.critical_current, c.bias_quanta)
        .map_err(|e| config_error(format!("circuit: {e}")))?;
    let q = model::to_quartic(&params).map_err(|e| config_error(format!("circuit: {e}")))?;
    Ok(Potential::Quartic(q))
}

pub fn build(cfg: &ExperimentConfig) -> Result<Experiment> {
    let potential = potential(cfg)?;
    let grid = Grid::new(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_points)
        .map_err(|e| config_error(format!("grid: {e}")))?;
    let (capacitance, calibration_iterations) = match (
        cfg.capacitance.value,
        cfg.capacitance.calibrate_ground_energy,
    ) {
        (Some(c), _) => (c, None),
        (None, Some(target)) => {
            let Potential::Quartic(q) = potential else {
                return Err(config_error("calibration needs a double-well potential"));
            };
            let [lo, hi] = cfg.capacitance.search_range;
            let cal = calibrate_capacitance(&q, &grid, target, (lo, hi))
                .context("capacitance calibration")?;
            (cal.capacitance, Some(cal.iterations))
        }
        (None, None) => unreachable!("validated"),
    };
    let basis = fluxdamp_core::solve_spectrum(
        &grid,
        kinetic_coefficient(capacitance),
        |x| potential.relative(x),
        cfg.levels,
    )
    .context("eigensolver")?;
    Ok(Experiment {
        potential,
        capacitance,
        calibration_iterations,
        grid,
        basis,
    })
}

/// ρ(0) plus the retained norm (1 for the |L⟩/|R⟩ states).
pub fn initial_density(
    exp: &Experiment,
    state: &InitialState,
) -> Result<(DensityMatrix, f64, Vec<Complex64>)> {
    let n = exp.basis.n_levels();
    match *state {
        InitialState::Gaussian {
            x_m,
            sigma_x,
            renormalize,
        } => {
            let spec = GaussianSpec { x_m, sigma_x };
            let wf = make_gaussian(&spec, &exp.grid)
                .map_err(|e| config_error(format!("initial_state: {e}")))?;
            let p = project(&wf, &exp.basis)?;
            if let Some(w) = p.low_capture_warning() {
                eprintln!("warning: {w}");
            }
            let rho = density_from_projection(&p, renormalize, MIN_CAPTURE)?;
            let scale = if renormalize {
                p.captured_norm.sqrt()
            } else {
                1.0
            };
            let coeffs = p.coefficients.iter().map(|c| c / scale).collect();
            Ok((rho, p.captured_norm, coeffs))
        }
        InitialState::Left | InitialState::Right => {
            let which = if matches!(state, InitialState::Left) {
                Localization::Left
            } else {
                Localization::Right
            };
            let rho = make_lr_state(which, exp.levels())?;
            Ok((rho, 1.0, lr_coefficients(which, n)?))
        }
    }
}
