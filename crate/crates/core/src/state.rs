//! Initial states: Gaussian flux wavepackets, the |L⟩/|R⟩ doublet
//! superpositions, and their density matrices in the energy eigenbasis.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectrum::{EnergyLevels, SpectralBasis};

/// Default minimum captured norm accepted by [`density_from_projection`].
pub const MIN_CAPTURE: f64 = 0.9;
/// Captured norm below which a projection is reported as lossy.
pub const CAPTURE_WARNING: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    pub x_m: f64,
    pub sigma_x: f64,
}

impl GaussianSpec {
    /// Initial packet of the damping sweeps: x_m = −0.27, σ_x = 0.06.
    pub const REFERENCE: GaussianSpec = GaussianSpec {
        x_m: -0.27,
        sigma_x: 0.06,
    };

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.sigma_x.is_finite() && self.sigma_x > 0.0 && self.x_m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gaussian needs finite x_m and sigma_x > 0, got {self:?}"
            )));
        }
        let reach = self.x_m.abs() + 5.0 * self.sigma_x;
        let limit = grid.x_max.min(-grid.x_min);
        if reach >= limit {
            return Err(Error::SupportOverflow { reach, limit });
        }
        Ok(())
    }

    /// Flux centre Φ_m = x_mΦ₀ + Φ^ext in webers.
    pub fn flux_centre(&self, flux_quantum: f64, external_flux: f64) -> f64 {
        self.x_m * flux_quantum + external_flux
    }

    /// σ_Φ = Φ₀σ_x in webers.
    pub fn flux_width(&self, flux_quantum: f64) -> f64 {
        flux_quantum * self.sigma_x
    }
}

/// Real wavefunction sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Wavefunction {
    pub fn norm_squared(&self) -> f64 {
        self.grid.integrate(|i| self.values[i] * self.values[i])
    }

    pub fn mean_x(&self) -> f64 {
        self.grid
            .integrate(|i| self.values[i] * self.values[i] * self.grid.x(i))
    }
}

/// ψ₀(x) = (πσ²)^(−1/4) exp(−(x − x_m)²/2σ²), renormalized on the grid.
pub fn make_gaussian(spec: &GaussianSpec, grid: &Grid) -> Result<Wavefunction> {
    spec.validate(grid)?;
    let prefactor = (PI * spec.sigma_x * spec.sigma_x).powf(-0.25);
    let mut values: Vec<f64> = grid
        .points()
        .iter()
        .map(|x| {
            let d = (x - spec.x_m) / spec.sigma_x;
            prefactor * (-0.5 * d * d).exp()
        })
        .collect();
    let wf = Wavefunction {
        grid: *grid,
        values: values.clone(),
    };
    let scale = wf.norm_squared().sqrt();
    values.iter_mut().for_each(|v| *v /= scale);
    Ok(Wavefunction {
        grid: *grid,
        values,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedState {
    /// c_n = ⟨n|ψ₀⟩.
    pub coefficients: Vec<Complex64>,
    /// Σ|c_n|².
    pub captured_norm: f64,
    pub basis_size: usize,
}

impl ProjectedState {
    pub fn low_capture_warning(&self) -> Option<String> {
        (self.captured_norm < CAPTURE_WARNING).then(|| {
            format!(
                "only {:.2}% of the initial state lies in the {} retained levels",
                100.0 * self.captured_norm,
                self.basis_size
            )
        })
    }
}

pub fn project(wavefunction: &Wavefunction, basis: &SpectralBasis) -> Result<ProjectedState> {
    if wavefunction.grid != *basis.grid() || wavefunction.values.len() != basis.grid().n_points {
        return Err(Error::GridMismatch {
            expected: basis.grid().n_points,
            got: wavefunction.values.len(),
        });
    }
    let coefficients: Vec<Complex64> = basis
        .eigenfunctions()
        .iter()
        .map(|phi| Complex64::new(basis.inner(phi, &wavefunction.values), 0.0))
        .collect();
    let captured_norm = coefficients.iter().map(|c| c.norm_sqr()).sum();
    Ok(ProjectedState {
        basis_size: coefficients.len(),
        coefficients,
        captured_norm,
    })
}

/// Density matrix in the energy eigenbasis, ρ_nm = ⟨n|ρ̂|m⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub elements: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(coefficients: &[Complex64]) -> Self {
        let n = coefficients.len();
        Self {
            elements: DMatrix::from_fn(n, n, |i, j| coefficients[i] * coefficients[j].conj()),
        }
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.elements.trace()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_nm|² for Hermitian ρ.
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.elements[(i, j)] - self.elements[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .elements
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.elements[(i, i)].re).collect()
    }

    /// Tr(ρ Â) for a real symmetric operator given in the same basis.
    pub fn expectation(&self, operator: &DMatrix<f64>) -> Complex64 {
        let n = self.dim();
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                sum += self.elements[(i, j)] * operator[(j, i)];
            }
        }
        sum
    }

    /// max |ρ_nm − σ_nm|.
    pub fn max_distance(&self, other: &DensityMatrix) -> f64 {
        self.elements
            .iter()
            .zip(other.elements.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// ρ_nm(0) = c_n c*_m, optionally rescaled to unit trace.
pub fn density_from_projection(
    state: &ProjectedState,
    renormalize: bool,
    min_capture: f64,
) -> Result<DensityMatrix> {
    if !(state.captured_norm > min_capture) {
        return Err(Error::InsufficientCapture {
            captured: state.captured_norm,
            required: min_capture,
        });
    }
    let mut rho = DensityMatrix::from_pure(&state.coefficients);
    if renormalize {
        rho.elements /= Complex64::new(state.captured_norm, 0.0);
    }
    Ok(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Localization {
    Left,
    Right,
}

/// Coefficients of |L⟩ = (|0⟩ + |1⟩)/√2 or |R⟩ = (|0⟩ − |1⟩)/√2 in an
/// `n_levels` basis.
pub fn lr_coefficients(which: Localization, n_levels: usize) -> Result<Vec<Complex64>> {
    if n_levels < 2 {
        return Err(Error::InvalidParameter(
            "|L>/|R> states need at least two levels".into(),
        ));
    }
    let mut c = vec![Complex64::new(0.0, 0.0); n_levels];
    c[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    c[1] = Complex64::new(
        match which {
            Localization::Left => FRAC_1_SQRT_2,
            Localization::Right => -FRAC_1_SQRT_2,
        },
        0.0,
    );
    Ok(c)
}

pub fn make_lr_state(which: Localization, levels: &EnergyLevels) -> Result<DensityMatrix> {
    if levels.n_levels() >= 2 && levels.x(0, 1)? >= 0.0 {
        return Err(Error::InvalidParameter(
            "basis gauge must have <0|x|1> < 0".into(),
        ));
    }
    Ok(DensityMatrix::from_pure(&lr_coefficients(
        which,
        levels.n_levels(),
    )?))
}
