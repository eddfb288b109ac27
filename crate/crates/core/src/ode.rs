//! Direct integration of the measurement master equation
//!
//! ```text
//! dρ/dt = −(i/ħ)[Ĥ, ρ] − (κ_E/2)[Â, [Â, ρ]]
//! ```
//!
//! in matrix form with an adaptive Dormand–Prince 5(4) integrator. This
//! makes no use of the diagonal structure and serves as an oracle for the
//! closed-form engine.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectrum::EnergyLevels;
use crate::state::DensityMatrix;
use crate::units::HBAR;

type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MasterEquation {
    pub hamiltonian: CMatrix,
    pub measured: CMatrix,
    pub kappa_e: f64,
}

impl MasterEquation {
    /// Ĥ = Â = diag(E_n) in the energy basis.
    pub fn energy_measurement(levels: &EnergyLevels, kappa_e: f64) -> Self {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            levels.n_levels(),
            levels.energies().iter().map(|&e| Complex64::new(e, 0.0)),
        ));
        Self {
            measured: h.clone(),
            hamiltonian: h,
            kappa_e,
        }
    }

    /// Same equation written in another orthonormal basis: Ĥ → UĤU†.
    pub fn rotated(&self, u: &CMatrix) -> Self {
        let ud = u.adjoint();
        Self {
            hamiltonian: u * &self.hamiltonian * &ud,
            measured: u * &self.measured * &ud,
            kappa_e: self.kappa_e,
        }
    }

    pub fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let comm = |a: &CMatrix, b: &CMatrix| a * b - b * a;
        let coherent = comm(&self.hamiltonian, rho) * Complex64::new(0.0, -1.0 / HBAR);
        let inner = comm(&self.measured, rho);
        coherent - comm(&self.measured, &inner) * Complex64::new(0.5 * self.kappa_e, 0.0)
    }

    /// Spectral-radius bound on the generator, used for the first step.
    fn rate_bound(&self) -> f64 {
        let norm = |m: &CMatrix| m.iter().map(|z| z.norm()).fold(0.0, f64::max) * m.nrows() as f64;
        2.0 * norm(&self.hamiltonian) / HBAR + 2.0 * self.kappa_e * norm(&self.measured).powi(2)
    }
}

// Dormand–Prince tableau (the equation is autonomous, so no c_i).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub steps: usize,
    pub rejected: usize,
}

/// Integrates from ρ(0) and reports ρ at each requested time (ascending).
pub fn integrate(
    eq: &MasterEquation,
    rho0: &DensityMatrix,
    times: &[f64],
    tol: Tolerances,
) -> Result<OdeSolution> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParameter(
            "output times must be nonnegative and ascending".into(),
        ));
    }
    let mut y = rho0.elements.clone();
    let mut t = 0.0;
    let mut h = 0.01 / eq.rate_bound().max(f64::MIN_POSITIVE);
    let mut k: Vec<CMatrix> = Vec::with_capacity(7);
    let mut first = eq.rhs(&y);
    let (mut steps, mut rejected) = (0usize, 0usize);
    let mut states = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            if steps + rejected >= tol.max_steps {
                return Err(Error::ConvergenceFailure {
                    level: 0,
                    residual: (target - t) / target.max(1e-300),
                });
            }
            let last = t + h >= target;
            let step = if last { target - t } else { h };
            k.clear();
            k.push(first.clone());
            for s in 1..7 {
                let mut ys = y.clone();
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        ys += kj * Complex64::new(step * A[s][j], 0.0);
                    }
                }
                k.push(eq.rhs(&ys));
            }
            let mut y5 = y.clone();
            let mut err = CMatrix::zeros(y.nrows(), y.ncols());
            for s in 0..7 {
                if B5[s] != 0.0 {
                    y5 += &k[s] * Complex64::new(step * B5[s], 0.0);
                }
                err += &k[s] * Complex64::new(step * (B5[s] - B4[s]), 0.0);
            }
            let mut acc = 0.0;
            for ((e, a), b) in err.iter().zip(y.iter()).zip(y5.iter()) {
                let scale = tol.atol + tol.rtol * a.norm().max(b.norm());
                acc += (e.norm() / scale).powi(2);
            }
            let enorm = (acc / err.len() as f64).sqrt();
            if enorm <= 1.0 {
                t = if last { target } else { t + step };
                y = y5;
                // FSAL: the last stage is f at the new point.
                first = k.pop().unwrap();
                steps += 1;
            } else {
                rejected += 1;
            }
            let factor = if enorm == 0.0 {
                5.0
            } else {
                (0.9 * enorm.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !(last && enorm <= 1.0) {
                h = step * factor;
            }
        }
        states.push(DensityMatrix {
            elements: y.clone(),
        });
    }
    Ok(OdeSolution {
        times: times.to_vec(),
        states,
        steps,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damping::{evolve_density, MeasurementCoupling};
    use crate::spectrum::Parity;

    fn levels() -> EnergyLevels {
        let x = DMatrix::from_row_slice(3, 3, &[0.0, -0.3, 0.0, -0.3, 0.0, 0.2, 0.0, 0.2, 0.0]);
        EnergyLevels::new(
            vec![0.0, 1e-6, 3e-6],
            vec![Parity::Even, Parity::Odd, Parity::Even],
            x,
        )
        .unwrap()
    }

    fn state() -> DensityMatrix {
        let c = [0.7, 0.5, 0.51].map(|v: f64| Complex64::new(v, 0.1 * v));
        let n = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        DensityMatrix::from_pure(&c.map(|z| z / n))
    }

    #[test]
    fn matches_closed_form() {
        let lv = levels();
        let t10 = lv.tunneling_period();
        let times: Vec<f64> = (1..=20).map(|i| i as f64 * 0.5 * t10).collect();
        for mult in [0.0, 0.3, 3.0] {
            let k = MeasurementCoupling::relative_to_critical(&lv, 1, 0, mult).unwrap();
            let eq = MasterEquation::energy_measurement(&lv, k.kappa_e());
            let sol = integrate(&eq, &state(), &times, Tolerances::default()).unwrap();
            for (t, rho) in times.iter().zip(&sol.states) {
                let exact = evolve_density(&state(), &lv, k, *t).unwrap();
                assert!(
                    rho.max_distance(&exact) < 1e-9,
                    "{mult} {}",
                    rho.max_distance(&exact)
                );
            }
        }
    }

    #[test]
    fn rotated_basis_gives_same_physics() {
        let lv = levels();
        let k = MeasurementCoupling::relative_to_critical(&lv, 1, 0, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = DMatrix::from_row_slice(3, 3, &[s, s, 0.0, s, -s, 0.0, 0.0, 0.0, 1.0])
            .map(|v| Complex64::new(v, 0.0));
        let eq = MasterEquation::energy_measurement(&lv, k.kappa_e()).rotated(&u);
        let rho0 = state();
        let rotated0 = DensityMatrix {
            elements: &u * &rho0.elements * u.adjoint(),
        };
        let t = 2.0 * lv.tunneling_period();
        let sol = integrate(&eq, &rotated0, &[t], Tolerances::default()).unwrap();
        let back = DensityMatrix {
            elements: u.adjoint() * &sol.states[0].elements * &u,
        };
        assert!(back.max_distance(&evolve_density(&rho0, &lv, k, t).unwrap()) < 1e-9);
    }
}
