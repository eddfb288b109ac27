//! Exact nonselective evolution under continuous energy measurement.
//!
//! With the measured observable equal to the Hamiltonian, the master
//! equation is diagonal in the energy eigenbasis:
//!
//! ```text
//! ρ_nm(t) = ρ_nm(0) exp{−(i/ħ)(E_n − E_m)t − (κ_E/2)(E_n − E_m)² t}
//! ```
//!
//! so populations are frozen and every coherence decays with its own time
//! constant τ_nm = 2/[κ_E(E_n − E_m)²].

use std::fmt::Write as _;
use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase::damped_phasor;
use crate::spectrum::EnergyLevels;
use crate::state::DensityMatrix;
use crate::units::{HBAR, PLANCK_H};

/// Pairs closer than this (eV) are treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-15;

/// Measurement strength κ_E in 1/(eV²·s).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MeasurementCoupling(f64);

impl MeasurementCoupling {
    pub const CLOSED: MeasurementCoupling = MeasurementCoupling(0.0);

    pub fn new(kappa_e: f64) -> Result<Self> {
        if kappa_e.is_finite() && kappa_e >= 0.0 {
            Ok(Self(kappa_e))
        } else {
            Err(Error::InvalidParameter(format!(
                "kappa_E must be nonnegative, got {kappa_e}"
            )))
        }
    }

    /// κ_E = `multiple` × κ_crit for the pair (n, m).
    pub fn relative_to_critical(
        levels: &EnergyLevels,
        n: usize,
        m: usize,
        multiple: f64,
    ) -> Result<Self> {
        Self::new(multiple * critical_coupling(levels.gap(n, m)))
    }

    pub fn kappa_e(&self) -> f64 {
        self.0
    }

    /// Coherence decay rate (κ/2)ΔE² in 1/s.
    pub fn decay_rate(&self, gap: f64) -> f64 {
        0.5 * self.0 * gap * gap
    }
}

/// κ_crit = 1/(h|ΔE|).
pub fn critical_coupling(gap: f64) -> f64 {
    1.0 / (PLANCK_H * gap.abs())
}

/// Survival rule: after a time τ only Bohr oscillations with
/// |ΔE| < √(2/(κ_E τ)) are still visible.
pub fn survives(gap: f64, kappa: MeasurementCoupling, elapsed: f64) -> bool {
    if kappa.kappa_e() == 0.0 || elapsed == 0.0 {
        return true;
    }
    gap.abs() < (2.0 / (kappa.kappa_e() * elapsed)).sqrt()
}

fn coherence_factor(
    levels: &EnergyLevels,
    kappa: MeasurementCoupling,
    n: usize,
    m: usize,
    t: f64,
) -> Complex64 {
    let gap = levels.gap(n, m);
    damped_phasor(gap / HBAR, kappa.decay_rate(gap), t)
}

fn check_dims(rho: &DensityMatrix, levels: &EnergyLevels) -> Result<()> {
    if rho.dim() != levels.n_levels() {
        return Err(Error::InvalidParameter(format!(
            "density matrix is {0}x{0} but the basis has {1} levels",
            rho.dim(),
            levels.n_levels()
        )));
    }
    Ok(())
}

/// ρ(t) from ρ(0). Diagonal elements are copied untouched.
pub fn evolve_density(
    rho0: &DensityMatrix,
    levels: &EnergyLevels,
    kappa: MeasurementCoupling,
    t: f64,
) -> Result<DensityMatrix> {
    check_dims(rho0, levels)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    let n = rho0.dim();
    let mut out = rho0.elements.clone();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[(i, j)] = rho0.elements[(i, j)] * coherence_factor(levels, kappa, i, j, t);
            }
        }
    }
    Ok(DensityMatrix { elements: out })
}

/// Describes the state a trace was started from.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMetadata {
    pub kappa_e: f64,
    /// κ_E/κ_crit_10.
    pub kappa_over_crit10: f64,
    /// κ_E/κ_crit_32 when the basis has four or more levels.
    pub kappa_over_crit32: Option<f64>,
    pub basis_size: usize,
    pub initial_state: String,
    pub captured_norm: Option<f64>,
    /// T₁₀ = h/(E₁ − E₀) in seconds.
    pub tunneling_period: f64,
}

/// Time series of ⟨x̂(t)⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxTrace {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub metadata: TraceMetadata,
}

impl FluxTrace {
    pub fn times_in_periods(&self) -> Vec<f64> {
        self.times
            .iter()
            .map(|t| t / self.metadata.tunneling_period)
            .collect()
    }

    /// ⟨Φ(t)⟩ = Φ₀⟨x̂(t)⟩ + Φ^ext in webers.
    pub fn physical_flux(&self, flux_quantum: f64, external_flux: f64) -> Vec<f64> {
        self.mean_x
            .iter()
            .map(|x| flux_quantum * x + external_flux)
            .collect()
    }

    pub fn with_initial_state(
        mut self,
        label: impl Into<String>,
        captured_norm: Option<f64>,
    ) -> Self {
        self.metadata.initial_state = label.into();
        self.metadata.captured_norm = captured_norm;
        self
    }

    /// Writes the '#'-commented, tab-separated trace format.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let m = &self.metadata;
        writeln!(w, "# kappa_E = {:.12e} 1/(eV^2 s)", m.kappa_e)?;
        writeln!(w, "# kappa_E/kappa_crit_10 = {:.12e}", m.kappa_over_crit10)?;
        if let Some(r) = m.kappa_over_crit32 {
            writeln!(w, "# kappa_E/kappa_crit_32 = {r:.12e}")?;
        }
        writeln!(w, "# basis_size = {}", m.basis_size)?;
        writeln!(w, "# initial_state = {}", m.initial_state)?;
        if let Some(c) = m.captured_norm {
            writeln!(w, "# captured_norm = {c:.12e}")?;
        }
        writeln!(w, "# T10 = {:.12e} s", m.tunneling_period)?;
        writeln!(w, "# time_s\ttime_T10\tmean_x")?;
        let mut line = String::new();
        for (t, x) in self.times.iter().zip(&self.mean_x) {
            line.clear();
            let _ = write!(
                line,
                "{:.12e}\t{:.12e}\t{:.15e}",
                t,
                t / m.tunneling_period,
                x
            );
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Parses the format written by [`FluxTrace::write_tsv`].
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(format!("trace file: {msg}"));
        let mut meta = TraceMetadata {
            kappa_e: f64::NAN,
            kappa_over_crit10: f64::NAN,
            kappa_over_crit32: None,
            basis_size: 0,
            initial_state: String::new(),
            captured_norm: None,
            tunneling_period: f64::NAN,
        };
        let (mut times, mut mean_x) = (Vec::new(), Vec::new());
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if let Some(header) = line.strip_prefix('#') {
                let Some((key, value)) = header.split_once('=') else {
                    continue;
                };
                let value = value.trim();
                let number = || {
                    value
                        .split_whitespace()
                        .next()
                        .unwrap_or("")
                        .parse::<f64>()
                        .map_err(|e| bad(format!("{key}: {e}")))
                };
                match key.trim() {
                    "kappa_E" => meta.kappa_e = number()?,
                    "kappa_E/kappa_crit_10" => meta.kappa_over_crit10 = number()?,
                    "kappa_E/kappa_crit_32" => meta.kappa_over_crit32 = Some(number()?),
                    "basis_size" => meta.basis_size = number()? as usize,
                    "initial_state" => meta.initial_state = value.to_string(),
                    "captured_norm" => meta.captured_norm = Some(number()?),
                    "T10" => meta.tunneling_period = number()?,
                    _ => {}
                }
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad(format!("expected 3 columns, got {}", cols.len())));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(e.to_string()));
            times.push(parse(cols[0])?);
            mean_x.push(parse(cols[2])?);
        }
        Ok(Self {
            times,
            mean_x,
            metadata: meta,
        })
    }
}

fn metadata(levels: &EnergyLevels, kappa: MeasurementCoupling) -> TraceMetadata {
    let k10 = critical_coupling(levels.gap(1, 0));
    TraceMetadata {
        kappa_e: kappa.kappa_e(),
        kappa_over_crit10: kappa.kappa_e() / k10,
        kappa_over_crit32: (levels.n_levels() >= 4)
            .then(|| kappa.kappa_e() / critical_coupling(levels.gap(3, 2))),
        basis_size: levels.n_levels(),
        initial_state: String::from("unspecified"),
        captured_norm: None,
        tunneling_period: levels.tunneling_period(),
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidParameter(
            "times must be finite and nonnegative".into(),
        ));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "times must be sorted ascending".into(),
        ));
    }
    Ok(())
}

/// Evaluates ⟨x̂(t)⟩ = Σ_nm ρ_nm(t)⟨m|x̂|n⟩ at arbitrary times.
#[derive(Debug, Clone)]
pub struct FluxEvaluator {
    diagonal: f64,
    /// (ω_nm, decay rate, 2ρ_nm(0)x_mn) for n < m.
    terms: Vec<(f64, f64, Complex64)>,
}

impl FluxEvaluator {
    /// Requires ρ(0) Hermitian to 1e-12.
    pub fn new(
        rho0: &DensityMatrix,
        levels: &EnergyLevels,
        kappa: MeasurementCoupling,
    ) -> Result<Self> {
        check_dims(rho0, levels)?;
        let herm = rho0.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "rho(0) is not Hermitian (error {herm:e})"
            )));
        }
        let n = levels.n_levels();
        let x = levels.x_matrix();
        let diagonal = (0..n).map(|i| rho0.elements[(i, i)].re * x[(i, i)]).sum();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = rho0.elements[(i, j)] * x[(j, i)] * 2.0;
                if w != Complex64::new(0.0, 0.0) {
                    let gap = levels.gap(i, j);
                    terms.push((gap / HBAR, kappa.decay_rate(gap), w));
                }
            }
        }
        Ok(Self { diagonal, terms })
    }

    pub fn at(&self, t: f64) -> f64 {
        self.diagonal
            + self
                .terms
                .iter()
                .map(|&(omega, gamma, w)| (w * damped_phasor(omega, gamma, t)).re)
                .sum::<f64>()
    }

    /// Bohr frequencies (rad/s, positive) and initial amplitudes 2|ρ_nm x_mn|
    /// of the oscillating terms.
    pub fn components(&self) -> Vec<(f64, f64)> {
        self.terms
            .iter()
            .map(|&(w, _, a)| (w.abs(), a.norm()))
            .collect()
    }

    pub fn asymptote(&self) -> f64 {
        self.diagonal
    }
}

/// ⟨x̂(t)⟩ at each requested time.
pub fn flux_trace(
    rho0: &DensityMatrix,
    levels: &EnergyLevels,
    kappa: MeasurementCoupling,
    times: &[f64],
) -> Result<FluxTrace> {
    check_times(times)?;
    let eval = FluxEvaluator::new(rho0, levels, kappa)?;
    let mean_x = times.par_iter().map(|&t| eval.at(t)).collect();
    Ok(FluxTrace {
        times: times.to_vec(),
        mean_x,
        metadata: metadata(levels, kappa),
    })
}

/// Closed-form ⟨x̂(t)⟩ for ρ(0) = |L⟩⟨L|:
/// ½(x₀₀ + x₁₁) + Re{x₀₁ e^{−iωt}} e^{−κ(ħω)²t/2}.
pub fn two_level_flux(
    levels: &EnergyLevels,
    kappa: MeasurementCoupling,
    times: &[f64],
) -> Result<FluxTrace> {
    if levels.n_levels() < 2 {
        return Err(Error::InvalidParameter(
            "two-level dynamics needs two levels".into(),
        ));
    }
    check_times(times)?;
    let x = levels.x_matrix();
    let gap = levels.gap(1, 0);
    let offset = 0.5 * (x[(0, 0)] + x[(1, 1)]);
    let mean_x = times
        .iter()
        .map(|&t| offset + (x[(0, 1)] * damped_phasor(gap / HBAR, kappa.decay_rate(gap), t)).re)
        .collect();
    Ok(FluxTrace {
        times: times.to_vec(),
        mean_x,
        metadata: TraceMetadata {
            initial_state: "left".into(),
            captured_norm: Some(1.0),
            ..metadata(levels, kappa)
        },
    })
}

/// ρ(t) for ρ(0) = |L⟩⟨L| in the {|L⟩, |R⟩} basis (unit trace).
pub fn two_level_density(
    levels: &EnergyLevels,
    kappa: MeasurementCoupling,
    t: f64,
) -> Result<DensityMatrix> {
    if levels.n_levels() < 2 {
        return Err(Error::InvalidParameter(
            "two-level dynamics needs two levels".into(),
        ));
    }
    let gap = levels.gap(1, 0);
    let z = damped_phasor(gap / HBAR, kappa.decay_rate(gap), t);
    // z = D(cos ωt − i sin ωt) with D the decoherence envelope.
    let (dc, ds) = (z.re, -z.im);
    let i = Complex64::new(0.0, 1.0);
    let elements = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5 * (1.0 + dc), 0.0),
            -i * 0.5 * ds,
            i * 0.5 * ds,
            Complex64::new(0.5 * (1.0 - dc), 0.0),
        ],
    );
    Ok(DensityMatrix { elements })
}

/// Rewrites the ground-doublet block of an energy-basis ρ in the
/// {|L⟩, |R⟩} basis, |L⟩ = (|0⟩ + |1⟩)/√2, |R⟩ = (|0⟩ − |1⟩)/√2.
pub fn to_lr_basis(rho: &DensityMatrix) -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let u = DMatrix::from_row_slice(2, 2, &[s, s, s, -s]).map(|v| Complex64::new(v, 0.0));
    let block = rho.elements.view((0, 0), (2, 2)).into_owned();
    DensityMatrix {
        elements: &u * block * u.adjoint(),
    }
}

/// Σ_n ρ_nn(0)⟨n|x̂|n⟩, the κ_E > 0 long-time limit of ⟨x̂⟩.
pub fn asymptotic_mean_x(rho0: &DensityMatrix, levels: &EnergyLevels) -> f64 {
    let x = levels.x_matrix();
    (0..rho0.dim().min(levels.n_levels()))
        .map(|i| rho0.elements[(i, i)].re * x[(i, i)])
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEntry {
    pub n: usize,
    pub m: usize,
    /// ω_nm in rad/s.
    pub omega: f64,
    /// T_nm = 2π/ω_nm in seconds.
    pub period: f64,
    /// τ_nm in seconds; infinite for κ_E = 0.
    pub tau: f64,
    /// κ_crit_nm in 1/(eV²·s).
    pub kappa_crit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayTable {
    pub kappa_e: f64,
    pub entries: Vec<DecayEntry>,
}

impl DecayTable {
    pub fn get(&self, n: usize, m: usize) -> Option<&DecayEntry> {
        let (n, m) = if n > m { (n, m) } else { (m, n) };
        self.entries.iter().find(|e| e.n == n && e.m == m)
    }

    /// Largest τ over the pairs with a nonzero coherence in `rho`.
    pub fn max_populated_tau(&self, rho: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .filter(|e| rho.elements[(e.n, e.m)].norm() > 0.0)
            .map(|e| e.tau)
            .fold(0.0, f64::max)
    }
}

/// ω, T, τ and κ_crit for every pair n > m.
pub fn decay_table(levels: &EnergyLevels, kappa: MeasurementCoupling) -> Result<DecayTable> {
    let n_levels = levels.n_levels();
    let mut entries = Vec::with_capacity(n_levels * (n_levels - 1) / 2);
    for n in 1..n_levels {
        for m in 0..n {
            let gap = levels.gap(n, m);
            if gap.abs() < DEGENERACY_THRESHOLD {
                return Err(Error::DegeneratePair {
                    n,
                    m,
                    gap: gap.abs(),
                });
            }
            let omega = gap / HBAR;
            let rate = kappa.decay_rate(gap);
            entries.push(DecayEntry {
                n,
                m,
                omega,
                period: 2.0 * std::f64::consts::PI / omega,
                tau: if rate > 0.0 {
                    1.0 / rate
                } else {
                    f64::INFINITY
                },
                kappa_crit: critical_coupling(gap),
            });
        }
    }
    Ok(DecayTable {
        kappa_e: kappa.kappa_e(),
        entries,
    })
}
