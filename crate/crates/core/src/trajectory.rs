//! Quantum-jump unravelling of the energy-measurement master equation.
//!
//! Lindblad operator √κ_E·Ĥ' with Ĥ' = Ĥ − E_ref. Between jumps the state
//! follows the non-Hermitian drift Ĥ' − i(ħκ_E/2)Ĥ'², which is diagonal in
//! the energy basis and applied in closed form from the last jump. Each
//! step of length dt carries a jump test with probability
//! 1 − ‖ψ(t + dt)‖²/‖ψ(t)‖² (κ_E⟨Ĥ'²⟩dt to first order); a jump applies Ĥ'
//! and renormalizes. The jump instant inside the step is found by inverting
//! the survival function and the remainder of the step is tested again, so
//! several jumps per step carry no discretization bias. Once a single
//! amplitude is left the state is stationary and jumps are no longer
//! counted.
//!
//! Trajectory `i` draws from ChaCha8 seeded with `seed`, stream `i`.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::damping::MeasurementCoupling;
use crate::error::{Error, Result};
use crate::phase::damped_phasor;
use crate::spectrum::EnergyLevels;
use crate::state::DensityMatrix;
use crate::sum::{ComplexKahanSum, KahanSum};
use crate::units::HBAR;

/// Upper bound on the per-step jump probability.
pub const MAX_STEP_PROBABILITY: f64 = 0.1;
/// Default purity threshold for [`TrajectoryResult::eigenstate_convergence`].
pub const CONVERGENCE_THRESHOLD: f64 = 0.99;

const BLOCK: usize = 64;

/// Reference energy subtracted from the spectrum before building jump rates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum EnergyReference {
    /// Shift by −E₀.
    #[default]
    Ground,
    /// Use the energies as given.
    Absolute,
    Custom(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub n_trajectories: usize,
    pub seed: u64,
    /// Jump-test step in seconds.
    pub dt: f64,
    pub t_max: f64,
    /// Record every this many steps (the final step is always recorded).
    pub record_every: usize,
    pub reference: EnergyReference,
}

impl TrajectoryConfig {
    pub fn new(n_trajectories: usize, seed: u64, dt: f64, t_max: f64) -> Self {
        Self {
            n_trajectories,
            seed,
            dt,
            t_max,
            record_every: 1,
            reference: EnergyReference::Ground,
        }
    }

    pub fn recording_every(mut self, steps: usize) -> Self {
        self.record_every = steps;
        self
    }

    pub fn with_reference(mut self, reference: EnergyReference) -> Self {
        self.reference = reference;
        self
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if self.n_trajectories == 0 {
            return Err(Error::InvalidParameter(
                "n_trajectories must be at least 1".into(),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_max must be nonnegative, got {}",
                self.t_max
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter(
                "record_every must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    /// Standard error of the ensemble mean of ⟨x̂⟩ at each record.
    pub std_err_x: Vec<f64>,
    /// Ensemble mean of |ψ⟩⟨ψ| at each record.
    pub mean_density: Vec<DensityMatrix>,
    /// Normalized coefficient vector of each trajectory at t_max.
    pub final_states: Vec<Vec<Complex64>>,
    pub jump_counts: Vec<u32>,
    /// Largest |‖ψ‖ − 1| seen at any record of any trajectory.
    pub max_norm_error: f64,
}

impl TrajectoryResult {
    pub fn n_trajectories(&self) -> usize {
        self.final_states.len()
    }

    /// max_n |c_n(t_max)|² for each trajectory.
    pub fn max_populations(&self) -> Vec<f64> {
        self.final_states
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max))
            .collect()
    }

    /// Fraction of trajectories with max_n |c_n(t_max)|² > threshold.
    pub fn eigenstate_convergence(&self, threshold: f64) -> f64 {
        let hits = self
            .max_populations()
            .iter()
            .filter(|&&p| p > threshold)
            .count();
        hits as f64 / self.n_trajectories() as f64
    }

    /// Number of converged trajectories ending in each eigenstate.
    pub fn outcome_counts(&self, threshold: f64) -> Vec<usize> {
        let n = self.final_states.first().map_or(0, Vec::len);
        let mut counts = vec![0; n];
        for c in &self.final_states {
            if let Some((k, p)) = c
                .iter()
                .map(|z| z.norm_sqr())
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(&b.1))
            {
                if p > threshold {
                    counts[k] += 1;
                }
            }
        }
        counts
    }

    /// Tab-separated dump: trajectory id, jump count, terminal |c_n|².
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.final_states.first().map_or(0, Vec::len);
        write!(w, "# trajectory\tjumps")?;
        for k in 0..n {
            write!(w, "\tp{k}")?;
        }
        writeln!(w)?;
        for (i, (c, j)) in self.final_states.iter().zip(&self.jump_counts).enumerate() {
            write!(w, "{i}\t{j}")?;
            for z in c {
                write!(w, "\t{:.12e}", z.norm_sqr())?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

struct Block {
    x: Vec<KahanSum>,
    x2: Vec<KahanSum>,
    rho: Vec<Vec<ComplexKahanSum>>,
    finals: Vec<Vec<Complex64>>,
    jumps: Vec<u32>,
    norm_error: f64,
}

struct Propagator<'a> {
    shifted: Vec<f64>,
    rates: Vec<f64>,
    x: &'a DMatrix<f64>,
    dt: f64,
    n_steps: usize,
    record_steps: Vec<usize>,
}

impl Propagator<'_> {
    fn evolve(&self, anchor: &[Complex64], elapsed: f64, out: &mut [Complex64]) -> f64 {
        let mut norm = 0.0;
        for (k, (a, o)) in anchor.iter().zip(out.iter_mut()).enumerate() {
            *o = if *a == Complex64::new(0.0, 0.0) {
                *a
            } else {
                a * damped_phasor(self.shifted[k] / HBAR, 0.5 * self.rates[k], elapsed)
            };
            norm += o.norm_sqr();
        }
        norm
    }

    fn mean_x(&self, psi: &[Complex64]) -> f64 {
        let n = psi.len();
        let mut acc = 0.0;
        for i in 0..n {
            if psi[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            acc += self.x[(i, i)] * psi[i].norm_sqr();
            for j in (i + 1)..n {
                acc += 2.0 * self.x[(i, j)] * (psi[i].conj() * psi[j]).re;
            }
        }
        acc
    }

    fn norm_at(&self, anchor: &[Complex64], elapsed: f64) -> f64 {
        anchor
            .iter()
            .zip(&self.rates)
            .map(|(a, r)| a.norm_sqr() * (-r * elapsed).exp())
            .sum()
    }

    /// Time in (base, base + span] at which the unnormalized norm² from
    /// `anchor` decays to `target`, by bisection.
    fn jump_time(&self, anchor: &[Complex64], base: f64, span: f64, target: f64) -> f64 {
        let (mut lo, mut hi) = (base, base + span);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if self.norm_at(anchor, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    }

    fn run_block(&self, psi0: &[Complex64], seed: u64, ids: std::ops::Range<usize>) -> Block {
        let n = psi0.len();
        let r = self.record_steps.len();
        let mut block = Block {
            x: vec![KahanSum::default(); r],
            x2: vec![KahanSum::default(); r],
            rho: vec![vec![ComplexKahanSum::default(); n * n]; r],
            finals: Vec::with_capacity(ids.len()),
            jumps: Vec::with_capacity(ids.len()),
            norm_error: 0.0,
        };
        let decay: Vec<f64> = self.rates.iter().map(|r| (-r * self.dt).exp()).collect();
        let mut psi = vec![Complex64::new(0.0, 0.0); n];
        // |anchor_k|² e^{−r_k (t − t_anchor)}: the unnormalized populations.
        let mut weights = vec![0.0; n];
        for id in ids {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id as u64);
            // No-jump evolution runs in closed form from the last jump.
            let mut anchor = psi0.to_vec();
            let mut t_anchor = 0.0;
            let mut stationary = is_eigenstate(&anchor);
            let mut jumps = 0u32;
            let mut next_record = 0usize;
            for (w, a) in weights.iter_mut().zip(&anchor) {
                *w = a.norm_sqr();
            }
            for step in 0..=self.n_steps {
                if step > 0 && !stationary {
                    let n_a: f64 = weights.iter().sum();
                    for (w, d) in weights.iter_mut().zip(&decay) {
                        *w *= d;
                    }
                    let n_b: f64 = weights.iter().sum();
                    let mut u: f64 = rng.random();
                    if u < 1.0 - n_b / n_a {
                        let step_end = step as f64 * self.dt;
                        let mut from = (step - 1) as f64 * self.dt - t_anchor;
                        let mut n_from = n_a;
                        loop {
                            // Jump where the survival since `from` equals 1 − u.
                            let span = step_end - t_anchor - from;
                            let s = self.jump_time(&anchor, from, span, (1.0 - u) * n_from);
                            jumps += 1;
                            self.evolve(&anchor, s, &mut psi);
                            for (k, z) in psi.iter_mut().enumerate() {
                                *z *= self.shifted[k];
                            }
                            normalize(&mut psi);
                            anchor.copy_from_slice(&psi);
                            t_anchor += s;
                            stationary = is_eigenstate(&anchor);
                            if stationary {
                                break;
                            }
                            // Test the rest of the step from the new anchor.
                            from = 0.0;
                            n_from = 1.0;
                            let rest = self.norm_at(&anchor, step_end - t_anchor);
                            u = rng.random();
                            if u >= 1.0 - rest {
                                break;
                            }
                        }
                        for ((w, a), r) in weights.iter_mut().zip(&anchor).zip(&self.rates) {
                            *w = a.norm_sqr() * (-r * (step_end - t_anchor)).exp();
                        }
                    }
                }
                if next_record < r && self.record_steps[next_record] == step {
                    self.evolve(&anchor, step as f64 * self.dt - t_anchor, &mut psi);
                    normalize(&mut psi);
                    let err = (psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs();
                    block.norm_error = block.norm_error.max(err);
                    let mx = self.mean_x(&psi);
                    block.x[next_record].add(mx);
                    block.x2[next_record].add(mx * mx);
                    let rho = &mut block.rho[next_record];
                    for i in 0..n {
                        for j in 0..n {
                            rho[i * n + j].add(psi[i] * psi[j].conj());
                        }
                    }
                    next_record += 1;
                }
            }
            self.evolve(&anchor, self.n_steps as f64 * self.dt - t_anchor, &mut psi);
            normalize(&mut psi);
            block.finals.push(psi.clone());
            block.jumps.push(jumps);
        }
        block
    }
}

/// Only one nonzero amplitude: jumps and drift leave the ray unchanged.
fn is_eigenstate(psi: &[Complex64]) -> bool {
    psi.iter().filter(|z| z.norm_sqr() > 0.0).count() <= 1
}

fn normalize(psi: &mut [Complex64]) -> f64 {
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in psi.iter_mut() {
        *z /= norm;
    }
    norm
}

/// Runs `config.n_trajectories` independent jump trajectories from ψ₀
/// (energy-basis coefficients).
pub fn run_trajectories(
    psi0: &[Complex64],
    levels: &EnergyLevels,
    kappa: MeasurementCoupling,
    config: &TrajectoryConfig,
) -> Result<TrajectoryResult> {
    config.validate()?;
    if psi0.len() != levels.n_levels() {
        return Err(Error::InvalidParameter(format!(
            "state has {} coefficients but the basis has {} levels",
            psi0.len(),
            levels.n_levels()
        )));
    }
    let norm: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "initial state norm² is {norm}, expected 1"
        )));
    }
    let reference = match config.reference {
        EnergyReference::Ground => levels.energy(0),
        EnergyReference::Absolute => 0.0,
        EnergyReference::Custom(e) => e,
    };
    let shifted: Vec<f64> = levels.energies().iter().map(|e| e - reference).collect();
    let rates: Vec<f64> = shifted.iter().map(|e| kappa.kappa_e() * e * e).collect();
    let worst = psi0
        .iter()
        .zip(&rates)
        .filter(|(c, _)| c.norm_sqr() > 0.0)
        .map(|(_, r)| r * config.dt)
        .fold(0.0, f64::max);
    let probability = -(-worst).exp_m1();
    if probability >= MAX_STEP_PROBABILITY {
        return Err(Error::StepTooLarge { probability });
    }

    let n_steps = config.n_steps();
    let mut record_steps: Vec<usize> = (0..=n_steps).step_by(config.record_every).collect();
    if *record_steps.last().unwrap() != n_steps {
        record_steps.push(n_steps);
    }
    let prop = Propagator {
        shifted,
        rates,
        x: levels.x_matrix(),
        dt: config.dt,
        n_steps,
        record_steps,
    };

    let n_traj = config.n_trajectories;
    let blocks: Vec<Block> = (0..n_traj.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| prop.run_block(psi0, config.seed, b * BLOCK..((b + 1) * BLOCK).min(n_traj)))
        .collect();

    let n = psi0.len();
    let r = prop.record_steps.len();
    let mut x = vec![KahanSum::default(); r];
    let mut x2 = vec![KahanSum::default(); r];
    let mut rho = vec![vec![ComplexKahanSum::default(); n * n]; r];
    let mut final_states = Vec::with_capacity(n_traj);
    let mut jump_counts = Vec::with_capacity(n_traj);
    let mut max_norm_error: f64 = 0.0;
    for block in blocks {
        for k in 0..r {
            x[k].merge(&block.x[k]);
            x2[k].merge(&block.x2[k]);
            for (acc, v) in rho[k].iter_mut().zip(&block.rho[k]) {
                acc.merge(v);
            }
        }
        final_states.extend(block.finals);
        jump_counts.extend(block.jumps);
        max_norm_error = max_norm_error.max(block.norm_error);
    }

    let nf = n_traj as f64;
    let mean_x: Vec<f64> = x.iter().map(|s| s.value() / nf).collect();
    let std_err_x = x2
        .iter()
        .zip(&mean_x)
        .map(|(s2, m)| {
            if n_traj < 2 {
                return 0.0;
            }
            let var = (s2.value() / nf - m * m).max(0.0) * nf / (nf - 1.0);
            (var / nf).sqrt()
        })
        .collect();
    let mean_density = rho
        .iter()
        .map(|acc| DensityMatrix {
            elements: DMatrix::from_fn(n, n, |i, j| acc[i * n + j].value() / nf),
        })
        .collect();
    Ok(TrajectoryResult {
        times: prop
            .record_steps
            .iter()
            .map(|&s| s as f64 * config.dt)
            .collect(),
        mean_x,
        std_err_x,
        mean_density,
        final_states,
        jump_counts,
        max_norm_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damping::{evolve_density, flux_trace};
    use crate::spectrum::Parity;
    use crate::state::{lr_coefficients, Localization};

    fn model() -> EnergyLevels {
        let e = vec![-0.044_059_7, -0.044_059_1, -0.043_5, -0.043_2];
        let mut x = DMatrix::zeros(4, 4);
        for (i, j, v) in [(0, 1, -0.335), (0, 3, 0.04), (1, 2, 0.038), (2, 3, -0.33)] {
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
        EnergyLevels::new(
            e,
            vec![Parity::Even, Parity::Odd, Parity::Even, Parity::Odd],
            x,
        )
        .unwrap()
    }

    fn basis(k: usize) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(0.0, 0.0); 4];
        c[k] = Complex64::new(1.0, 0.0);
        c
    }

    #[test]
    fn closed_system_is_deterministic_phase_evolution() {
        let levels = model();
        let t10 = levels.tunneling_period();
        let c = [0.6, 0.5, 0.5, 0.374_165_738_677_394_1]
            .map(|v| Complex64::new(v, 0.0))
            .to_vec();
        let cfg = TrajectoryConfig::new(8, 1, t10 / 400.0, 3.0 * t10).recording_every(7);
        let res = run_trajectories(&c, &levels, MeasurementCoupling::CLOSED, &cfg).unwrap();
        let exact = flux_trace(
            &DensityMatrix::from_pure(&c),
            &levels,
            MeasurementCoupling::CLOSED,
            &res.times,
        )
        .unwrap();
        for (a, b) in res.mean_x.iter().zip(&exact.mean_x) {
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
        assert!(res.jump_counts.iter().all(|&j| j == 0));
        assert_eq!(res.eigenstate_convergence(CONVERGENCE_THRESHOLD), 0.0);
    }

    #[test]
    fn eigenstates_are_fixed_points() {
        let levels = model();
        let t10 = levels.tunneling_period();
        let cfg = TrajectoryConfig::new(20, 3, t10 / 1000.0, t10);
        for (level, mult) in [(0, 5.0), (1, 5.0), (2, 1e-4)] {
            let k = MeasurementCoupling::relative_to_critical(&levels, 1, 0, mult).unwrap();
            let res = run_trajectories(&basis(level), &levels, k, &cfg).unwrap();
            assert!(res.mean_x.iter().all(|x| x.abs() < 1e-15));
            assert_eq!(res.eigenstate_convergence(CONVERGENCE_THRESHOLD), 1.0);
            assert_eq!(res.outcome_counts(CONVERGENCE_THRESHOLD)[level], 20);
        }
    }

    #[test]
    fn seed_determinism_and_independence() {
        let levels = model();
        let t10 = levels.tunneling_period();
        let k = MeasurementCoupling::relative_to_critical(&levels, 1, 0, 1.0).unwrap();
        let psi = lr_coefficients(Localization::Left, 4).unwrap();
        let cfg = TrajectoryConfig::new(300, 42, t10 / 200.0, 4.0 * t10).recording_every(10);
        let a = run_trajectories(&psi, &levels, k, &cfg).unwrap();
        let b = run_trajectories(&psi, &levels, k, &cfg).unwrap();
        assert_eq!(a, b);
        let c = run_trajectories(&psi, &levels, k, &TrajectoryConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.jump_counts, c.jump_counts);
        assert!(a.max_norm_error < 1e-9);
    }

    #[test]
    fn step_bound_is_enforced() {
        let levels = model();
        let t10 = levels.tunneling_period();
        let k = MeasurementCoupling::relative_to_critical(&levels, 1, 0, 1.0).unwrap();
        let psi = lr_coefficients(Localization::Left, 4).unwrap();
        let cfg = TrajectoryConfig::new(1, 0, t10 / 5.0, t10);
        assert!(matches!(
            run_trajectories(&psi, &levels, k, &cfg),
            Err(Error::StepTooLarge { .. })
        ));
        let bad = TrajectoryConfig::new(0, 0, t10 / 500.0, t10);
        assert!(run_trajectories(&psi, &levels, k, &bad).is_err());
        let unnormalized = vec![Complex64::new(1.0, 0.0); 4];
        let cfg = TrajectoryConfig::new(1, 0, t10 / 500.0, t10);
        assert!(run_trajectories(&unnormalized, &levels, k, &cfg).is_err());
    }

    #[test]
    fn ensemble_tracks_closed_form() {
        let levels = model();
        let t10 = levels.tunneling_period();
        let k = MeasurementCoupling::relative_to_critical(&levels, 1, 0, 1.0).unwrap();
        let psi = lr_coefficients(Localization::Left, 4).unwrap();
        let cfg = TrajectoryConfig::new(2000, 7, t10 / 200.0, 3.0 * t10).recording_every(20);
        let res = run_trajectories(&psi, &levels, k, &cfg).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi);
        let exact = flux_trace(&rho0, &levels, k, &res.times).unwrap();
        for ((m, se), x) in res.mean_x.iter().zip(&res.std_err_x).zip(&exact.mean_x) {
            assert!((m - x).abs() <= 4.0 * se + 1e-12, "{m} {x} {se}");
        }
        let last = res.mean_density.last().unwrap();
        let exact_rho = evolve_density(&rho0, &levels, k, *res.times.last().unwrap()).unwrap();
        assert!(last.max_distance(&exact_rho) < 0.05);
        let mut buf = Vec::new();
        res.write_dump(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2001);
    }
}
