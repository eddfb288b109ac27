//! Cross-checks the closed form against the master-equation integrator and
//! the quantum-jump ensemble.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Result};
use fluxdamp_core::ode::{integrate, MasterEquation, Tolerances};
use fluxdamp_core::trajectory::CONVERGENCE_THRESHOLD;
use fluxdamp_core::{
    evolve_density, run_trajectories, FluxEvaluator, MeasurementCoupling, TrajectoryConfig,
};

use crate::config::ExperimentConfig;
use crate::experiment;
use crate::output::{write_file, Reporter};

const ODE_TOLERANCE: f64 = 1e-9;
const NORM_TOLERANCE: f64 = 1e-9;
const INVARIANT_TOLERANCE: f64 = 1e-12;
/// Below this ensemble size the 3σ band is reported as widened.
const FULL_ENSEMBLE: usize = 10_000;
const ODE_SAMPLES: usize = 50;

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
    pass: bool,
}

pub fn run(cfg: &ExperimentConfig, out: &Path, report: &Reporter) -> Result<()> {
    let tb = cfg.trajectories.clone().unwrap_or_default();
    let exp = experiment::build(cfg)?;
    let lv = exp.levels();
    let t10 = lv.tunneling_period();
    let (rho0, _, psi0) = experiment::initial_density(&exp, &tb.initial_state)?;
    let kappa = MeasurementCoupling::relative_to_critical(lv, 1, 0, tb.kappa_crit_10_multiple)?;
    let mut checks = Vec::new();

    // ρ(0) invariants and conservation of populations
    let t_end = tb.t_max_t10 * t10;
    let rho_end = evolve_density(&rho0, lv, kappa, t_end)?;
    let herm = rho0.hermiticity_error().max(rho_end.hermiticity_error());
    let trace = (rho0.trace().re - 1.0)
        .abs()
        .max((rho_end.trace().re - 1.0).abs());
    let pops = rho0
        .populations()
        .iter()
        .zip(rho_end.populations())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let min_eig = rho_end
        .eigenvalues()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    for (name, value) in [
        ("hermiticity", herm),
        ("trace", trace),
        ("population_drift", pops),
        ("negative_eigenvalue", (-min_eig).max(0.0)),
    ] {
        checks.push(Check {
            name,
            value,
            limit: INVARIANT_TOLERANCE,
            pass: value <= INVARIANT_TOLERANCE,
        });
    }

    // master equation vs closed form
    let span = tb.ode_span_t10 * t10;
    let ode_times: Vec<f64> = (0..=ODE_SAMPLES)
        .map(|i| span * i as f64 / ODE_SAMPLES as f64)
        .collect();
    let eq = MasterEquation::energy_measurement(lv, kappa.kappa_e());
    let sol = integrate(&eq, &rho0, &ode_times, Tolerances::default())?;
    let mut ode_err = 0.0_f64;
    for (t, rho) in sol.times.iter().zip(&sol.states) {
        ode_err = ode_err.max(rho.max_distance(&evolve_density(&rho0, lv, kappa, *t)?));
    }
    checks.push(Check {
        name: "ode_vs_closed_form",
        value: ode_err,
        limit: ODE_TOLERANCE,
        pass: ode_err <= ODE_TOLERANCE,
    });

    // quantum-jump ensemble
    let mc_cfg = TrajectoryConfig::new(tb.n_trajectories, tb.seed, tb.dt_t10 * t10, t_end)
        .recording_every(tb.record_every);
    let mc = run_trajectories(&psi0, lv, kappa, &mc_cfg)?;
    let eval = FluxEvaluator::new(&rho0, lv, kappa)?;
    let mut trace_out = String::new();
    let _ = writeln!(trace_out, "# n_trajectories = {}", mc.n_trajectories());
    let _ = writeln!(trace_out, "# seed = {}", tb.seed);
    let _ = writeln!(trace_out, "# kappa_E = {:.12e}", kappa.kappa_e());
    let _ = writeln!(
        trace_out,
        "# time_s\ttime_T10\tmean_x_mc\tstd_err\tmean_x_exact"
    );
    let mut misses = 0usize;
    let mut worst = 0.0_f64;
    for ((t, x), se) in mc.times.iter().zip(&mc.mean_x).zip(&mc.std_err_x) {
        let exact = eval.at(*t);
        let dev = (x - exact).abs();
        if dev > 3.0 * se + 1e-12 {
            misses += 1;
        }
        if *se > 0.0 {
            worst = worst.max(dev / se);
        }
        let _ = writeln!(
            trace_out,
            "{t:.12e}\t{:.12e}\t{x:.15e}\t{se:.6e}\t{exact:.15e}",
            t / t10
        );
    }
    let allowed = (mc.times.len() as f64 * 0.01).ceil();
    checks.push(Check {
        name: "mc_points_outside_3se",
        value: misses as f64,
        limit: allowed,
        pass: misses as f64 <= allowed,
    });
    checks.push(Check {
        name: "mc_norm_error",
        value: mc.max_norm_error,
        limit: NORM_TOLERANCE,
        pass: mc.max_norm_error < NORM_TOLERANCE,
    });

    // terminal outcomes follow the Born weights of ρ(0)
    let converged = mc.eigenstate_convergence(CONVERGENCE_THRESHOLD);
    checks.push(Check {
        name: "eigenstate_convergence",
        value: converged,
        limit: 0.99,
        pass: converged >= 0.99,
    });
    let counts = mc.outcome_counts(CONVERGENCE_THRESHOLD);
    let total: usize = counts.iter().sum();
    let mut worst_z = 0.0_f64;
    for (k, p) in rho0.populations().iter().enumerate() {
        let expected = total as f64 * p;
        let sd = (total as f64 * p * (1.0 - p)).sqrt();
        let z = if sd > 0.0 {
            (counts[k] as f64 - expected).abs() / sd
        } else if counts[k] as f64 == expected.round() {
            0.0
        } else {
            f64::INFINITY
        };
        worst_z = worst_z.max(z);
    }
    checks.push(Check {
        name: "outcome_binomial_z",
        value: worst_z,
        limit: 3.0,
        pass: worst_z <= 3.0,
    });

    let mut table = String::new();
    let _ = writeln!(table, "# initial_state = {}", tb.initial_state.label());
    let _ = writeln!(
        table,
        "# kappa_E/kappa_crit_10 = {:.12e}",
        tb.kappa_crit_10_multiple
    );
    let _ = writeln!(table, "# outcome_counts = {counts:?}");
    let _ = writeln!(table, "# mc_worst_deviation_in_se = {worst:.4}");
    let _ = writeln!(
        table,
        "# ode_steps = {} rejected = {}",
        sol.steps, sol.rejected
    );
    let _ = writeln!(table, "# check\tvalue\tlimit\tpass");
    for c in &checks {
        let _ = writeln!(
            table,
            "{}\t{:.6e}\t{:.6e}\t{}",
            c.name, c.value, c.limit, c.pass
        );
    }
    write_file(&out.join("validation.tsv"), table.as_bytes())?;
    write_file(&out.join("mc_trace.tsv"), trace_out.as_bytes())?;
    if tb.dump {
        let mut buf = Vec::new();
        mc.write_dump(&mut buf)?;
        write_file(&out.join("trajectories.tsv"), &buf)?;
    }

    for c in &checks {
        report.say(&format!(
            "[{}] {}: {:.3e} (limit {:.3e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        ));
    }
    if tb.n_trajectories < FULL_ENSEMBLE {
        report.say(&format!(
            "note: {} trajectories; the 3 SE band is {:.1}x wider than at {FULL_ENSEMBLE}",
            tb.n_trajectories,
            (FULL_ENSEMBLE as f64 / tb.n_trajectories as f64).sqrt()
        ));
    }
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    if !failed.is_empty() {
        bail!("validation failed: {}", failed.join(", "));
    }
    Ok(())
}
