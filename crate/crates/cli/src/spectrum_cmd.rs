use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use fluxdamp_core::io::{write_eigenfunction_table, write_energy_table};
use fluxdamp_core::model::{thermal_ratio, well_geometry, wkb_frequency};
use fluxdamp_core::spectrum::convergence_study;
use fluxdamp_core::units::HBAR;

use crate::config::ExperimentConfig;
use crate::experiment::{self, Potential};
use crate::output::{write_file, Reporter};
use crate::plot;

pub fn run(cfg: &ExperimentConfig, out: &Path, report: &Reporter) -> Result<()> {
    let exp = experiment::build(cfg)?;
    let lv = exp.levels();
    let mut summary = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(summary, "{k}\t{v}");
    };
    kv("capacitance_F", format!("{:.9e}", exp.capacitance));
    if let Some(it) = exp.calibration_iterations {
        kv("calibration_iterations", it.to_string());
    }
    kv(
        "grid",
        format!(
            "[{}, {}] x {}",
            exp.grid.x_min, exp.grid.x_max, exp.grid.n_points
        ),
    );
    kv("levels", lv.n_levels().to_string());
    for (n, e) in lv.energies().iter().enumerate() {
        kv(&format!("E{n}_eV"), format!("{e:.10e}"));
    }
    kv("E1_minus_E0_eV", format!("{:.6e}", lv.gap(1, 0)));
    kv("T10_s", format!("{:.6e}", lv.tunneling_period()));
    if lv.n_levels() >= 4 {
        kv(
            "E3_minus_E2_over_E1_minus_E0",
            format!("{:.6}", lv.gap(3, 2) / lv.gap(1, 0)),
        );
    }
    match exp.potential {
        Potential::Quartic(q) => {
            let g = well_geometry(&q, exp.capacitance)?;
            let wkb = wkb_frequency(&g);
            kv("barrier_height_eV", format!("{:.6e}", g.barrier_height));
            kv(
                "minima_x",
                format!("{:.6} {:.6}", g.minima_x.0, g.minima_x.1),
            );
            kv("hbar_omega0_eV", format!("{:.6e}", g.zero_point_energy));
            kv("wkb_omega_rad_s", format!("{:.6e}", wkb.omega));
            kv("exact_omega_rad_s", format!("{:.6e}", lv.gap(1, 0) / HBAR));
            kv(
                "wkb_over_exact",
                format!("{:.4e}", wkb.energy / lv.gap(1, 0)),
            );
            kv(
                &format!("thermal_ratio_at_{}K", cfg.spectrum.temperature),
                format!("{:.4e}", thermal_ratio(&g, cfg.spectrum.temperature)?),
            );
        }
        Potential::Harmonic { stiffness } => {
            let hw = (2.0 * exp.kinetic() * stiffness).sqrt();
            let worst = lv
                .energies()
                .iter()
                .enumerate()
                .map(|(n, e)| ((e - hw * (n as f64 + 0.5)) / (hw * (n as f64 + 0.5))).abs())
                .fold(0.0, f64::max);
            kv("hbar_omega0_eV", format!("{hw:.6e}"));
            kv("max_rel_error_vs_ladder", format!("{worst:.3e}"));
        }
    }
    if cfg.spectrum.convergence_check {
        let study = convergence_study(
            &exp.grid,
            exp.kinetic(),
            |x| exp.potential.relative(x),
            lv.n_levels(),
        )?;
        kv(
            "splitting_drift_10",
            format!("{:.3e}", study.ground_splitting_drift[1]),
        );
        if let Some(d) = study.excited_splitting_drift {
            kv("splitting_drift_32", format!("{:.3e}", d[1]));
        }
        study.require_converged()?;
    }

    let mut energies = Vec::new();
    write_energy_table(lv, &mut energies)?;
    let mut eig = Vec::new();
    write_eigenfunction_table(
        &exp.basis,
        |x| exp.potential.relative(x),
        cfg.spectrum.eigenfunctions,
        &mut eig,
    )?;
    write_file(&out.join("energies.tsv"), &energies)?;
    write_file(&out.join("eigenfunctions.tsv"), &eig)?;
    write_file(&out.join("spectrum_summary.tsv"), summary.as_bytes())?;
    write_file(
        &out.join("plot_spectrum.py"),
        plot::spectrum_script(cfg.spectrum.eigenfunctions.min(lv.n_levels())).as_bytes(),
    )?;
    report.say(&summary);
    Ok(())
}
