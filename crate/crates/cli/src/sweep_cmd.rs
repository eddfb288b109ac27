use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use fluxdamp_core::damping::critical_coupling;
use fluxdamp_core::io::write_decay_table;
use fluxdamp_core::{decay_table, flux_trace, FluxTrace, MeasurementCoupling};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, KappaReference};
use crate::experiment;
use crate::output::{write_file, Reporter};
use crate::plot;

/// `samples` evenly spaced times on [0, span]; a single sample is t = 0.
pub fn sample_times(span: f64, samples: usize) -> Vec<f64> {
    if samples == 1 {
        return vec![0.0];
    }
    let step = span / (samples - 1) as f64;
    (0..samples).map(|i| i as f64 * step).collect()
}

pub fn run(cfg: &ExperimentConfig, out: &Path, report: &Reporter) -> Result<()> {
    let exp = experiment::build(cfg)?;
    let lv = exp.levels();
    let (rho0, captured, _) = experiment::initial_density(&exp, &cfg.initial_state)?;
    let kc_ref = match cfg.sweep.reference {
        KappaReference::KappaCrit10 => critical_coupling(lv.gap(1, 0)),
        KappaReference::KappaCrit32 => critical_coupling(lv.gap(3, 2)),
    };
    let times = sample_times(
        cfg.sweep.span_t10 * lv.tunneling_period(),
        cfg.sweep.samples,
    );
    let label = cfg.initial_state.label();
    let captured = matches!(
        cfg.initial_state,
        crate::config::InitialState::Gaussian { .. }
    )
    .then_some(captured);

    // traces are computed together, files are written one at a time afterwards
    let results: Vec<(MeasurementCoupling, FluxTrace, Vec<u8>)> = cfg
        .sweep
        .multiples
        .par_iter()
        .map(|&m| -> Result<_> {
            let kappa = MeasurementCoupling::new(m * kc_ref)?;
            let trace =
                flux_trace(&rho0, lv, kappa, &times)?.with_initial_state(label.clone(), captured);
            let mut decay = Vec::new();
            write_decay_table(&decay_table(lv, kappa)?, &mut decay)?;
            Ok((kappa, trace, decay))
        })
        .collect::<Result<_>>()?;

    let mut manifest = String::new();
    let gap_ratio = if lv.n_levels() >= 4 {
        Some(lv.gap(3, 2) / lv.gap(1, 0))
    } else {
        None
    };
    let _ = writeln!(manifest, "# T10 = {:.12e} s", lv.tunneling_period());
    if let Some(r) = gap_ratio {
        let _ = writeln!(manifest, "# (E3-E2)/(E1-E0) = {r:.17e}");
    }
    let _ = writeln!(
        manifest,
        "# index\tkappa_E\tkappa_over_crit10\tkappa_over_crit32\ttau10_s\ttrace_file\tdecay_file"
    );
    let mut files = Vec::new();
    for (i, (kappa, trace, decay)) in results.iter().enumerate() {
        let trace_name = format!("trace_{i:02}.tsv");
        let decay_name = format!("decay_{i:02}.tsv");
        let mut buf = Vec::new();
        trace.write_tsv(&mut buf)?;
        write_file(&out.join(&trace_name), &buf)?;
        write_file(&out.join(&decay_name), decay)?;
        let m = &trace.metadata;
        let tau = 1.0 / kappa.decay_rate(lv.gap(1, 0));
        let _ = writeln!(
            manifest,
            "{i}\t{:.17e}\t{:.17e}\t{}\t{:.12e}\t{trace_name}\t{decay_name}",
            m.kappa_e,
            m.kappa_over_crit10,
            m.kappa_over_crit32
                .map_or("nan".to_string(), |r| format!("{r:.17e}")),
            tau,
        );
        report.say(&format!(
            "kappa_E = {:.4e}  (kappa/kc10 = {:.4e})  tau10 = {:.4e} s  -> {trace_name}",
            m.kappa_e, m.kappa_over_crit10, tau
        ));
        files.push((trace_name, m.kappa_over_crit10));
    }
    write_file(&out.join("manifest.tsv"), manifest.as_bytes())?;
    if cfg.sweep.plot_script {
        write_file(
            &out.join("plot_sweep.py"),
            plot::sweep_script(&files).as_bytes(),
        )?;
    }
    Ok(())
}
