//! Signal analysis for flux traces: harmonic regression at known Bohr
//! frequencies and envelope fits.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase::reduced_phase;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicFit {
    pub offset: f64,
    pub omegas: Vec<f64>,
    /// Cosine amplitude of each frequency, ≥ 0.
    pub amplitudes: Vec<f64>,
    /// RMS misfit over the samples.
    pub rms_residual: f64,
}

impl HarmonicFit {
    pub fn amplitude_of(&self, omega: f64) -> Option<f64> {
        self.omegas
            .iter()
            .position(|w| (w - omega).abs() <= 1e-12 * omega.abs())
            .map(|k| self.amplitudes[k])
    }
}

fn design_row(t: f64, centre: f64, omegas: &[f64], row: &mut [f64]) {
    row[0] = 1.0;
    for (k, &w) in omegas.iter().enumerate() {
        let (s, c) = reduced_phase(w, t - centre).sin_cos();
        row[1 + 2 * k] = c;
        row[2 + 2 * k] = s;
    }
}

/// Least-squares fit of c + Σ_k [a_k cos ω_k t + b_k sin ω_k t] to `f` on
/// `n_samples` uniform points of [t0, t1). Amplitudes are √(a_k² + b_k²).
pub fn harmonic_fit<F>(
    f: F,
    t0: f64,
    t1: f64,
    n_samples: usize,
    omegas: &[f64],
) -> Result<HarmonicFit>
where
    F: Fn(f64) -> f64 + Sync,
{
    let p = 1 + 2 * omegas.len();
    if n_samples < 2 * p || !(t1 > t0) {
        return Err(Error::InvalidParameter(format!(
            "harmonic fit needs t1 > t0 and at least {} samples, got {n_samples}",
            2 * p
        )));
    }
    let dt = (t1 - t0) / n_samples as f64;
    let centre = 0.5 * (t0 + t1);
    let sample = |i: usize| t0 + i as f64 * dt;
    let accumulate = |range: std::ops::Range<usize>| {
        let mut ata = DMatrix::<f64>::zeros(p, p);
        let mut atb = DVector::<f64>::zeros(p);
        let mut bb = 0.0;
        let mut row = vec![0.0; p];
        for i in range {
            let t = sample(i);
            let y = f(t);
            design_row(t, centre, omegas, &mut row);
            for a in 0..p {
                atb[a] += row[a] * y;
                for b in a..p {
                    ata[(a, b)] += row[a] * row[b];
                }
            }
            bb += y * y;
        }
        (ata, atb, bb)
    };
    let parts: Vec<_> = (0..n_samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| accumulate(c * CHUNK..((c + 1) * CHUNK).min(n_samples)))
        .collect();
    let mut ata = DMatrix::<f64>::zeros(p, p);
    let mut atb = DVector::<f64>::zeros(p);
    let mut bb = 0.0;
    for (m, v, s) in parts {
        ata += m;
        atb += v;
        bb += s;
    }
    for a in 0..p {
        for b in 0..a {
            ata[(a, b)] = ata[(b, a)];
        }
    }
    let coef = ata
        .clone()
        .svd(true, true)
        .solve(&atb, 1e-14 * n_samples as f64)
        .map_err(|e| Error::InvalidParameter(format!("harmonic fit: {e}")))?;
    let sse = (bb - 2.0 * coef.dot(&atb) + coef.dot(&(&ata * &coef))).max(0.0);
    Ok(HarmonicFit {
        offset: coef[0],
        omegas: omegas.to_vec(),
        amplitudes: (0..omegas.len())
            .map(|k| coef[1 + 2 * k].hypot(coef[2 + 2 * k]))
            .collect(),
        rms_residual: (sse / n_samples as f64).sqrt(),
    })
}

/// Ordinary least-squares line through (x, y): returns (slope, intercept).
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "line fit needs two or more paired points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "line fit needs distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFit {
    /// Decay rate γ of the amplitude, A(t) ∝ e^{−γt}, in 1/s.
    pub rate: f64,
    pub initial_amplitude: f64,
    pub window_centres: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

/// Tracks the amplitude of the ω component over consecutive windows of
/// one period each (complex demodulation at the known ω) and fits
/// ln A(t) by a straight line.
pub fn envelope_fit<F>(
    f: F,
    omega: f64,
    t0: f64,
    n_windows: usize,
    samples_per_window: usize,
) -> Result<EnvelopeFit>
where
    F: Fn(f64) -> f64 + Sync,
{
    let period = std::f64::consts::TAU / omega;
    let mut centres = Vec::with_capacity(n_windows);
    let mut amps = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let a = t0 + w as f64 * period;
        let fit = harmonic_fit(&f, a, a + period, samples_per_window, &[omega])?;
        centres.push(a + 0.5 * period);
        amps.push(fit.amplitudes[0]);
    }
    let logs: Vec<f64> = amps.iter().map(|a| a.ln()).collect();
    let (slope, intercept) = fit_line(&centres, &logs)?;
    Ok(EnvelopeFit {
        rate: -slope,
        initial_amplitude: (intercept + slope * t0).exp(),
        window_centres: centres,
        amplitudes: amps,
    })
}

/// Non-increasing upper envelope: e[i] = max_{j ≥ i} |v[j] − baseline|.
pub fn upper_envelope(values: &[f64], baseline: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    let mut running: f64 = 0.0;
    for (i, v) in values.iter().enumerate().rev() {
        running = running.max((v - baseline).abs());
        out[i] = running;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_known_components() {
        let w1 = 1.0e9;
        let w2 = 103.4 * w1;
        let f = |t: f64| 0.01 + 0.3 * (w1 * t + 0.4).cos() + 0.02 * (w2 * t - 1.0).sin();
        let period = std::f64::consts::TAU / w1;
        let fit = harmonic_fit(f, 0.0, period, 4000, &[w1, w2]).unwrap();
        assert!((fit.offset - 0.01).abs() < 1e-10);
        assert!((fit.amplitudes[0] - 0.3).abs() < 1e-10);
        assert!((fit.amplitudes[1] - 0.02).abs() < 1e-10);
        assert!(fit.rms_residual < 1e-7);
        assert_eq!(fit.amplitude_of(w2), Some(fit.amplitudes[1]));
    }

    #[test]
    fn envelope_rate_is_exact_for_damped_cosine() {
        let w = 2.0e8;
        let gamma = 3.0e7;
        let f = |t: f64| 0.5 * (-gamma * t).exp() * (w * t).cos();
        let fit = envelope_fit(f, w, 0.0, 8, 512).unwrap();
        assert!((fit.rate - gamma).abs() / gamma < 1e-9);
    }

    #[test]
    fn line_fit_and_envelope() {
        let (m, b) = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((m - 2.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert_eq!(
            upper_envelope(&[1.0, -3.0, 2.0, 0.5], 0.0),
            vec![3.0, 3.0, 2.0, 0.5]
        );
    }
}
