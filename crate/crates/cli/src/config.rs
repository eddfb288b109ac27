//! Experiment configuration (TOML).

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

/// Raised for anything wrong with the configuration or command line;
/// mapped to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

pub const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: Option<PotentialConfig>,
    pub circuit: Option<CircuitConfig>,
    #[serde(default)]
    pub capacitance: CapacitanceConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    pub trajectories: Option<TrajectoryBlock>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_levels() -> usize {
    4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialConfig {
    /// V = −μx²/2 + λx⁴/4 (eV), measured from V₀.
    Quartic { mu: f64, lambda: f64 },
    /// V = k x²/2 (eV); analytic self-test.
    Harmonic { stiffness: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    /// Ring inductance in henries.
    pub inductance: f64,
    /// Junction critical current in amperes.
    pub critical_current: f64,
    /// Bias Φ^ext = (n + ½)Φ₀.
    #[serde(default)]
    pub bias_quanta: i64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitanceConfig {
    /// Fixed value in farads.
    pub value: Option<f64>,
    /// Calibrate C so that the ground level sits at this energy (eV).
    pub calibrate_ground_energy: Option<f64>,
    #[serde(default = "default_search_range")]
    pub search_range: [f64; 2],
}

fn default_search_range() -> [f64; 2] {
    [0.5e-16, 2.0e-16]
}

impl Default for CapacitanceConfig {
    fn default() -> Self {
        Self {
            value: None,
            calibrate_ground_energy: None,
            search_range: default_search_range(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: -0.8,
            x_max: 0.8,
            n_points: 4001,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialState {
    Gaussian {
        x_m: f64,
        sigma_x: f64,
        #[serde(default = "yes")]
        renormalize: bool,
    },
    Left,
    Right,
}

fn yes() -> bool {
    true
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Gaussian {
            x_m: -0.27,
            sigma_x: 0.06,
            renormalize: true,
        }
    }
}

impl InitialState {
    pub fn label(&self) -> String {
        match self {
            InitialState::Gaussian {
                x_m,
                sigma_x,
                renormalize,
            } => {
                format!("gaussian x_m={x_m} sigma_x={sigma_x} renormalized={renormalize}")
            }
            InitialState::Left => "left".into(),
            InitialState::Right => "right".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Temperature (K) for the thermal-activation ratio.
    pub temperature: f64,
    /// Eigenfunctions written to the table.
    pub eigenfunctions: usize,
    pub convergence_check: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            temperature: 4.0,
            eigenfunctions: 4,
            convergence_check: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum KappaReference {
    #[serde(rename = "kappa_crit_10")]
    KappaCrit10,
    #[serde(rename = "kappa_crit_32")]
    KappaCrit32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub reference: KappaReference,
    pub multiples: Vec<f64>,
    /// Time span in units of T₁₀.
    pub span_t10: f64,
    pub samples: usize,
    pub plot_script: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            reference: KappaReference::KappaCrit32,
            multiples: vec![0.0, 1e-2, 1e-1, 10.0, 1e2, 1e3],
            span_t10: 10.0,
            samples: 2000,
            plot_script: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryBlock {
    #[serde(default = "default_trajectories")]
    pub n_trajectories: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// κ_E as a multiple of κ_crit_10.
    #[serde(default = "one")]
    pub kappa_crit_10_multiple: f64,
    /// Jump-test step in units of T₁₀.
    #[serde(default = "default_dt")]
    pub dt_t10: f64,
    #[serde(default = "default_t_max")]
    pub t_max_t10: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Span of the ODE comparison in units of T₁₀.
    #[serde(default = "default_ode_span")]
    pub ode_span_t10: f64,
    #[serde(default = "default_traj_state")]
    pub initial_state: InitialState,
    #[serde(default)]
    pub dump: bool,
}

impl Default for TrajectoryBlock {
    fn default() -> Self {
        Self {
            n_trajectories: default_trajectories(),
            seed: default_seed(),
            kappa_crit_10_multiple: one(),
            dt_t10: default_dt(),
            t_max_t10: default_t_max(),
            record_every: default_record_every(),
            ode_span_t10: default_ode_span(),
            initial_state: default_traj_state(),
            dump: false,
        }
    }
}

fn default_trajectories() -> usize {
    10_000
}
fn default_seed() -> u64 {
    1
}
fn one() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    0.005
}
fn default_t_max() -> f64 {
    40.0
}
fn default_record_every() -> usize {
    100
}
fn default_ode_span() -> f64 {
    10.0
}
fn default_traj_state() -> InitialState {
    InitialState::Left
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| config_error(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let bad = |m: String| Err(config_error(m));
        match (&self.potential, &self.circuit) {
            (Some(_), Some(_)) => {
                return bad("give either [potential] or [circuit], not both".into())
            }
            (None, None) => return bad("missing [potential] or [circuit] block".into()),
            _ => {}
        }
        let cap = &self.capacitance;
        match (cap.value, cap.calibrate_ground_energy) {
            (Some(_), Some(_)) => {
                return bad("capacitance: give value or calibrate_ground_energy, not both".into())
            }
            (None, None) => {
                return bad("capacitance: value or calibrate_ground_energy is required".into())
            }
            (Some(c), None) if !(c > 0.0 && c.is_finite()) => {
                return bad(format!("capacitance.value must be positive, got {c}"))
            }
            _ => {}
        }
        if cap.calibrate_ground_energy.is_some()
            && matches!(self.potential, Some(PotentialConfig::Harmonic { .. }))
        {
            return bad("calibration is only supported for double-well potentials".into());
        }
        let [lo, hi] = cap.search_range;
        if !(lo > 0.0 && hi > lo) {
            return bad(format!(
                "capacitance.search_range must be increasing and positive, got {:?}",
                cap.search_range
            ));
        }
        if self.levels < 2 {
            return bad(format!("levels must be at least 2, got {}", self.levels));
        }
        if self.sweep.reference == KappaReference::KappaCrit32 && self.levels < 4 {
            return bad("sweep.reference = kappa_crit_32 needs levels >= 4".into());
        }
        if let Some(m) = self
            .sweep
            .multiples
            .iter()
            .find(|m| !(m.is_finite() && **m >= 0.0))
        {
            return bad(format!("sweep.multiples must be nonnegative, got {m}"));
        }
        if self.sweep.multiples.is_empty() {
            return bad("sweep.multiples is empty".into());
        }
        if !(self.sweep.span_t10 > 0.0 && self.sweep.span_t10.is_finite()) {
            return bad(format!(
                "sweep.span_t10 must be positive, got {}",
                self.sweep.span_t10
            ));
        }
        if self.sweep.samples == 0 {
            return bad("sweep.samples must be at least 1".into());
        }
        if !(self.spectrum.temperature >= 0.0) {
            return bad(format!(
                "spectrum.temperature must be nonnegative, got {}",
                self.spectrum.temperature
            ));
        }
        if let Some(t) = &self.trajectories {
            if t.n_trajectories == 0 {
                return bad("trajectories.n_trajectories must be at least 1".into());
            }
            if !(t.kappa_crit_10_multiple >= 0.0 && t.kappa_crit_10_multiple.is_finite()) {
                return bad(format!(
                    "trajectories.kappa_crit_10_multiple must be nonnegative, got {}",
                    t.kappa_crit_10_multiple
                ));
            }
            for (name, v) in [
                ("dt_t10", t.dt_t10),
                ("t_max_t10", t.t_max_t10),
                ("ode_span_t10", t.ode_span_t10),
            ] {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("trajectories.{name} must be positive, got {v}"));
                }
            }
            if t.record_every == 0 {
                return bad("trajectories.record_every must be at least 1".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_parses() {
        let cfg = ExperimentConfig::parse(DEFAULT_CONFIG).unwrap();
        assert_eq!(cfg.levels, 4);
        assert_eq!(cfg.sweep.multiples, vec![0.0, 1e-2, 1e-1, 10.0, 1e2, 1e3]);
        assert_eq!(cfg.sweep.reference, KappaReference::KappaCrit32);
        assert!(cfg.trajectories.is_some());
    }

    #[test]
    fn rejects_conflicts_and_negatives() {
        let both =
            format!("{DEFAULT_CONFIG}\n[circuit]\ninductance = 1e-10\ncritical_current = 1e-5\n");
        assert!(ExperimentConfig::parse(&both).is_err());
        let neg = DEFAULT_CONFIG.replace("multiples = [0.0,", "multiples = [-1.0,");
        assert_ne!(neg, DEFAULT_CONFIG);
        assert!(ExperimentConfig::parse(&neg).is_err());
        assert!(ExperimentConfig::parse("levels = 4\n").is_err());
        let typo = format!("{DEFAULT_CONFIG}\nlevles = 3\n");
        assert!(ExperimentConfig::parse(&typo).is_err());
    }
}
