//! Circuit and reduced double-well parameterizations of the rf-SQUID.
//!
//! The ring is described by its capacitance C, inductance L, junction
//! critical current I_c and external flux Φ^ext. With the reduced flux
//! coordinate x = (Φ − Φ^ext)/Φ₀ and Φ^ext/Φ₀ = n + ½ the potential is
//!
//! ```text
//! V(x) = (Φ₀²/2L) x² + (I_c Φ₀/2π) cos(2πx)
//! ```
//!
//! which near x = 0 is approximated by the quartic V₀ − (μ/2)x² + (λ/4)x⁴.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::units::{self, BOLTZMANN, FLUX_QUANTUM, HBAR};

/// Upper end of the bistability window, 5π/2.
pub const BETA_MAX: f64 = 5.0 * PI / 2.0;
/// Lower end of the bistability window.
pub const BETA_MIN: f64 = 1.0;
/// Relative guard band below the physicality pole μ = 3λ/2π².
pub const PHYSICAL_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Junction capacitance in farads. Not determined by the quartic model.
    pub capacitance: Option<f64>,
    pub inductance: f64,
    pub critical_current: f64,
    pub external_flux: f64,
    pub flux_quantum: f64,
}

impl CircuitParams {
    /// Circuit biased at Φ^ext = (n + ½)Φ₀.
    pub fn symmetric(
        capacitance: Option<f64>,
        inductance: f64,
        critical_current: f64,
        n: i64,
    ) -> Result<Self> {
        let params = Self {
            capacitance,
            inductance,
            critical_current,
            external_flux: (n as f64 + 0.5) * FLUX_QUANTUM,
            flux_quantum: FLUX_QUANTUM,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        if let Some(c) = self.capacitance {
            positive("capacitance", c)?;
        }
        positive("inductance", self.inductance)?;
        positive("critical_current", self.critical_current)?;
        positive("flux_quantum", self.flux_quantum)?;
        if !self.external_flux.is_finite() {
            return Err(Error::InvalidParameter(
                "external_flux must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Φ^ext/Φ₀ − ½ is an integer, so the potential is even in x.
    pub fn is_symmetric_bias(&self) -> bool {
        let shifted = self.external_flux / self.flux_quantum - 0.5;
        (shifted - shifted.round()).abs() < 1e-9
    }

    pub fn with_capacitance(mut self, capacitance: f64) -> Self {
        self.capacitance = Some(capacitance);
        self
    }
}

/// Quartic double well V₀ − (μ/2)x² + (λ/4)x⁴ with all coefficients in eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticPotential {
    pub mu: f64,
    pub lambda: f64,
    pub v0: f64,
}

impl QuarticPotential {
    /// Builds the potential with the offset fixed by V₀ = 3λ/8π⁴.
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        Self::with_offset(mu, lambda, 3.0 * lambda / (8.0 * PI.powi(4)))
    }

    pub fn with_offset(mu: f64, lambda: f64, v0: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mu must be positive, got {mu}"
            )));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let expected = 3.0 * lambda / (8.0 * PI.powi(4));
        if ((v0 - expected) / expected).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "v0 = {v0} eV inconsistent with 3 lambda / 8 pi^4 = {expected} eV"
            )));
        }
        Ok(Self { mu, lambda, v0 })
    }

    /// Largest μ for which the double well maps back onto a real circuit.
    pub fn physical_limit(&self) -> f64 {
        3.0 * self.lambda / (2.0 * PI * PI)
    }

    pub fn is_physical(&self) -> bool {
        self.mu < (1.0 - PHYSICAL_GUARD) * self.physical_limit()
    }

    fn require_physical(&self) -> Result<()> {
        if self.is_physical() {
            Ok(())
        } else {
            Err(Error::NotPhysical {
                mu: self.mu,
                limit: self.physical_limit(),
            })
        }
    }

    /// V(x) including the V₀ offset.
    pub fn value(&self, x: f64) -> f64 {
        self.v0 + self.relative(x)
    }

    /// V(x) − V₀.
    pub fn relative(&self, x: f64) -> f64 {
        let x2 = x * x;
        -0.5 * self.mu * x2 + 0.25 * self.lambda * x2 * x2
    }

    pub fn minimum_x(&self) -> f64 {
        (self.mu / self.lambda).sqrt()
    }

    pub fn barrier_height(&self) -> f64 {
        self.mu * self.mu / (4.0 * self.lambda)
    }
}

pub fn beta(params: &CircuitParams) -> f64 {
    2.0 * PI * params.inductance * params.critical_current / params.flux_quantum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BistableBound {
    /// β ≤ 1: monostable.
    Lower,
    /// β ≥ 5π/2: more than two wells.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BistableCheck {
    pub beta: f64,
    pub violated: Option<BistableBound>,
}

impl BistableCheck {
    pub fn is_bistable(&self) -> bool {
        self.violated.is_none()
    }

    pub fn reason(&self) -> &'static str {
        match self.violated {
            None => "within 1 < beta < 5 pi / 2",
            Some(BistableBound::Lower) => "beta <= 1, monostable",
            Some(BistableBound::Upper) => "beta >= 5 pi / 2, multistable",
        }
    }
}

pub fn validate_bistable(params: &CircuitParams) -> BistableCheck {
    classify_beta(beta(params))
}

pub fn classify_beta(b: f64) -> BistableCheck {
    let violated = if !(b > BETA_MIN) {
        Some(BistableBound::Lower)
    } else if !(b < BETA_MAX) {
        Some(BistableBound::Upper)
    } else {
        None
    };
    BistableCheck { beta: b, violated }
}

/// Maps circuit parameters onto (μ, λ, V₀) in eV.
pub fn to_quartic(params: &CircuitParams) -> Result<QuarticPotential> {
    params.validate()?;
    let check = validate_bistable(params);
    if !check.is_bistable() {
        return Err(Error::NotBistable {
            beta: check.beta,
            reason: check.reason(),
        });
    }
    let phi0 = params.flux_quantum;
    let ic_phi0 = params.critical_current * phi0;
    let mu = units::joules_to_ev(2.0 * PI * ic_phi0 - phi0 * phi0 / params.inductance);
    let lambda = units::joules_to_ev(4.0 * PI.powi(3) * ic_phi0 / 3.0);
    let v0 = units::joules_to_ev(ic_phi0 / (2.0 * PI));
    let q = QuarticPotential { mu, lambda, v0 };
    q.require_physical()?;
    Ok(q)
}

/// Inverts [`to_quartic`]. The capacitance is left unset and the bias is
/// placed at Φ^ext = Φ₀/2.
pub fn from_quartic(q: &QuarticPotential) -> Result<CircuitParams> {
    q.require_physical()?;
    let phi0 = FLUX_QUANTUM;
    let lambda_j = units::ev_to_joules(q.lambda);
    let mu_j = units::ev_to_joules(q.mu);
    let critical_current = 3.0 * lambda_j / (4.0 * PI.powi(3) * phi0);
    let inductance = phi0 * phi0 / (2.0 * PI * critical_current * phi0 - mu_j);
    CircuitParams::symmetric(None, inductance, critical_current, 0)
}

/// Full cosine potential in the symmetric-bias frame, in eV.
pub fn potential_full(x: f64, params: &CircuitParams) -> f64 {
    let phi0 = params.flux_quantum;
    let parabola = phi0 * phi0 / (2.0 * params.inductance) * x * x;
    let josephson = params.critical_current * phi0 / (2.0 * PI) * (2.0 * PI * x).cos();
    units::joules_to_ev(parabola + josephson)
}

pub fn potential_quartic(x: f64, q: &QuarticPotential) -> f64 {
    q.value(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellGeometry {
    /// (x₋, x₊) = (−√(μ/λ), +√(μ/λ)).
    pub minima_x: (f64, f64),
    /// ΔU = μ²/4λ in eV.
    pub barrier_height: f64,
    /// V″(x±) = 2μ in eV.
    pub curvature_at_minimum: f64,
    /// ħω₀ in eV.
    pub zero_point_energy: f64,
    /// C·Φ₀² in J·s².
    pub effective_mass: f64,
    /// ħ²/(2CΦ₀²) in eV.
    pub kinetic_coefficient: f64,
}

impl WellGeometry {
    /// Small-oscillation angular frequency ω₀ in rad/s.
    pub fn omega0(&self) -> f64 {
        self.zero_point_energy / HBAR
    }
}

pub fn well_geometry(q: &QuarticPotential, capacitance: f64) -> Result<WellGeometry> {
    q.require_physical()?;
    if !(capacitance.is_finite() && capacitance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "capacitance must be positive, got {capacitance}"
        )));
    }
    let xm = q.minimum_x();
    let kinetic = units::kinetic_coefficient(capacitance);
    let curvature = 2.0 * q.mu;
    Ok(WellGeometry {
        minima_x: (-xm, xm),
        barrier_height: q.barrier_height(),
        curvature_at_minimum: curvature,
        zero_point_energy: (2.0 * kinetic * curvature).sqrt(),
        effective_mass: capacitance * FLUX_QUANTUM * FLUX_QUANTUM,
        kinetic_coefficient: kinetic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbEstimate {
    /// Angular tunneling frequency in rad/s.
    pub omega: f64,
    /// ħω in eV, directly comparable with E₁ − E₀.
    pub energy: f64,
}

/// ω = ω₀ √(ΔU/ħω₀) exp(−ΔU/ħω₀).
pub fn wkb_frequency(geom: &WellGeometry) -> WkbEstimate {
    let ratio = geom.barrier_height / geom.zero_point_energy;
    let omega = geom.omega0() * ratio.sqrt() * (-ratio).exp();
    WkbEstimate {
        omega,
        energy: HBAR * omega,
    }
}

/// k_B T / ΔU: how strongly thermal activation competes with tunneling.
pub fn thermal_ratio(geom: &WellGeometry, temperature: f64) -> Result<f64> {
    if !(temperature >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be nonnegative, got {temperature}"
        )));
    }
    Ok(BOLTZMANN * temperature / geom.barrier_height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const MU: f64 = 1.80487;
    const LAMBDA: f64 = 14.73360;

    fn reference_well() -> QuarticPotential {
        QuarticPotential::new(MU, LAMBDA).unwrap()
    }

    fn circuit(l: f64, ic: f64) -> CircuitParams {
        CircuitParams::symmetric(None, l, ic, 0).unwrap()
    }

    #[test]
    fn beta_from_reference_circuit() {
        // 2π · 6.141e-11 · 2.761e-5 / 2.0678e-15 by hand.
        let mut p = circuit(6.141e-11, 2.761e-5);
        p.flux_quantum = 2.0678e-15;
        let expected = 2.0 * PI * 6.141e-11 * 2.761e-5 / 2.0678e-15;
        assert_relative_eq!(beta(&p), expected, max_relative = 1e-14);
        assert!((beta(&p) - 5.152).abs() < 1e-3);
        assert!(validate_bistable(&p).is_bistable());
    }

    #[test]
    fn beta_window_edges_are_excluded() {
        let l = 1e-11;
        let p = circuit(l, FLUX_QUANTUM / (2.0 * PI * l));
        assert_relative_eq!(beta(&p), 1.0, max_relative = 1e-14);
        assert_eq!(classify_beta(1.0).violated, Some(BistableBound::Lower));
        assert_eq!(classify_beta(BETA_MAX).violated, Some(BistableBound::Upper));
        assert!(classify_beta(1.0 + 1e-12).is_bistable());
        assert!(classify_beta(f64::NAN).violated.is_some());
    }

    #[test]
    fn order_of_magnitude_circuit_is_monostable() {
        let p = circuit(1e-11, 2e-5);
        assert!((beta(&p) - 0.6076).abs() < 1e-3, "{}", beta(&p));
        let check = validate_bistable(&p);
        assert_eq!(check.violated, Some(BistableBound::Lower));
        assert!(matches!(to_quartic(&p), Err(Error::NotBistable { .. })));
    }

    #[test]
    fn to_quartic_reproduces_reference_parameters() {
        let q = to_quartic(&circuit(6.141e-11, 2.761e-5)).unwrap();
        assert!((q.mu - 1.80487).abs() / 1.80487 < 5e-3, "mu = {}", q.mu);
        assert!(
            (q.lambda - 14.73360).abs() / 14.73360 < 5e-3,
            "lambda = {}",
            q.lambda
        );
        let v0_alt = 3.0 * q.lambda / (8.0 * PI.powi(4));
        assert_relative_eq!(q.v0, v0_alt, max_relative = 1e-12);
    }

    #[test]
    fn from_quartic_inverts_reference() {
        let p = from_quartic(&reference_well()).unwrap();
        assert!(
            (p.critical_current - 27.61e-6).abs() / 27.61e-6 < 1e-3,
            "{}",
            p.critical_current
        );
        assert!(
            (p.inductance - 6.141e-11).abs() / 6.141e-11 < 1e-3,
            "{}",
            p.inductance
        );
        assert!(p.capacitance.is_none());
        assert!(p.is_symmetric_bias());
        let back = to_quartic(&p).unwrap();
        assert_relative_eq!(back.mu, MU, max_relative = 1e-12);
        assert_relative_eq!(back.lambda, LAMBDA, max_relative = 1e-12);
    }

    #[test]
    fn from_quartic_rejects_pole() {
        let lambda = 10.0;
        let limit = 3.0 * lambda / (2.0 * PI * PI);
        let near = QuarticPotential::new(limit * (1.0 - 1e-7), lambda).unwrap();
        assert!(matches!(
            from_quartic(&near),
            Err(Error::NotPhysical { .. })
        ));
        let beyond = QuarticPotential::new(limit * 1.1, lambda).unwrap();
        assert!(matches!(
            from_quartic(&beyond),
            Err(Error::NotPhysical { .. })
        ));
        let inside = QuarticPotential::new(limit * (1.0 - 1e-4), lambda).unwrap();
        let p = from_quartic(&inside).unwrap();
        assert!(p.inductance.is_finite() && p.inductance > 0.0);
    }

    #[test]
    fn degenerate_single_well_at_beta_one() {
        let l = 1e-11;
        let p = circuit(l, FLUX_QUANTUM / (2.0 * PI * l));
        // mu = 2π I_c Φ₀ − Φ₀²/L vanishes up to rounding.
        let ic_phi0 = p.critical_current * p.flux_quantum;
        let mu = 2.0 * PI * ic_phi0 - p.flux_quantum * p.flux_quantum / l;
        assert!(mu.abs() <= 1e-15 * 2.0 * PI * ic_phi0);
        assert!(to_quartic(&p).is_err());
    }

    #[test]
    fn full_potential_at_origin_and_parity() {
        let p = from_quartic(&reference_well()).unwrap();
        let v0 = units::joules_to_ev(p.critical_current * p.flux_quantum / (2.0 * PI));
        assert_relative_eq!(potential_full(0.0, &p), v0, max_relative = 1e-15);
        for i in 0..50 {
            let x = 0.017 * i as f64;
            assert_eq!(potential_full(x, &p), potential_full(-x, &p));
        }
    }

    #[test]
    fn quartic_tracks_full_potential_near_origin() {
        // Grid comparison. The sixth-order cosine term V₀(2πx)⁶/720 is 8.9e-3 eV
        // at x = 0.35 and 2.0e-2 eV at x = 0.4, so the 2e-3 eV agreement
        // holds only out to |x| ≈ 0.25.
        let q = reference_well();
        let p = from_quartic(&q).unwrap();
        let max_dev = |reach: f64| {
            (0..=4000)
                .map(|i| -reach + 2.0 * reach * i as f64 / 4000.0)
                .map(|x| (potential_full(x, &p) - potential_quartic(x, &q)).abs())
                .fold(0.0_f64, f64::max)
        };
        assert!(max_dev(0.25) < 2e-3, "{}", max_dev(0.25));
        // The deviation is exactly the cosine beyond fourth order.
        let tail = |x: f64| {
            let s = 2.0 * PI * x;
            q.v0 * (s.cos() - 1.0 + s * s / 2.0 - s.powi(4) / 24.0)
        };
        for x in [0.1, 0.2, 0.3, 0.4] {
            let dev = potential_full(x, &p) - potential_quartic(x, &q);
            assert!((dev - tail(x)).abs() < 1e-12, "{x}: {dev} vs {}", tail(x));
        }
        assert!(max_dev(0.4) > 1e-2);
    }

    #[test]
    fn quartic_reference_values() {
        let q = reference_well();
        assert_eq!(q.relative(0.0), 0.0);
        assert!(
            (q.relative(0.35) + 0.055274).abs() < 5e-6,
            "{}",
            q.relative(0.35)
        );
        assert!((q.minimum_x() - 0.35).abs() < 5e-6);
        // Brute-force scan for the minimum with a 1e-6 step.
        let (mut best_x, mut best_v) = (0.0, f64::INFINITY);
        let mut x = 0.0;
        while x < 0.8 {
            let v = q.relative(x);
            if v < best_v {
                best_v = v;
                best_x = x;
            }
            x += 1e-6;
        }
        assert!((best_x - 0.35).abs() < 5e-6, "{best_x}");
        assert!((best_x - q.minimum_x()).abs() < 2e-6);
    }

    #[test]
    fn geometry_reference() {
        let g = well_geometry(&reference_well(), 1e-16).unwrap();
        assert!((g.barrier_height - 0.055274).abs() < 1e-6);
        assert!((g.kinetic_coefficient - 8.118e-5).abs() / 8.118e-5 < 1e-3);
        assert!(
            (g.zero_point_energy - 0.02421).abs() / 0.02421 < 1e-3,
            "{}",
            g.zero_point_energy
        );
        assert_eq!(g.minima_x.0, -g.minima_x.1);
        assert_eq!(g.curvature_at_minimum, 2.0 * MU);
    }

    #[test]
    fn geometry_rejects_bad_capacitance() {
        assert!(well_geometry(&reference_well(), 0.0).is_err());
        assert!(well_geometry(&reference_well(), -1.0).is_err());
    }

    #[test]
    fn shallow_limit_closes_the_barrier() {
        let q = QuarticPotential::new(1e-8, 10.0).unwrap();
        let g = well_geometry(&q, 1e-16).unwrap();
        assert!(g.barrier_height < 1e-15);
        assert!(g.minima_x.1 < 1e-4);
    }

    #[test]
    fn wkb_at_unit_ratio() {
        let mut g = well_geometry(&reference_well(), 1e-16).unwrap();
        g.barrier_height = g.zero_point_energy;
        let w = wkb_frequency(&g);
        assert_relative_eq!(
            w.omega,
            g.omega0() / std::f64::consts::E,
            max_relative = 1e-14
        );
    }

    #[test]
    fn wkb_reference_value() {
        let g = well_geometry(&reference_well(), 1e-16).unwrap();
        let w = wkb_frequency(&g);
        assert!((w.energy - 3.73e-3).abs() / 3.73e-3 < 5e-3, "{}", w.energy);
    }

    #[test]
    fn thermal_ratio_values() {
        let g = well_geometry(&reference_well(), 1e-16).unwrap();
        let r = thermal_ratio(&g, 4.0).unwrap();
        assert!((r - 6.24e-3).abs() / 6.24e-3 < 0.1, "{r}");
        assert_eq!(thermal_ratio(&g, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            thermal_ratio(&g, 8.0).unwrap(),
            2.0 * r,
            max_relative = 1e-15
        );
        assert!(thermal_ratio(&g, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_circuit(l in 1e-12f64..1e-9, beta_target in 1.01f64..7.8) {
            let ic = beta_target * FLUX_QUANTUM / (2.0 * PI * l);
            let p = circuit(l, ic);
            let q = to_quartic(&p).unwrap();
            let back = from_quartic(&q).unwrap();
            prop_assert!(((back.inductance - l) / l).abs() < 1e-12);
            prop_assert!(((back.critical_current - ic) / ic).abs() < 1e-12);
            prop_assert!(((q.v0 - 3.0 * q.lambda / (8.0 * PI.powi(4))) / q.v0).abs() < 1e-12);
        }

        #[test]
        fn round_trip_quartic(lambda in 0.1f64..100.0, frac in 0.01f64..0.87) {
            let mu = frac * 3.0 * lambda / (2.0 * PI * PI);
            let q = QuarticPotential::new(mu, lambda).unwrap();
            let back = to_quartic(&from_quartic(&q).unwrap()).unwrap();
            prop_assert!(((back.mu - mu) / mu).abs() < 1e-12);
            prop_assert!(((back.lambda - lambda) / lambda).abs() < 1e-12);
        }

        #[test]
        fn quartic_even_with_exact_extrema(mu in 0.01f64..5.0, lambda in 0.1f64..50.0, x in -1.0f64..1.0) {
            let q = QuarticPotential::new(mu, lambda).unwrap();
            prop_assert_eq!(q.relative(x), q.relative(-x));
            let xm = q.minimum_x();
            let gap = q.relative(0.0) - q.relative(xm);
            prop_assert!((gap - q.barrier_height()).abs() <= 1e-14 * q.barrier_height().max(1e-300) * 4.0);
            // Derivative −μx + λx³ vanishes at the minimum.
            let slope = -mu * xm + lambda * xm.powi(3);
            prop_assert!(slope.abs() <= 1e-14 * mu * xm * 4.0);
        }

        #[test]
        fn monostable_iff_mu_nonpositive(l in 1e-12f64..1e-9, beta_target in 0.1f64..7.8) {
            let ic = beta_target * FLUX_QUANTUM / (2.0 * PI * l);
            let p = circuit(l, ic);
            let phi0 = p.flux_quantum;
            let mu = 2.0 * PI * ic * phi0 - phi0 * phi0 / l;
            if mu <= 0.0 {
                prop_assert!(!validate_bistable(&p).is_bistable());
            }
        }

        #[test]
        fn wkb_monotone_in_barrier(ratio in 0.5f64..20.0, step in 0.01f64..2.0) {
            let mut g = well_geometry(&QuarticPotential::new(MU, LAMBDA).unwrap(), 1e-16).unwrap();
            g.barrier_height = ratio * g.zero_point_energy;
            let a = wkb_frequency(&g).omega;
            g.barrier_height = (ratio + step) * g.zero_point_energy;
            let b = wkb_frequency(&g).omega;
            prop_assert!(b < a);
        }
    }
}
