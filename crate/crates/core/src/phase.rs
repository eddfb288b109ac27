//! Accurate reduction of large oscillation phases.
//!
//! Bohr phases ωt reach 10⁶–10⁷ rad over a few tunneling periods for the
//! fast inter-doublet frequencies. Forming ωt in plain double precision and
//! handing it to sin/cos loses ~1e-9 rad, which is enough to break exact
//! composition of evolutions. The product is instead taken exactly with an
//! FMA and reduced modulo 2π in two pieces.

use std::f64::consts::TAU;

use num_complex::Complex64;

/// 2π − TAU, the rounding residue of the double nearest to 2π.
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// ωt reduced to [−π, π], accurate to a few ulps of π.
pub fn reduced_phase(omega: f64, t: f64) -> f64 {
    let p = omega * t;
    if p.abs() <= TAU {
        return p;
    }
    let err = omega.mul_add(t, -p);
    let k = (p / TAU).round();
    (-k).mul_add(TAU, p) - k * TAU_LO + err
}

/// exp(−iωt − γt).
pub fn damped_phasor(omega: f64, gamma: f64, t: f64) -> Complex64 {
    let phi = reduced_phase(omega, t);
    let (s, c) = phi.sin_cos();
    Complex64::new(c, -s) * (-gamma * t).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_phases_pass_through() {
        assert_eq!(reduced_phase(2.0, 1.5), 3.0);
        assert_eq!(reduced_phase(-1.0, 0.5), -0.5);
    }

    #[test]
    fn exact_multiples_reduce_near_zero() {
        // TAU·2²⁰ is exact and falls short of 2²⁰ turns by 2²⁰·TAU_LO.
        let k = 2f64.powi(20);
        let r = reduced_phase(1.0, TAU * k);
        assert!((r + k * TAU_LO).abs() < 1e-15, "{r}");
    }

    #[test]
    fn composition_is_consistent() {
        let omega = 3.183_098_861_837_907e13;
        let q = 2f64.powi(-40);
        for (a, b) in [(7_000u64, 1_234u64), (76_543, 12_345), (1, 99_999)] {
            let t1 = a as f64 * q;
            let t2 = b as f64 * q;
            let z1 = damped_phasor(omega, 0.0, t1) * damped_phasor(omega, 0.0, t2);
            let z = damped_phasor(omega, 0.0, t1 + t2);
            assert!((z1 - z).norm() < 1e-14, "{}", (z1 - z).norm());
        }
    }
}
