use fluxdamp_core::calibration::calibrate_capacitance;
use fluxdamp_core::state::{density_from_projection, make_gaussian, project};
use fluxdamp_core::units::kinetic_coefficient;
use fluxdamp_core::*;

fn basis(n: usize) -> (SpectralBasis, Grid, QuarticPotential) {
    let q = QuarticPotential::new(1.80487, 14.73360).unwrap();
    let grid = Grid::new(-0.8, 0.8, 4001).unwrap();
    let cal = calibrate_capacitance(&q, &grid, -0.0440591, (0.5e-16, 2.0e-16)).unwrap();
    let b = solve_spectrum(
        &grid,
        kinetic_coefficient(cal.capacitance),
        |x| q.relative(x),
        n,
    )
    .unwrap();
    (b, grid, q)
}

#[test]
fn doublets_parity_and_selection_rules() {
    let (b, _, _) = basis(8);
    let lv = b.levels();
    for n in 0..8 {
        assert_eq!(
            lv.parities()[n],
            if n % 2 == 0 {
                Parity::Even
            } else {
                Parity::Odd
            }
        );
        assert!(lv.x(n, n).unwrap().abs() < 1e-8);
        assert!(b.residuals()[n] < 1e-8);
    }
    assert!(lv.x(0, 1).unwrap() < 0.0);
    assert!(lv.x(0, 2).unwrap().abs() < 1e-8);
    let ratio = lv.gap(3, 2) / lv.gap(1, 0);
    assert!((50.0..200.0).contains(&ratio), "{ratio}");
}

#[test]
fn reference_packet_in_eight_levels_is_nearly_pure() {
    let (b, grid, _) = basis(8);
    let p = project(&make_gaussian(&GaussianSpec::REFERENCE, &grid).unwrap(), &b).unwrap();
    let rho = density_from_projection(&p, true, 0.9).unwrap();
    assert!(rho.hermiticity_error() < 1e-14);
    assert!(rho.eigenvalues().iter().all(|&e| e > -1e-12));
    assert!(rho.purity() >= 0.99);
    assert!(p.captured_norm > 0.95);
}

#[test]
fn sweep_ratios_between_critical_couplings() {
    let (b, _, _) = basis(4);
    let lv = b.levels();
    let k32 = MeasurementCoupling::relative_to_critical(lv, 3, 2, 1.0).unwrap();
    let k10 = MeasurementCoupling::relative_to_critical(lv, 1, 0, 1.0).unwrap();
    let r = k10.kappa_e() / k32.kappa_e();
    assert!((r - lv.gap(3, 2) / lv.gap(1, 0)).abs() / r < 1e-12);
    let table = decay_table(lv, k10).unwrap();
    let e = table.get(1, 0).unwrap();
    assert!((e.tau - 2.0 * e.period).abs() / e.tau < 1e-12);
}
