//! Finite-difference eigenproblem for H = −K d²/dx² + V(x) with hard walls.
//!
//! The Hamiltonian is discretized with the second-order three-point stencil
//! on the interior nodes of a [`Grid`]. When the grid is mirror-symmetric
//! with a node at x = 0 and the sampled potential is even, the matrix is
//! block-diagonalized into even and odd sectors first, which keeps the
//! exponentially small doublet splittings free of cross-sector mixing.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::tridiag::SymTridiagonal;
use crate::units;

/// Maximum allowed ‖Hφ − Eφ‖ (eV, unit-norm φ) for an accepted level.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Tolerance on ±1 of the mirror overlap used to classify parity.
pub const PARITY_TOLERANCE: f64 = 1e-6;
/// Relative ground-doublet splitting drift above which a grid is too coarse.
pub const SPLITTING_DRIFT_LIMIT: f64 = 0.01;
pub const DEFAULT_LEVELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    /// Mirror overlap is not ±1 (asymmetric grid or potential).
    Indefinite,
}

/// Energies and flux matrix elements: everything the dynamics needs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLevels {
    energies: Vec<f64>,
    parities: Vec<Parity>,
    x_matrix: DMatrix<f64>,
}

impl EnergyLevels {
    /// Builds a level set directly, e.g. for a model Hamiltonian.
    pub fn new(energies: Vec<f64>, parities: Vec<Parity>, x_matrix: DMatrix<f64>) -> Result<Self> {
        let n = energies.len();
        if n == 0 || parities.len() != n || x_matrix.nrows() != n || x_matrix.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "inconsistent level data: {n} energies, {} parities, {}x{} x-matrix",
                parities.len(),
                x_matrix.nrows(),
                x_matrix.ncols()
            )));
        }
        if energies.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidParameter("energies must be ascending".into()));
        }
        if (0..n).any(|i| (0..n).any(|j| x_matrix[(i, j)] != x_matrix[(j, i)])) {
            return Err(Error::InvalidParameter("x-matrix must be symmetric".into()));
        }
        Ok(Self {
            energies,
            parities,
            x_matrix,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, n: usize) -> f64 {
        self.energies[n]
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parities
    }

    pub fn x_matrix(&self) -> &DMatrix<f64> {
        &self.x_matrix
    }

    /// ⟨m|x̂|n⟩.
    pub fn x(&self, m: usize, n: usize) -> Result<f64> {
        let levels = self.n_levels();
        if m >= levels || n >= levels {
            return Err(Error::IndexOutOfRange { m, n, levels });
        }
        Ok(self.x_matrix[(m, n)])
    }

    /// E_n − E_m in eV.
    pub fn gap(&self, n: usize, m: usize) -> f64 {
        self.energies[n] - self.energies[m]
    }

    /// ω_nm = (E_n − E_m)/ħ in rad/s.
    pub fn bohr_frequency(&self, n: usize, m: usize) -> f64 {
        self.gap(n, m) / units::HBAR
    }

    /// Ground-doublet period T₁₀ = h/(E₁ − E₀) in seconds.
    pub fn tunneling_period(&self) -> f64 {
        units::bohr_period(self.gap(1, 0))
    }

    /// Keeps only the lowest `n` levels.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.n_levels());
        Self {
            energies: self.energies[..n].to_vec(),
            parities: self.parities[..n].to_vec(),
            x_matrix: self.x_matrix.view((0, 0), (n, n)).into_owned(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralBasis {
    grid: Grid,
    kinetic_coefficient: f64,
    levels: EnergyLevels,
    /// Grid-sampled eigenfunctions (walls included), unit norm under the
    /// trapezoid measure.
    eigenfunctions: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

impl SpectralBasis {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kinetic_coefficient(&self) -> f64 {
        self.kinetic_coefficient
    }

    pub fn levels(&self) -> &EnergyLevels {
        &self.levels
    }

    pub fn n_levels(&self) -> usize {
        self.levels.n_levels()
    }

    pub fn energies(&self) -> &[f64] {
        self.levels.energies()
    }

    pub fn parities(&self) -> &[Parity] {
        self.levels.parities()
    }

    pub fn eigenfunction(&self, n: usize) -> &[f64] {
        &self.eigenfunctions[n]
    }

    pub fn eigenfunctions(&self) -> &[Vec<f64>] {
        &self.eigenfunctions
    }

    /// ‖Hφ_n − E_nφ_n‖ in eV for each retained level.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Grid inner product ∫ f g dx.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.grid.integrate(|i| f[i] * g[i])
    }
}

/// ⟨m|x̂|n⟩ by trapezoid quadrature (the stored matrix is built that way).
pub fn x_matrix_element(basis: &SpectralBasis, m: usize, n: usize) -> Result<f64> {
    basis.levels.x(m, n)
}

struct Discretized {
    /// Interior-node potential samples, index i ↔ grid node i + 1.
    potential: Vec<f64>,
    hopping: f64,
}

fn discretize(grid: &Grid, kinetic: f64, potential: &impl Fn(f64) -> f64) -> Result<Discretized> {
    let samples: Vec<f64> = (1..grid.n_points - 1)
        .map(|i| potential(grid.x(i)))
        .collect();
    if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "potential is not bounded on the grid ({bad})"
        )));
    }
    let h = grid.spacing();
    Ok(Discretized {
        potential: samples,
        hopping: kinetic / (h * h),
    })
}

fn is_even_on_grid(grid: &Grid, v: &[f64]) -> bool {
    if !grid.is_symmetric() || grid.n_points.is_multiple_of(2) {
        return false;
    }
    let scale = v
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let m = v.len();
    (0..m / 2).all(|i| (v[i] - v[m - 1 - i]).abs() <= 1e-12 * scale)
}

/// Lowest `n_levels` eigenpairs of the discretized Hamiltonian.
pub fn solve_spectrum(
    grid: &Grid,
    kinetic_coefficient: f64,
    potential: impl Fn(f64) -> f64,
    n_levels: usize,
) -> Result<SpectralBasis> {
    solve_with(grid, kinetic_coefficient, &potential, n_levels, true)
}

/// Same as [`solve_spectrum`] but never uses the parity split. Exposed so
/// the two routes can be checked against each other.
pub fn solve_spectrum_unsplit(
    grid: &Grid,
    kinetic_coefficient: f64,
    potential: impl Fn(f64) -> f64,
    n_levels: usize,
) -> Result<SpectralBasis> {
    solve_with(grid, kinetic_coefficient, &potential, n_levels, false)
}

fn solve_with(
    grid: &Grid,
    kinetic: f64,
    potential: &impl Fn(f64) -> f64,
    n_levels: usize,
    allow_split: bool,
) -> Result<SpectralBasis> {
    if !(kinetic.is_finite() && kinetic > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kinetic coefficient must be positive, got {kinetic}"
        )));
    }
    let interior = grid.n_points - 2;
    if n_levels == 0 || 10 * n_levels > interior {
        return Err(Error::InvalidParameter(format!(
            "n_levels = {n_levels} must be positive and much smaller than {interior} interior points"
        )));
    }
    let disc = discretize(grid, kinetic, potential)?;
    let (energies, mut functions) = if allow_split && is_even_on_grid(grid, &disc.potential) {
        solve_split(grid, &disc, n_levels)
    } else {
        solve_full(grid, &disc, n_levels)
    };

    let h = grid.spacing();
    for f in functions.iter_mut() {
        let norm = (f.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
        f.iter_mut().for_each(|x| *x /= norm);
        fix_sign(f);
    }

    let xs = grid.points();
    let x_element = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(&xs)
            .map(|((p, q), x)| p * q * x)
            .sum::<f64>()
            * h
    };
    if functions.len() >= 2 && x_element(&functions[0], &functions[1]) > 0.0 {
        functions[1].iter_mut().for_each(|x| *x = -*x);
    }

    let n = functions.len();
    let mut x_matrix = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = x_element(&functions[i], &functions[j]);
            x_matrix[(i, j)] = v;
            x_matrix[(j, i)] = v;
        }
    }

    let parities = functions.iter().map(|f| classify_parity(grid, f)).collect();
    let residuals = functions
        .iter()
        .zip(&energies)
        .enumerate()
        .map(|(level, (f, &e))| {
            let r = residual(&disc, f, e);
            if r <= RESIDUAL_TOLERANCE {
                Ok(r)
            } else {
                Err(Error::ConvergenceFailure { level, residual: r })
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SpectralBasis {
        grid: *grid,
        kinetic_coefficient: kinetic,
        levels: EnergyLevels {
            energies,
            parities,
            x_matrix,
        },
        eigenfunctions: functions,
        residuals,
    })
}

fn solve_full(grid: &Grid, disc: &Discretized, n_levels: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let a = disc.hopping;
    let m = disc.potential.len();
    let t = SymTridiagonal::new(
        disc.potential.iter().map(|v| 2.0 * a + v).collect(),
        vec![-a; m - 1],
    );
    let pairs = t.lowest(n_levels);
    let functions = pairs
        .vectors
        .into_iter()
        .map(|v| {
            let mut f = vec![0.0; grid.n_points];
            f[1..grid.n_points - 1].copy_from_slice(&v);
            f
        })
        .collect();
    (pairs.values, functions)
}

fn solve_split(grid: &Grid, disc: &Discretized, n_levels: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let a = disc.hopping;
    let n = grid.n_points;
    let centre = (n - 1) / 2;
    // Interior index of node `centre + j` is `centre + j - 1`.
    let half = n - 2 - centre;
    let v = |j: usize| disc.potential[centre + j - 1];

    // Even sector: unknowns at nodes centre..centre+half. The centre row
    // couples with weight 2a; rescaling u₀ = ψ₀/√2 symmetrizes it.
    let even_diag: Vec<f64> = (0..=half).map(|j| 2.0 * a + v(j)).collect();
    let mut even_off = vec![-a; half];
    even_off[0] = -std::f64::consts::SQRT_2 * a;
    let even = SymTridiagonal::new(even_diag, even_off).lowest(n_levels);

    let odd_diag: Vec<f64> = (1..=half).map(|j| 2.0 * a + v(j)).collect();
    let odd = SymTridiagonal::new(odd_diag, vec![-a; half - 1]).lowest(n_levels);

    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::with_capacity(2 * n_levels);
    for (e, u) in even.values.iter().zip(&even.vectors) {
        let mut f = vec![0.0; n];
        f[centre] = std::f64::consts::SQRT_2 * u[0];
        for j in 1..=half {
            f[centre + j] = u[j];
            f[centre - j] = u[j];
        }
        candidates.push((*e, f));
    }
    for (e, u) in odd.values.iter().zip(&odd.vectors) {
        let mut f = vec![0.0; n];
        for j in 1..=half {
            f[centre + j] = u[j - 1];
            f[centre - j] = -u[j - 1];
        }
        candidates.push((*e, f));
    }
    candidates.sort_by(|p, q| p.0.total_cmp(&q.0));
    candidates.truncate(n_levels);
    candidates.into_iter().unzip()
}

/// Makes the leftmost significant lobe positive.
fn fix_sign(f: &mut [f64]) {
    let peak = f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = f.iter().find(|x| x.abs() > 1e-3 * peak) {
        if *first < 0.0 {
            f.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn classify_parity(grid: &Grid, f: &[f64]) -> Parity {
    if !grid.is_symmetric() {
        return Parity::Indefinite;
    }
    let n = f.len();
    let overlap = grid.integrate(|i| f[i] * f[n - 1 - i]);
    if (overlap - 1.0).abs() < PARITY_TOLERANCE {
        Parity::Even
    } else if (overlap + 1.0).abs() < PARITY_TOLERANCE {
        Parity::Odd
    } else {
        Parity::Indefinite
    }
}

/// ‖Hφ − Eφ‖ in the grid norm for a grid-normalized φ.
fn residual(disc: &Discretized, f: &[f64], e: f64) -> f64 {
    let a = disc.hopping;
    let m = disc.potential.len();
    let mut sum = 0.0;
    for i in 0..m {
        let node = i + 1;
        let hf = (2.0 * a + disc.potential[i]) * f[node] - a * (f[node - 1] + f[node + 1]);
        sum += (hf - e * f[node]).powi(2);
    }
    let h_norm = f.iter().map(|x| x * x).sum::<f64>();
    (sum / h_norm).sqrt()
}

/// Energies extrapolated from spacings h and h/2: (4E_{h/2} − E_h)/3.
pub fn richardson_energies(
    grid: &Grid,
    kinetic_coefficient: f64,
    potential: impl Fn(f64) -> f64,
    n_levels: usize,
) -> Result<Vec<f64>> {
    let coarse = solve_with(grid, kinetic_coefficient, &potential, n_levels, true)?;
    let fine = solve_with(
        &grid.refined(2),
        kinetic_coefficient,
        &potential,
        n_levels,
        true,
    )?;
    Ok(coarse
        .energies()
        .iter()
        .zip(fine.energies())
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect())
}

#[derive(Debug, Clone)]
pub struct ConvergenceLevel {
    pub grid: Grid,
    pub energies: Vec<f64>,
    /// E₁ − E₀.
    pub ground_splitting: f64,
    /// E₃ − E₂ when at least four levels were solved.
    pub excited_splitting: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Solves at 1×, 2× and 4× the base density.
    pub levels: Vec<ConvergenceLevel>,
    /// Per level: [E(1×) − E(2×), E(2×) − E(4×)].
    pub energy_drift: Vec<[f64; 2]>,
    /// Relative change of E₁ − E₀ between the two coarser and the two finer grids.
    pub ground_splitting_drift: [f64; 2],
    pub excited_splitting_drift: Option<[f64; 2]>,
    pub grid_too_coarse: bool,
}

impl ConvergenceReport {
    pub fn require_converged(&self) -> Result<()> {
        if self.grid_too_coarse {
            Err(Error::GridTooCoarse {
                drift: self.ground_splitting_drift[1],
            })
        } else {
            Ok(())
        }
    }

    /// Observed order p from the ratio of successive drifts of level `n`.
    pub fn observed_order(&self, n: usize) -> f64 {
        let [d1, d2] = self.energy_drift[n];
        (d1 / d2).abs().log2()
    }
}

pub fn convergence_study(
    base_grid: &Grid,
    kinetic_coefficient: f64,
    potential: impl Fn(f64) -> f64,
    n_levels: usize,
) -> Result<ConvergenceReport> {
    if n_levels < 2 {
        return Err(Error::InvalidParameter(
            "convergence study needs at least two levels".into(),
        ));
    }
    let levels = [1usize, 2, 4]
        .iter()
        .map(|&f| {
            let grid = base_grid.refined(f);
            let basis = solve_with(&grid, kinetic_coefficient, &potential, n_levels, true)?;
            let e = basis.energies().to_vec();
            Ok(ConvergenceLevel {
                grid,
                ground_splitting: e[1] - e[0],
                excited_splitting: (e.len() >= 4).then(|| e[3] - e[2]),
                energies: e,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let energy_drift = (0..n_levels)
        .map(|n| {
            [
                levels[0].energies[n] - levels[1].energies[n],
                levels[1].energies[n] - levels[2].energies[n],
            ]
        })
        .collect();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let ground_splitting_drift = [
        rel(levels[0].ground_splitting, levels[1].ground_splitting),
        rel(levels[1].ground_splitting, levels[2].ground_splitting),
    ];
    let excited_splitting_drift = match (
        levels[0].excited_splitting,
        levels[1].excited_splitting,
        levels[2].excited_splitting,
    ) {
        (Some(a), Some(b), Some(c)) => Some([rel(a, b), rel(b, c)]),
        _ => None,
    };
    Ok(ConvergenceReport {
        grid_too_coarse: ground_splitting_drift[1] > SPLITTING_DRIFT_LIMIT,
        levels,
        energy_drift,
        ground_splitting_drift,
        excited_splitting_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuarticPotential;
    use std::f64::consts::PI;

    fn reference_well() -> QuarticPotential {
        QuarticPotential::new(1.80487, 14.73360).unwrap()
    }

    fn reference_basis(n_levels: usize) -> SpectralBasis {
        let q = reference_well();
        let grid = Grid::symmetric(0.8, 4001).unwrap();
        solve_spectrum(
            &grid,
            units::kinetic_coefficient(1.1e-16),
            |x| q.relative(x),
            n_levels,
        )
        .unwrap()
    }

    #[test]
    fn harmonic_oracle() {
        let k = 2.0 * 1.80487;
        let kinetic = units::kinetic_coefficient(1e-16);
        let hw = (2.0 * kinetic * k).sqrt();
        let grid = Grid::symmetric(0.8, 4001).unwrap();
        let basis = solve_spectrum(&grid, kinetic, |x| 0.5 * k * x * x, 4).unwrap();
        for (n, e) in basis.energies().iter().enumerate() {
            let exact = hw * (n as f64 + 0.5);
            assert!(((e - exact) / exact).abs() < 1e-3, "{n}: {e} vs {exact}");
        }
    }

    #[test]
    fn box_oracle() {
        let kinetic = 1e-4;
        let grid = Grid::new(-0.5, 0.7, 2001).unwrap();
        let length = grid.x_max - grid.x_min;
        let basis = solve_spectrum(&grid, kinetic, |_| 0.0, 4).unwrap();
        for (i, e) in basis.energies().iter().enumerate() {
            let n = (i + 1) as f64;
            let exact = kinetic * (n * PI / length).powi(2);
            assert!(((e - exact) / exact).abs() < 5e-3, "{i}: {e} vs {exact}");
        }
        assert!(basis.parities().iter().all(|p| *p == Parity::Indefinite));
    }

    #[test]
    fn split_and_unsplit_routes_agree() {
        let q = reference_well();
        let grid = Grid::symmetric(0.8, 2001).unwrap();
        let k = units::kinetic_coefficient(1.1e-16);
        let a = solve_spectrum(&grid, k, |x| q.relative(x), 6).unwrap();
        let b = solve_spectrum_unsplit(&grid, k, |x| q.relative(x), 6).unwrap();
        for (x, y) in a.energies().iter().zip(b.energies()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        let ga = a.energies()[1] - a.energies()[0];
        let gb = b.energies()[1] - b.energies()[0];
        assert!(((ga - gb) / ga).abs() < 1e-5);
        for n in 0..6 {
            let overlap = a.inner(a.eigenfunction(n), b.eigenfunction(n)).abs();
            assert!((overlap - 1.0).abs() < 1e-6, "{n}: {overlap}");
        }
    }

    #[test]
    fn orthonormal_and_small_residual() {
        let basis = reference_basis(8);
        for i in 0..8 {
            for j in 0..8 {
                let g = basis.inner(basis.eigenfunction(i), basis.eigenfunction(j));
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((g - target).abs() < 1e-8, "({i},{j}) {g}");
            }
        }
        assert!(basis.residuals().iter().all(|r| *r <= RESIDUAL_TOLERANCE));
        assert!(basis.energies().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn parity_alternates_and_selects() {
        let basis = reference_basis(8);
        let expected = [Parity::Even, Parity::Odd, Parity::Even, Parity::Odd];
        assert_eq!(&basis.parities()[..4], &expected);
        for m in 0..8 {
            for n in 0..8 {
                let x = x_matrix_element(&basis, m, n).unwrap();
                assert_eq!(x, x_matrix_element(&basis, n, m).unwrap());
                if basis.parities()[m] == basis.parities()[n] {
                    assert!(x.abs() < 1e-8, "({m},{n}) {x}");
                }
            }
        }
    }

    #[test]
    fn gauge_and_localized_doublet() {
        let basis = reference_basis(4);
        let x01 = x_matrix_element(&basis, 0, 1).unwrap();
        assert!(x01 < 0.0);
        // Deep doublet: |⟨0|x|1⟩| sits near the well minimum 0.35.
        assert!(((x01.abs() - 0.35) / 0.35).abs() < 0.15, "{x01}");
        // (|0⟩ + |1⟩)/√2 lives on the left.
        let f: Vec<f64> = basis
            .eigenfunction(0)
            .iter()
            .zip(basis.eigenfunction(1))
            .map(|(a, b)| (a + b) / 2f64.sqrt())
            .collect();
        let grid = basis.grid();
        let left = grid.integrate(|i| if grid.x(i) < 0.0 { f[i] * f[i] } else { 0.0 });
        assert!(left > 0.99, "{left}");
    }

    #[test]
    fn doublet_structure() {
        let e = reference_basis(4).energies().to_vec();
        let (s10, s21, s32) = (e[1] - e[0], e[2] - e[1], e[3] - e[2]);
        assert!(s10 * 100.0 < s21 && s32 * 100.0 < s21);
        let ratio = s32 / s10;
        assert!((50.0..200.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn index_out_of_range() {
        let basis = reference_basis(2);
        assert!(matches!(
            x_matrix_element(&basis, 0, 2),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn rejects_unbounded_potential_and_bad_requests() {
        let grid = Grid::symmetric(0.8, 1001).unwrap();
        assert!(solve_spectrum(&grid, 1e-4, |x| 1.0 / x, 2).is_err());
        assert!(solve_spectrum(&grid, 1e-4, |_| 0.0, 0).is_err());
        assert!(solve_spectrum(&grid, -1.0, |_| 0.0, 2).is_err());
    }

    #[test]
    fn second_order_convergence_on_box() {
        // Discrete box levels are E_h = (4K/h²) sin²(kh/2), whose expansion
        // K k²(1 − (kh)²/12 + …) gives the O(h²) drift model below.
        let kinetic = 1e-4;
        let grid = Grid::new(-0.6, 0.6, 501).unwrap();
        let report = convergence_study(&grid, kinetic, |_| 0.0, 3).unwrap();
        let length = 1.2;
        for n in 0..3 {
            let k = (n + 1) as f64 * PI / length;
            let h = grid.spacing();
            let predicted = -kinetic * k.powi(4) * h * h / 12.0 * 0.75;
            let drift = report.energy_drift[n][0];
            let ratio = drift / predicted;
            assert!(
                (0.5..2.0).contains(&ratio),
                "{n}: drift {drift} predicted {predicted}"
            );
            let p = report.observed_order(n);
            assert!((p - 2.0).abs() < 0.01, "order {p}");
        }
    }

    #[test]
    fn reference_convergence_study_is_converged() {
        let q = reference_well();
        let grid = Grid::symmetric(0.8, 501).unwrap();
        let report = convergence_study(
            &grid,
            units::kinetic_coefficient(1.1e-16),
            |x| q.relative(x),
            4,
        )
        .unwrap();
        // Second-order drift of E₀ falls by ~4x per doubling.
        let p = report.observed_order(0);
        assert!((p - 2.0).abs() < 0.05, "{p}");
        assert!(report.ground_splitting_drift[1] < SPLITTING_DRIFT_LIMIT);
        assert!(report.require_converged().is_ok());
    }

    #[test]
    fn unresolved_wells_are_flagged() {
        // 501 points across [-8, 8]: the wells at ±0.35 get ~22 nodes each.
        let q = reference_well();
        let grid = Grid::symmetric(8.0, 501).unwrap();
        let k = units::kinetic_coefficient(1.1e-16);
        let report = convergence_study(&grid, k, |x| q.relative(x).min(1.0), 4).unwrap();
        assert!(
            report.grid_too_coarse,
            "{:?}",
            report.ground_splitting_drift
        );
        assert!(matches!(
            report.require_converged(),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn richardson_improves_box_levels() {
        let kinetic = 1e-4;
        let grid = Grid::new(-0.6, 0.6, 501).unwrap();
        let plain = solve_spectrum(&grid, kinetic, |_| 0.0, 2).unwrap();
        let extrapolated = richardson_energies(&grid, kinetic, |_| 0.0, 2).unwrap();
        let exact = kinetic * (PI / 1.2).powi(2);
        assert!((extrapolated[0] - exact).abs() < 0.01 * (plain.energies()[0] - exact).abs());
    }

    #[test]
    fn level_set_truncation() {
        let levels = reference_basis(6).levels().truncated(4);
        assert_eq!(levels.n_levels(), 4);
        assert_eq!(levels.x_matrix().nrows(), 4);
        let t = levels.tunneling_period();
        assert!((t - units::PLANCK_H / levels.gap(1, 0)).abs() / t < 1e-9);
    }
}
