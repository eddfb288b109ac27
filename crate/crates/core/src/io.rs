//! '#'-commented, tab-separated text tables.

use std::io::{self, Write};

use crate::damping::DecayTable;
use crate::spectrum::{EnergyLevels, Parity, SpectralBasis};

fn parity_label(p: Parity) -> &'static str {
    match p {
        Parity::Even => "even",
        Parity::Odd => "odd",
        Parity::Indefinite => "indefinite",
    }
}

/// Columns: n, E_n (eV), E_n − E₀ (eV), parity.
pub fn write_energy_table<W: Write>(levels: &EnergyLevels, mut w: W) -> io::Result<()> {
    writeln!(w, "# n\tE_eV\tE_minus_E0_eV\tparity")?;
    let e0 = levels.energy(0);
    for (n, (e, p)) in levels.energies().iter().zip(levels.parities()).enumerate() {
        writeln!(w, "{n}\t{e:.12e}\t{:.12e}\t{}", e - e0, parity_label(*p))?;
    }
    Ok(())
}

/// Columns: x, V(x) − V₀, φ₀(x) … φ_{k−1}(x) for the first `k` levels.
pub fn write_eigenfunction_table<W: Write>(
    basis: &SpectralBasis,
    relative_potential: impl Fn(f64) -> f64,
    k: usize,
    mut w: W,
) -> io::Result<()> {
    let k = k.min(basis.n_levels());
    write!(w, "# x\tV_minus_V0_eV")?;
    for n in 0..k {
        write!(w, "\tphi_{n}")?;
    }
    writeln!(w)?;
    let grid = basis.grid();
    for i in 0..grid.n_points {
        let x = grid.x(i);
        write!(w, "{x:.9e}\t{:.12e}", relative_potential(x))?;
        for n in 0..k {
            write!(w, "\t{:.12e}", basis.eigenfunction(n)[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Columns: n, m, ω_nm (rad/s), T_nm (s), τ_nm (s), κ_crit_nm.
pub fn write_decay_table<W: Write>(table: &DecayTable, mut w: W) -> io::Result<()> {
    writeln!(w, "# kappa_E = {:.12e}", table.kappa_e)?;
    writeln!(w, "# n\tm\tomega_rad_s\tperiod_s\ttau_s\tkappa_crit")?;
    for e in &table.entries {
        writeln!(
            w,
            "{}\t{}\t{:.12e}\t{:.12e}\t{:.12e}\t{:.12e}",
            e.n, e.m, e.omega, e.period, e.tau, e.kappa_crit
        )?;
    }
    Ok(())
}
