//! Generated matplotlib scripts. They read the tables next to them and
//! write PNGs; nothing is displayed.

use std::fmt::Write as _;

const PRELUDE: &str = r##"import os
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def load(name, usecols=None):
    return np.loadtxt(os.path.join(HERE, name), comments="#", ndmin=2, usecols=usecols)

"##;

pub fn spectrum_script(n_eigenfunctions: usize) -> String {
    let mut s = String::from(PRELUDE);
    s.push_str(
        r#"
eig = load("eigenfunctions.tsv")
energies = load("energies.tsv", usecols=(0, 1, 2))
x, v = eig[:, 0], eig[:, 1]
fig, ax = plt.subplots(figsize=(7, 5))
ax.plot(x, v, "k-", lw=1.0, label="V - V0")
span = energies[:, 1].max() - v.min()
scale = 0.12 * span
"#,
    );
    let _ = writeln!(
        s,
        "for n in range(min({n_eigenfunctions}, eig.shape[1] - 2)):"
    );
    s.push_str(
        r#"    level = energies[n, 1]
    psi = eig[:, 2 + n]
    ax.axhline(level, color="0.8", lw=0.5)
    ax.plot(x, level + scale * psi / np.abs(psi).max(), lw=1.0, label=f"n={n}")
ax.set_ylim(v.min() - 0.2 * span, energies[:, 1].max() + 0.6 * span)
ax.set_xlabel("x")
ax.set_ylabel("energy (eV)")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(HERE, "spectrum.png"), dpi=150)
"#,
    );
    s
}

pub fn sweep_script(traces: &[(String, f64)]) -> String {
    let mut s = String::from(PRELUDE);
    s.push_str("TRACES = [\n");
    for (name, ratio) in traces {
        let _ = writeln!(s, "    ({name:?}, {ratio:.6e}),");
    }
    s.push_str(
        r#"]

fig, axes = plt.subplots(len(TRACES), 1, figsize=(7, 1.8 * len(TRACES)), sharex=True, squeeze=False)
for ax, (name, ratio) in zip(axes[:, 0], TRACES):
    d = load(name)
    ax.plot(d[:, 1], d[:, 2], lw=0.6)
    ax.set_ylabel("<x>")
    ax.set_title(f"kappa/kappa_crit_10 = {ratio:.3g}", fontsize=8)
axes[-1, 0].set_xlabel("t / T10")
fig.tight_layout()
fig.savefig(os.path.join(HERE, "sweep.png"), dpi=150)
"#,
    );
    s
}
