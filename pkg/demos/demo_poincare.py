"""Poincare sections of the Pullen-Edmonds oscillator, classical versus the
renormalized action at temperature tau = 1 (duration T = 1).

The potential v2 (x^2 + y^2) + v22 x^2 y^2 is a standard mixed-phase-space
system: at E = 20 regular islands coexist with a chaotic sea. Sections are
taken on the y = 0 plane with upward crossings, landing on the plane exactly
via a final integration step that uses y as the independent variable.

Runs in roughly a minute (the renormalized-action fit dominates).
"""

from pathlib import Path

from qaction import (ActionSpec, FitConfig, Potential2D, amplitude_table,
                     default_boundary_2d, default_grid, fit_quantum_action,
                     poincare_section, sample_energy_shell)
from qaction.dynamics import classify_chaos
from qaction.svgplot import scatter_svg

OUT = Path(__file__).resolve().parent / "output"
OUT.mkdir(exist_ok=True)

pullen_edmonds = ActionSpec(mass=1.0, potential=Potential2D(v2=0.5, v22=0.05))
E = 20.0

states = sample_energy_shell(pullen_edmonds, E, 16, seed=42)
section = poincare_section(pullen_edmonds, states, E, n_crossings=250)
_ests, verdicts = classify_chaos(pullen_edmonds, states, t_max=500.0)
print(f"classical E={E}: {sum(verdicts)}/{len(verdicts)} initial conditions chaotic")
section.to_csv(OUT / "section_classical.csv")
scatter_svg(OUT / "section_classical.svg",
            [{"x": arr[:, 0], "y": arr[:, 1]} for arr in section.crossings],
            title=f"classical section, E={E:g}", xlabel="x", ylabel="px")

# renormalized action at tau = 1 (T = 1); coarser lattice keeps the demo quick
tau = 1.0
grid = default_grid(2)
table = amplitude_table(pullen_edmonds, grid, 1.0 / tau, default_boundary_2d())
fit = fit_quantum_action(table, pullen_edmonds, FitConfig())
print(f"renormalized action at tau={tau:g}: {fit.parameters()} (rms {fit.residual_rms:.1e})")

quantum = fit.quantum_action
q_states = sample_energy_shell(quantum, E, 16, seed=42)
q_section = poincare_section(quantum, q_states, E, n_crossings=250)
q_section.to_csv(OUT / "section_quantum.csv")
scatter_svg(OUT / "section_quantum.svg",
            [{"x": arr[:, 0], "y": arr[:, 1]} for arr in q_section.crossings],
            title=f"renormalized-action section, E={E:g}, tau={tau:g}",
            xlabel="x", ylabel="px")
print(f"wrote sections to {OUT}")
