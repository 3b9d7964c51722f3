"""Lossless Kerr evolution of a coherent state into a two-component cat.

The Kerr strength is modulated slowly, so the accumulated phase reaches
pi/2 at t close to pi/3.  Plots the Wigner function there and prints its
negativity.

    python demos/cat_state.py [--out DIR]
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from kerrmod import analytic, wigner

parser = argparse.ArgumentParser()
parser.add_argument("--out", default=".")
args = parser.parse_args()

spec = analytic.UnitaryKerrSpec(alpha0=2, chi0=1.0, chi1=0.5, delta_mod=1e-3, phase_chi=np.pi / 2)
t = analytic.superposition_time(spec)
rho = analytic.unitary_density_matrix(t, spec)
g = wigner.wigner_from_rho(rho, (-4.5, 4.5, -4.5, 4.5, 201, 201), t=t)
w_min, neg_volume = wigner.negativity(g)
print(f"phi = pi/2 at t = {t:.6f}; min W = {w_min:.4f}, negative volume = {neg_volume:.4f}")

fig, ax = plt.subplots(figsize=(5, 4.5))
cs = ax.contourf(g.x, g.y, g.values.T, levels=40, cmap="RdBu_r",
                 vmin=-abs(g.values).max(), vmax=abs(g.values).max())
fig.colorbar(cs, ax=ax, label="W")
ax.set_xlabel("x")
ax.set_ylabel("y")
ax.set_title(f"Kerr cat at t = {t:.4f}")
fig.tight_layout()
Path(args.out).mkdir(parents=True, exist_ok=True)
fig.savefig(Path(args.out) / "cat_state.png", dpi=120)
