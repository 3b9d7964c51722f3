"""Stationary drive sweep of the unmodulated oscillator at negative detuning.

Sweeps f up from zero and back down, prints the bistable window and plots
both branches of |alpha|^2 together with every root of the cubic
stationary condition.

    python demos/hysteresis.py [--out DIR]
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from kerrmod import semiclassical
from kerrmod.model import OscillatorParams

parser = argparse.ArgumentParser()
parser.add_argument("--out", default=".")
args = parser.parse_args()

p = OscillatorParams(delta=-13.02, chi0=0.08)
fs = np.linspace(0.0, 80.0, 161)
up = np.array([i for _, i in semiclassical.hysteresis_sweep(p, fs, "up")])
down = np.array([i for _, i in semiclassical.hysteresis_sweep(p, fs, "down")])
split = fs[np.abs(up - down) > 1e-3 * np.maximum(up, down)]
print(f"branches differ for f in [{split.min():.1f}, {split.max():.1f}]")

roots = [(f, abs(a) ** 2) for f in fs for a in semiclassical.steady_states(p, f)]
fig, ax = plt.subplots(figsize=(5.5, 4))
ax.plot(*zip(*roots), ".", color="0.7", ms=3, label="stationary roots")
ax.plot(fs, up, "-", label="up sweep")
ax.plot(fs, down, "--", label="down sweep")
ax.set_xlabel("f / gamma")
ax.set_ylabel("|alpha|^2")
ax.legend()
fig.tight_layout()
Path(args.out).mkdir(parents=True, exist_ok=True)
fig.savefig(Path(args.out) / "hysteresis.png", dpi=120)
