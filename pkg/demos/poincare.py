"""Stroboscopic sections of the mean-field amplitude, chaotic and regular.

Strong slow Kerr modulation spreads the section over a folded region; weak
fast modulation collapses it to a single point locked to the drive.

    python demos/poincare.py [--points N] [--out DIR]
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from kerrmod import semiclassical
from kerrmod.model import OscillatorParams

parser = argparse.ArgumentParser()
parser.add_argument("--points", type=int, default=5000)
parser.add_argument("--out", default=".")
args = parser.parse_args()

chaotic = OscillatorParams(delta=-5.0, chi0=0.2, chi1=0.15, mod_freq_chi=3.0, f0=10.0)
regular = chaotic.with_(chi1=0.01, mod_freq_chi=30.0)

fig, axes = plt.subplots(1, 2, figsize=(9, 4))
for ax, (name, p) in zip(axes, (("chaotic", chaotic), ("regular", regular))):
    sec = semiclassical.poincare_section(0j, p, args.points, 0.0, 50.0)
    print(f"{name}: bounding-box area {sec.bounding_box_area():.3g}")
    ax.plot(sec.points[:, 0], sec.points[:, 1], ",k" if name == "chaotic" else "ok")
    ax.set_title(f"{name} ({args.points} points)")
    ax.set_xlabel("Re alpha")
    ax.set_ylabel("Im alpha")
fig.tight_layout()
Path(args.out).mkdir(parents=True, exist_ok=True)
fig.savefig(Path(args.out) / "poincare.png", dpi=120)
