"""Plain-text emission of simulation results.

Floats are written with 17 significant digits so files round-trip exactly and
reruns can be compared byte for byte.
"""

import json

import numpy as np


def fmt(x):
    x = float(x)
    if np.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")


def read_csv(path):
    """Return ``(header, float array)``; non-numeric cells become NaN."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = []
        for line in fh:
            cells = line.strip().split(",")
            rows.append([_num(c) for c in cells])
    return header, np.array(rows, dtype=float)


def _num(c):
    try:
        return float(c)
    except ValueError:
        return np.nan


def write_stats(path, stats):
    """Ensemble statistics as CSV with columns ``t, mean_n, se_n, q``."""
    rows = zip(stats.times, stats.mean_n, stats.se_n, stats.q)
    write_csv(path, ["t", "mean_n", "se_n", "q"], rows)


def write_density(path, rho):
    """Density matrix as NDJSON, one ``{"n", "m", "re", "im"}`` object per entry, row-major."""
    rho = np.asarray(rho)
    with open(path, "w", newline="\n") as fh:
        for i in range(rho.shape[0]):
            for j in range(rho.shape[1]):
                z = rho[i, j]
                fh.write(f'{{"n": {i}, "m": {j}, "re": {fmt(z.real)}, "im": {fmt(z.imag)}}}\n')


def read_density(path):
    entries = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                entries.append(json.loads(line))
    dim = max(e["n"] for e in entries) + 1
    rho = np.zeros((dim, dim), dtype=complex)
    for e in entries:
        rho[e["n"], e["m"]] = complex(e["re"], e["im"])
    return rho


def write_wigner_csv(path, g):
    """Wigner samples as CSV rows ``x, y, w``."""
    xs, ys = g.x, g.y
    rows = ((xs[i], ys[j], g.values[i, j]) for i in range(g.nx) for j in range(g.ny))
    write_csv(path, ["x", "y", "w"], rows)


def write_wigner_matrix(path, g):
    """gnuplot ``nonuniform matrix`` block: first row holds the y values."""
    with open(path, "w", newline="\n") as fh:
        fh.write(" ".join([fmt(g.nx)] + [fmt(y) for y in g.y]) + "\n")
        for i, x in enumerate(g.x):
            fh.write(" ".join([fmt(x)] + [fmt(w) for w in g.values[i]]) + "\n")


def negativity_record(min_value, neg_volume, t):
    return json.dumps({"min": float(min_value), "neg_volume": float(neg_volume), "t": t})


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
