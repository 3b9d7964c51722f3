"""Mean-field amplitude dynamics of the modulated Kerr oscillator.

The classical limit of the master equation for ``alpha = Tr(rho a)`` is

    d alpha/dt = -(gamma/2) alpha - i (delta + chi(t)(1 + 2|alpha|^2)) alpha - i f(t)

with the same modulation laws as the quantum model.  This module integrates
it, samples stroboscopic (Poincare) sections, sweeps the drive to expose
hysteresis, and applies the amplitude-scaling map between parameter sets.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import root

from .errors import ConvergenceError, InvalidParameterError, StiffnessError, StrobeUndefinedError
from .model import chi_at, drive_at

RTOL = 1e-9


@dataclass
class PoincareSection:
    points: np.ndarray  # shape (n, 2): (Re alpha, Im alpha)
    strobe_period: float
    t0: float
    discarded_transient: float
    times: np.ndarray = field(default=None)

    def bounding_box_area(self):
        if len(self.points) == 0:
            return 0.0
        span = self.points.max(axis=0) - self.points.min(axis=0)
        return float(span[0] * span[1])

    def diameter(self):
        if len(self.points) < 2:
            return 0.0
        d = self.points[:, None, :] - self.points[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())


def mean_field_rhs(alpha, t, p):
    chi = chi_at(t, p)
    return -0.5 * p.gamma * alpha - 1j * (p.delta + chi * (1 + 2 * abs(alpha) ** 2)) * alpha - 1j * drive_at(t, p)


def _real_rhs(p):
    g2, delta = 0.5 * p.gamma, p.delta
    chi0, chi1, wc, ph = p.chi0, p.chi1, p.mod_freq_chi, p.phase_chi
    f0, f1, wf = p.f0, p.f1, p.mod_freq_f

    def rhs(t, y):
        x, v = y
        chi = chi0 + chi1 * math.sin(wc * t + ph)
        f = f0 + f1 * math.sin(wf * t)
        w = delta + chi * (1 + 2 * (x * x + v * v))
        # d(x + i v)/dt = -g2 (x + i v) - i w (x + i v) - i f
        return [-g2 * x + w * v, -g2 * v - w * x - f]

    return rhs


def _solve(p, alpha0, t_span, t_eval=None, rtol=RTOL):
    a = complex(alpha0)
    sol = solve_ivp(
        _real_rhs(p),
        t_span,
        [a.real, a.imag],
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=rtol * 1e-3,
    )
    if sol.status != 0:
        raise StiffnessError(f"mean-field integration failed: {sol.message}")
    return sol


def integrate_mean_field(alpha0, t_grid, p, rtol=RTOL, t_start=None):
    """Complex amplitude at each time in ``t_grid``.

    Integration starts from ``alpha0`` at ``t_start`` (default: the first grid
    time).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    t0 = float(t_grid[0]) if t_start is None else float(t_start)
    if t_grid[-1] == t0:
        return np.full(len(t_grid), complex(alpha0))
    sol = _solve(p, alpha0, (t0, float(t_grid[-1])), t_eval=t_grid, rtol=rtol)
    return sol.y[0] + 1j * sol.y[1]


def strobe_period(p):
    """Period of the active modulation channel."""
    chi_on = p.chi1 > 0 and p.mod_freq_chi > 0
    f_on = p.f1 > 0 and p.mod_freq_f > 0
    if chi_on and f_on:
        t_chi, t_f = 2 * math.pi / p.mod_freq_chi, 2 * math.pi / p.mod_freq_f
        if not math.isclose(t_chi, t_f, rel_tol=1e-12):
            raise StrobeUndefinedError("both channels modulated at different frequencies")
        return t_chi
    if chi_on:
        return 2 * math.pi / p.mod_freq_chi
    if f_on:
        return 2 * math.pi / p.mod_freq_f
    raise StrobeUndefinedError("no active modulation channel; stroboscopic period undefined")


def poincare_section(alpha0, p, n_points, t0=0.0, transient=0.0, rtol=RTOL):
    """Stroboscopic samples ``alpha(t0 + k T)`` after discarding ``t < transient``.

    The trajectory starts from ``alpha0`` at ``t0``.
    """
    period = strobe_period(p)
    k0 = max(0, math.ceil((transient - t0) / period - 1e-12))
    times = t0 + period * np.arange(k0, k0 + int(n_points))
    if n_points <= 0:
        return PoincareSection(np.empty((0, 2)), period, t0, transient, np.empty(0))
    # integrate period by period so dense output is never needed
    pts = np.empty((int(n_points), 2))
    t, y = t0, complex(alpha0)
    rhs = _real_rhs(p)
    state = [y.real, y.imag]
    targets = np.concatenate([[t0], times])
    for i in range(1, len(targets)):
        if targets[i] > targets[i - 1]:
            sol = solve_ivp(rhs, (targets[i - 1], targets[i]), state, method="DOP853",
                            rtol=rtol, atol=rtol * 1e-3)
            if sol.status != 0:
                raise StiffnessError(f"mean-field integration failed: {sol.message}")
            state = sol.y[:, -1]
        pts[i - 1] = state
    return PoincareSection(pts, period, t0, transient, times)


# --------------------------------------------------------------------------
# stationary analysis


def fixed_point_residual(intensity, p, f=None):
    """``f^2 - I[(gamma/2)^2 + (delta + chi(1 + 2I))^2]`` for constant parameters."""
    f = p.f0 if f is None else f
    I = np.asarray(intensity, dtype=float)
    return f * f - I * ((0.5 * p.gamma) ** 2 + (p.delta + p.chi0 * (1 + 2 * I)) ** 2)


def steady_states(p, f=None):
    """All stationary amplitudes of the unmodulated equation, lowest |alpha| first."""
    f = p.f0 if f is None else f
    g2, d, c = 0.5 * p.gamma, p.delta, p.chi0
    # I (g2^2 + (d + c + 2 c I)^2) = f^2, a cubic in I
    e = d + c
    coeffs = [4 * c * c, 4 * c * e, g2 * g2 + e * e, -f * f]
    if c == 0:
        roots = [f * f / (g2 * g2 + e * e)]
    else:
        roots = [r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-9 * max(1, abs(r)) and r.real >= 0]
    out = []
    for I in sorted(roots):
        out.append(-1j * f / (g2 + 1j * (d + c * (1 + 2 * I))))
    return out


def _stationary(p):
    if p.chi1 != 0 or p.f1 != 0:
        raise InvalidParameterError("hysteresis sweeps require chi1 = 0 and f1 = 0")


def relax(alpha0, p, t_max=200.0, tol=1e-8, chunk=10.0):
    """Integrate the stationary equation until ``|rhs| < tol`` and polish.

    Raises :class:`ConvergenceError` when ``t_max`` passes first.
    """
    _stationary(p)
    rhs = _real_rhs(p)
    state = [complex(alpha0).real, complex(alpha0).imag]
    t = 0.0
    while True:
        a = state[0] + 1j * state[1]
        if abs(mean_field_rhs(a, 0.0, p)) < tol:
            break
        if t >= t_max:
            raise ConvergenceError(f"no steady state within t = {t_max:g} (|rhs| = {abs(mean_field_rhs(a, 0.0, p)):.3g})")
        sol = solve_ivp(rhs, (t, t + chunk), state, method="DOP853", rtol=1e-11, atol=1e-13)
        state = sol.y[:, -1]
        t += chunk
    polished = root(lambda y: rhs(0.0, y), state, method="hybr", options={"xtol": 1e-14})
    if polished.success and np.hypot(*(polished.x - state)) < 1e-4:
        state = polished.x
    return complex(state[0], state[1])


def hysteresis_sweep(p, f_values, direction="up"):
    """Steady-state intensity ``|alpha|^2`` along an adiabatic drive sweep.

    Each drive value is seeded from the previous steady state.  The up sweep
    starts from the origin, the down sweep from the largest stationary
    amplitude at the top drive value, so each branch begins on its own
    attractor.  Returns ``[(f, intensity), ...]`` in ascending ``f`` order
    regardless of ``direction``.
    """
    _stationary(p)
    f_values = [float(f) for f in f_values]
    if any(b < a for a, b in zip(f_values, f_values[1:])):
        raise InvalidParameterError("f_values must be ascending")
    if direction not in ("up", "down"):
        raise InvalidParameterError(f"direction must be 'up' or 'down', got {direction!r}")
    order = f_values if direction == "up" else f_values[::-1]
    alpha = 0j
    if direction == "down" and order:
        alpha = steady_states(p, order[0])[-1]
    out = []
    for f in order:
        alpha = relax(alpha, p.with_(f0=f))
        out.append((f, abs(alpha) ** 2))
    return sorted(out)


# --------------------------------------------------------------------------
# scaling map


def scale_transform(p, lam):
    """Map parameters so that mean-field trajectories scale as ``alpha -> lam alpha``.

    ``delta' = delta + chi0 (1 - 1/lam^2)``, ``chi' = chi / lam^2`` and
    ``f' = lam f`` channel-wise, gamma unchanged.  The map is exact when chi is
    not modulated; with ``chi1 > 0`` the required detuning shift
    ``chi(t)(1 - 1/lam^2)`` is itself time dependent and only its mean is
    carried over.
    """
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0:
        raise InvalidParameterError(f"scaling factor must be finite and > 0, got {lam}")
    s = 1.0 / (lam * lam)
    return p.with_(
        delta=p.delta + p.chi0 * (1.0 - s),
        chi0=p.chi0 * s,
        chi1=p.chi1 * s,
        f0=p.f0 * lam,
        f1=p.f1 * lam,
    )
