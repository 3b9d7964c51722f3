"""Closed-form lossless, undriven dynamics with a time-modulated Kerr term.

With no drive and no damping the number operator is conserved, and a coherent
state |alpha0> evolves into

    |psi(t)> = sum_n c_n e^{-i phi(t) n^2} |n>,    phi(t) = int_0^t chi(tau) dtau,

where ``c_n`` are the coherent amplitudes.  At ``phi = pi/2`` the state is a
superposition of two coherent states, the standard Kerr cat.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import fock
from .errors import InvalidParameterError, NoSuperpositionTimeError


@dataclass(frozen=True)
class UnitaryKerrSpec:
    alpha0: complex = 2.0
    chi0: float = 1.0
    chi1: float = 0.0
    delta_mod: float = 0.0
    phase_chi: float = 0.0
    dim: int = 40

    def __post_init__(self):
        object.__setattr__(self, "alpha0", complex(self.alpha0))
        if self.chi1 > 0 and self.delta_mod <= 0:
            raise InvalidParameterError("modulated chi needs delta_mod > 0")
        a = abs(self.alpha0)
        if a * a + 6 * a + 10 > self.dim:
            raise InvalidParameterError(
                f"dim={self.dim} too small for a coherent state of amplitude {a:.3g}"
            )


def phase_accum(t, spec):
    """``phi(t) = chi0 t - (chi1/delta)[cos(delta t + phase) - cos(phase)]``."""
    if spec.chi1 == 0:
        return spec.chi0 * t
    w, ph = spec.delta_mod, spec.phase_chi
    return spec.chi0 * t - spec.chi1 / w * (np.cos(w * t + ph) - math.cos(ph))


def unitary_state(t, spec):
    n = np.arange(spec.dim)
    c = fock.coherent_state(spec.alpha0, spec.dim)
    return c * np.exp(-1j * phase_accum(t, spec) * n * n)


def unitary_density(n, m, t, spec):
    """Matrix element ``rho_nm(t)`` for a real initial amplitude.

    ``e^{-|a|^2} |a|^{n+m} / sqrt(n! m!) e^{i phi(t)(m^2 - n^2)}``, the sign of
    the phase following from ``rho_nm = <n|psi><psi|m>``.
    """
    a = abs(spec.alpha0)
    if a == 0:
        return complex(n == 0 and m == 0)
    logmag = -a * a + (n + m) * math.log(a) - 0.5 * (gammaln(n + 1) + gammaln(m + 1))
    return complex(math.exp(logmag) * np.exp(1j * phase_accum(t, spec) * (m * m - n * n)))


def unitary_density_matrix(t, spec):
    s = unitary_state(t, spec)
    return np.outer(s, s.conj())


def superposition_time(spec, target=math.pi / 2, n_scan=10_000):
    """Earliest ``t > 0`` with ``phi(t) = target`` (pi/2 gives the two-component cat).

    Scans ``[0, 10 pi / chi0]`` for the first sign change and bisects it to
    1e-10.
    """
    if spec.chi0 <= 0:
        raise InvalidParameterError("superposition time needs chi0 > 0")
    t_max = 10 * math.pi / spec.chi0
    ts = np.linspace(0.0, t_max, n_scan + 1)
    g = phase_accum(ts, spec) - target
    idx = np.nonzero((g[:-1] < 0) & (g[1:] >= 0))[0]
    if idx.size == 0:
        raise NoSuperpositionTimeError(f"phi(t) never reaches {target} before t={t_max:.4g}")
    lo, hi = ts[idx[0]], ts[idx[0] + 1]
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if phase_accum(mid, spec) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
