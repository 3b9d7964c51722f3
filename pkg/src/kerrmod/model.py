"""The time-modulated driven, damped Kerr (Duffing) oscillator.

All rates are measured in units of the decay rate, so the canonical choice is
``gamma = 1`` and times are the dimensionless ``gamma * t``.  The Hamiltonian
in the frame rotating at the drive frequency is

    H(t) = delta n + chi(t) n^2 + f(t) (a^+ + a),

with ``chi(t) = chi0 + chi1 sin(mod_freq_chi t + phase_chi)`` and
``f(t) = f0 + f1 sin(mod_freq_f t)``.  The bath enters through the jump
operators ``sqrt((nbar+1) gamma) a`` and ``sqrt(nbar gamma) a^+``.
"""

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import fock
from .errors import InvalidParameterError


@dataclass(frozen=True)
class OscillatorParams:
    delta: float = 0.0
    chi0: float = 0.0
    chi1: float = 0.0
    mod_freq_chi: float = 0.0
    phase_chi: float = 0.0
    f0: float = 0.0
    f1: float = 0.0
    mod_freq_f: float = 0.0
    gamma: float = 1.0
    nbar: float = 0.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InvalidParameterError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.gamma <= 0:
            raise InvalidParameterError(f"gamma must be > 0, got {self.gamma}")
        for name in ("chi0", "chi1", "mod_freq_chi", "f0", "f1", "mod_freq_f", "nbar"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def time_dependent(self):
        return (self.chi1 != 0 and self.mod_freq_chi != 0) or (
            self.f1 != 0 and self.mod_freq_f != 0
        )

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)


def chi_at(t, p):
    """Kerr strength ``chi0 + chi1 sin(mod_freq_chi t + phase_chi)``."""
    return p.chi0 + p.chi1 * np.sin(p.mod_freq_chi * t + p.phase_chi)


def drive_at(t, p):
    """Drive amplitude ``f0 + f1 sin(mod_freq_f t)`` (real, no phase offset)."""
    return p.f0 + p.f1 * np.sin(p.mod_freq_f * t)


def diagonal_energies(dim, t, p):
    """Diagonal of ``delta n + chi(t) n^2`` over the truncated basis."""
    n = np.arange(dim, dtype=float)
    return p.delta * n + chi_at(t, p) * n * n


def apply_hamiltonian(s, t, p):
    """H(t)|s>, built from the ladder-operator primitives.

    The drive is real, so ``f a^+ + f^* a`` is just ``f (a^+ + a)``.
    """
    s = np.asarray(s, dtype=complex)
    f = drive_at(t, p)
    out = diagonal_energies(s.shape[-1], t, p) * s
    if f != 0:
        out = out + f * (fock.apply_raising(s) + fock.apply_lowering(s))
    return out


def hamiltonian_matrix(dim, t, p):
    """Dense H(t) in the truncated basis."""
    h = np.diag(diagonal_energies(dim, t, p)).astype(complex)
    off = drive_at(t, p) * np.sqrt(np.arange(1, dim))
    h += np.diag(off, -1) + np.diag(off, 1)
    return h


def lindblad_coeffs(p):
    """Prefactors ``(c1, c2)`` with ``L1 = c1 a`` and ``L2 = c2 a^+``."""
    return math.sqrt((p.nbar + 1.0) * p.gamma), math.sqrt(p.nbar * p.gamma)


def lowering_matrix(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def lindblad_matrices(dim, p):
    """Dense jump operators; the thermal one is omitted when ``nbar == 0``."""
    c1, c2 = lindblad_coeffs(p)
    a = lowering_matrix(dim)
    ops = [c1 * a]
    if c2 > 0:
        ops.append(c2 * a.conj().T)
    return ops
