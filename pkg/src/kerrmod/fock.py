"""Truncated Fock-space states and ladder-operator actions.

States are plain complex numpy arrays whose last axis runs over the number
basis |0>, ..., |dim-1>.  Every function here also accepts a stack of states
(shape ``(..., dim)``), which is how the trajectory integrator batches work.
"""

import warnings

import numpy as np
from scipy.special import gammaln

from .errors import InvalidParameterError

#: Number of top basis states whose population counts as "tail mass".
TAIL_BAND = 5
#: Default tail-mass threshold above which simulations abort.
TAIL_THRESHOLD = 1e-6


def basis(dim, n):
    """Number state |n> in a basis of size ``dim``."""
    if not 0 <= n < dim:
        raise InvalidParameterError(f"Fock index {n} outside basis of size {dim}")
    s = np.zeros(dim, dtype=complex)
    s[n] = 1.0
    return s


def normalize(s):
    norm = np.sqrt(np.sum(np.abs(s) ** 2, axis=-1, keepdims=True))
    return s / norm


def recommended_dim(mean_n):
    """Basis size heuristic ``<n> + 8 sqrt(<n>) + 10``."""
    mean_n = max(float(mean_n), 0.0)
    return int(np.ceil(mean_n + 8.0 * np.sqrt(mean_n) + 10.0))


def coherent_amplitudes(alpha0, dim):
    """Unnormalized coherent-state amplitudes ``e^{-|a|^2/2} a^n / sqrt(n!)``.

    Evaluated in log space so large ``|alpha0|`` and ``dim`` do not overflow.
    """
    n = np.arange(dim)
    alpha0 = complex(alpha0)
    if alpha0 == 0:
        amp = np.zeros(dim, dtype=complex)
        amp[0] = 1.0
        return amp
    r, phi = abs(alpha0), np.angle(alpha0)
    logmag = -0.5 * r * r + n * np.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * phi * n)


def coherent_state(alpha0, dim):
    """Coherent state |alpha0>, renormalized over the truncated basis."""
    alpha0 = complex(alpha0)
    if not np.isfinite(alpha0.real) or not np.isfinite(alpha0.imag):
        raise InvalidParameterError(f"non-finite coherent amplitude {alpha0!r}")
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    a = abs(alpha0)
    if a * a + 6 * a + 10 > dim:
        warnings.warn(
            f"dim={dim} is small for |alpha0|={a:.3g}; truncation tail may be "
            "significant",
            RuntimeWarning,
            stacklevel=2,
        )
    return normalize(coherent_amplitudes(alpha0, dim))


def apply_lowering(s):
    """a|s>: ``out[n] = sqrt(n+1) s[n+1]``, top bin set to zero."""
    s = np.asarray(s)
    dim = s.shape[-1]
    out = np.zeros_like(s, dtype=complex)
    out[..., :-1] = np.sqrt(np.arange(1, dim)) * s[..., 1:]
    return out


def apply_raising(s, return_leakage=False):
    """a^+|s>: ``out[n+1] = sqrt(n+1) s[n]``.

    The component that would land on |dim> is dropped.  With
    ``return_leakage`` the squared norm of that dropped component is returned
    alongside the result.
    """
    s = np.asarray(s)
    dim = s.shape[-1]
    out = np.zeros_like(s, dtype=complex)
    out[..., 1:] = np.sqrt(np.arange(1, dim)) * s[..., :-1]
    if return_leakage:
        leak = dim * np.abs(s[..., -1]) ** 2
        return out, leak
    return out


def apply_number(s):
    s = np.asarray(s)
    return np.arange(s.shape[-1]) * s


def moments(s):
    """Return ``(<n>, <n^2>)`` for a normalized state (or stack of states)."""
    p = np.abs(np.asarray(s)) ** 2
    n = np.arange(p.shape[-1])
    return np.sum(n * p, axis=-1), np.sum(n * n * p, axis=-1)


def tail_mass(s, band=TAIL_BAND):
    """Population of the top ``band`` basis states.

    The band is capped at a quarter of the basis so tiny test bases are not
    all tail.
    """
    p = np.abs(np.asarray(s)) ** 2
    band = max(1, min(band, p.shape[-1] // 4))
    return np.sum(p[..., -band:], axis=-1)


def expect_lowering(s):
    """<s|a|s> for normalized states."""
    s = np.asarray(s)
    dim = s.shape[-1]
    return np.sum(np.conj(s[..., :-1]) * np.sqrt(np.arange(1, dim)) * s[..., 1:], axis=-1)
