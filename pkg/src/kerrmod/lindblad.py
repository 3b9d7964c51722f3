"""Dense Lindblad master-equation integrator.

Slow and simple on purpose: it is the reference that the stochastic
trajectory ensembles are checked against, so it only ever runs at small
basis sizes.
"""

import numpy as np

from .errors import InvalidParameterError, StepSizeError
from .model import hamiltonian_matrix, lindblad_matrices

MAX_DIM = 64


def rho_derivative(rho, t, p, _ops=None):
    """Right-hand side of the master equation at time ``t``."""
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    h = hamiltonian_matrix(dim, t, p)
    ops = _ops if _ops is not None else _jump_ops(dim, p)
    out = -1j * (h @ rho - rho @ h)
    for L, Ld, LdL in ops:
        out += L @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)
    return out


def _jump_ops(dim, p):
    ops = []
    for L in lindblad_matrices(dim, p):
        Ld = L.conj().T
        ops.append((L, Ld, Ld @ L))
    return ops


def density_from_state(s):
    s = np.asarray(s, dtype=complex)
    return np.outer(s, s.conj())


def expect_number(rho):
    """``(<n>, <n^2>)`` of a density matrix."""
    pn = np.real(np.diag(rho))
    n = np.arange(len(pn))
    return float(np.sum(n * pn)), float(np.sum(n * n * pn))


def check_density(rho, herm_tol=1e-9, trace_tol=1e-8, eig_tol=1e-7):
    """Raise :class:`StepSizeError` unless ``rho`` is a valid density matrix."""
    herm = np.max(np.abs(rho - rho.conj().T))
    tr = abs(np.trace(rho) - 1.0)
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if herm > herm_tol or tr > trace_tol or lam < -eig_tol:
        raise StepSizeError(
            f"density matrix degraded (hermiticity {herm:.2g}, trace error {tr:.2g}, "
            f"min eigenvalue {lam:.2g}); reduce dt"
        )


def integrate_master(rho0, t_grid, p, dt=1e-3, max_dim=MAX_DIM, check=True):
    """Classical RK4 integration of the master equation from t = 0.

    Returns an array of density matrices, one per entry of ``t_grid``
    (ascending, non-negative).  Steps of ``dt`` are shortened so every output
    time is hit exactly.
    """
    rho = np.array(rho0, dtype=complex)
    dim = rho.shape[0]
    if dim > max_dim:
        raise InvalidParameterError(f"dim={dim} exceeds the dense-oracle guard {max_dim}")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) < 0) or t_grid[0] < 0:
        raise InvalidParameterError("t_grid must be ascending and non-negative")
    ops = _jump_ops(dim, p)

    def rhs(r, t):
        return rho_derivative(r, t, p, ops)

    out = np.empty((len(t_grid), dim, dim), dtype=complex)
    t = 0.0
    for k, t_out in enumerate(t_grid):
        while t < t_out - 1e-12:
            h = min(dt, t_out - t)
            k1 = rhs(rho, t)
            k2 = rhs(rho + 0.5 * h * k1, t + 0.5 * h)
            k3 = rhs(rho + 0.5 * h * k2, t + 0.5 * h)
            k4 = rhs(rho + h * k3, t + h)
            rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        t = t_out
        if check:
            check_density(rho)
        out[k] = rho
    return out
