"""Wigner functions of truncated density matrices.

Phase space is the complex amplitude plane ``alpha = x + i y`` with
``alpha = r e^{i theta}``; with this convention the vacuum Wigner function is
``(2/pi) exp(-2|alpha|^2)`` and integrates to one over ``dx dy``.  The
function is expanded as ``W = sum_{n,m} rho_nm W_mn(r, theta)`` where, for
``m >= n``,

    W_mn = (2/pi) (-1)^n sqrt(n!/m!) e^{i(m-n) theta} (2r)^{m-n} e^{-2r^2}
           L_n^{m-n}(4 r^2)

and ``W_nm = conj(W_mn)``.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import CorruptedDensityError

_RESCALE = 1e150


@dataclass
class WignerGrid:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int
    values: np.ndarray  # shape (nx, ny), values[i, j] at (x[i], y[j])
    dxdy: float
    t: float = None

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.nx

    @property
    def dy(self):
        return (self.y_max - self.y_min) / self.ny

    @property
    def x(self):
        return self.x_min + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y(self):
        return self.y_min + (np.arange(self.ny) + 0.5) * self.dy

    def integral(self):
        return float(np.sum(self.values) * self.dxdy)


def grid_for(mean_n, n=201, margin=5.0, center=0.0):
    """Square grid spec ``(x_min, x_max, y_min, y_max, nx, ny)`` covering
    ``|x|, |y| <= sqrt(<n>) + margin`` around ``center``."""
    half = np.sqrt(max(mean_n, 0.0)) + margin
    c = complex(center)
    return (c.real - half, c.real + half, c.imag - half, c.imag + half, n, n)


# --------------------------------------------------------------------------
# Laguerre machinery


def assoc_laguerre(n, k, x):
    """Associated Laguerre polynomial ``L_n^k(x)`` by upward recurrence in n."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 1.0 + k - x
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
    return cur


def _log_envelope(k, x):
    """log of ``x^{k/2} e^{-x/2} / sqrt(k!)`` (``-inf`` where it vanishes)."""
    k = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logx = np.log(x)
        kl = np.where(k == 0, 0.0, 0.5 * k * logx)
    return kl - 0.5 * x - 0.5 * gammaln(k + 1.0)


def _laguerre_functions(nmax, k, x):
    """Yield ``sqrt(n!/(n+k)!) x^{k/2} e^{-x/2} L_n^k(x)`` for n = 0..nmax.

    ``k`` and ``x`` broadcast against each other.  The three-term recurrence
    runs on scaled values with a running logarithmic exponent so neither the
    polynomial nor the Gaussian envelope can overflow or underflow.
    """
    k = np.asarray(k, dtype=float)
    x = np.asarray(x, dtype=float)
    k, x = np.broadcast_arrays(k, x)
    logscale = _log_envelope(k, x)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        yield cur * np.exp(logscale)
        for n in range(nmax):
            nxt = ((2 * n + k + 1 - x) * cur - np.sqrt(n * (n + k)) * prev) / np.sqrt(
                (n + 1) * (n + 1 + k)
            )
            prev, cur = cur, nxt
            big = np.abs(cur) > _RESCALE
            if np.any(big):
                s = np.where(big, np.abs(cur), 1.0)
                cur = cur / s
                prev = prev / s
                logscale = logscale + np.log(s)
            yield cur * np.exp(logscale)


def wigner_coeff(m, n, r, theta):
    """Phase-space coefficient ``W_mn(r, theta)`` of the operator |n><m|."""
    m, n = int(m), int(n)
    lo, k = min(m, n), abs(m - n)
    x = 4.0 * np.asarray(r, dtype=float) ** 2
    for j, val in enumerate(_laguerre_functions(lo, k, x)):
        if j == lo:
            break
    sign = -1.0 if lo % 2 else 1.0
    return (2.0 / np.pi) * sign * val * np.exp(1j * (m - n) * np.asarray(theta))


# --------------------------------------------------------------------------
# Wigner function on a grid


def wigner_at(rho, x, y, return_residue=False):
    """Wigner function of ``rho`` at points ``x + i y`` (any matching shapes)."""
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = x.shape
    xf, yf = x.ravel(), y.ravel()
    r2 = xf * xf + yf * yf
    u = 4.0 * r2
    with np.errstate(invalid="ignore"):
        phase = np.where(r2 > 0, (xf + 1j * yf) / np.sqrt(r2), 1.0)

    ks = np.arange(dim)
    # upper[k] accumulates sum_n (-1)^n rho[n, n+k] * v_n^k, lower[k] uses rho[n+k, n]
    upper = np.zeros((dim, u.size), dtype=complex)
    lower = np.zeros((dim, u.size), dtype=complex)
    gen = _laguerre_functions(dim - 1, ks[:, None], u[None, :])
    for n, vals in enumerate(gen):
        kmax = dim - n
        sign = -1.0 if n % 2 else 1.0
        up = sign * rho[n, n : n + kmax]
        lo = sign * rho[n : n + kmax, n]
        upper[:kmax] += up[:, None] * vals[:kmax]
        lower[:kmax] += lo[:, None] * vals[:kmax]

    total = upper[0].copy()
    ph = np.ones_like(phase)
    for k in range(1, dim):
        ph = ph * phase
        total += upper[k] * ph + lower[k] * ph.conj()
    total *= 2.0 / np.pi
    w = total.real.reshape(shape)
    if return_residue:
        return w, np.abs(total.imag).reshape(shape)
    return w


def wigner_from_rho(rho, grid=None, t=None, residue_tol=1e-8):
    """Sample the Wigner function of ``rho`` at the cell centres of a grid.

    ``grid`` is ``(x_min, x_max, y_min, y_max, nx, ny)``; the default is a
    201 x 201 grid sized from ``<n>``.
    """
    rho = np.asarray(rho, dtype=complex)
    if grid is None:
        mean_n = float(np.real(np.sum(np.arange(rho.shape[0]) * np.diag(rho))))
        grid = grid_for(mean_n)
    x_min, x_max, y_min, y_max, nx, ny = grid
    nx, ny = int(nx), int(ny)
    dx, dy = (x_max - x_min) / nx, (y_max - y_min) / ny
    xs = x_min + (np.arange(nx) + 0.5) * dx
    ys = y_min + (np.arange(ny) + 0.5) * dy
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    w, residue = wigner_at(rho, X, Y, return_residue=True)
    worst = float(residue.max())
    if worst > residue_tol:
        raise CorruptedDensityError(
            f"Wigner sum has imaginary residue {worst:.3g}; density matrix is not Hermitian"
        )
    return WignerGrid(x_min, x_max, y_min, y_max, nx, ny, w, dx * dy, t)


def wigner_direct(rho, alpha, n_nodes=120):
    """Wigner function at ``alpha`` from the coherent-state integral

        W(alpha) = (2/pi^2) e^{2|alpha|^2}
                   int d^2 beta <-beta|rho|beta> e^{-2(beta alpha^* - beta^* alpha)},

    evaluated with tensor Gauss-Hermite quadrature.  Independent of the
    Laguerre expansion, so it serves as a cross-check; the ``e^{2|alpha|^2}``
    prefactor amplifies quadrature error, so keep ``|alpha|`` below ~3.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    nodes, weights = np.polynomial.hermite.hermgauss(n_nodes)
    U, V = np.meshgrid(nodes, nodes, indexing="ij")
    Wt = np.outer(weights, weights).ravel()
    beta = (U + 1j * V).ravel()
    # P_n(z) = z^n / sqrt(n!), built by recurrence
    n = np.arange(dim)
    inv_sqrt = 1.0 / np.sqrt(np.maximum(n, 1))

    def powers(z):
        out = np.empty((dim, z.size), dtype=complex)
        out[0] = 1.0
        for j in range(1, dim):
            out[j] = out[j - 1] * z * inv_sqrt[j]
        return out

    p_plus = powers(beta)
    p_minus = powers(-beta)
    g = np.einsum("np,nm,mp->p", p_minus.conj(), rho, p_plus)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    out = np.empty(alpha.shape, dtype=float)
    for i, a in enumerate(alpha.ravel()):
        kernel = np.exp(-4j * np.imag(beta * np.conj(a)))
        val = np.sum(Wt * g * kernel)
        out.ravel()[i] = (2.0 / np.pi**2 * np.exp(2 * abs(a) ** 2) * val).real
    return out


# --------------------------------------------------------------------------
# derived quantities


def negativity(g):
    """``(min_value, neg_volume)``: smallest sample and integrated |W| where W < 0."""
    v = g.values
    neg = v[v < 0]
    return float(v.min()), float(np.sum(-neg) * g.dxdy)


def photon_distribution(rho):
    """Number distribution ``P_n = Re rho_nn``."""
    return np.real(np.diag(np.asarray(rho))).copy()


def quadrature_distribution(g, axis="x"):
    """Marginal of the Wigner function: P(x) (integrating over y) or P(y)."""
    v = g.values
    edge = max(np.abs(v[0]).max(), np.abs(v[-1]).max(), np.abs(v[:, 0]).max(), np.abs(v[:, -1]).max())
    if edge > 1e-6 * np.abs(v).max():
        warnings.warn(
            "Wigner grid does not cover the support; quadrature distribution is truncated",
            RuntimeWarning,
            stacklevel=2,
        )
    if axis == "x":
        return v.sum(axis=1) * g.dy
    if axis == "y":
        return v.sum(axis=0) * g.dx
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def local_maxima(values, min_separation=1, threshold=0.0):
    """Indices of strict local maxima of a 1-D or 2-D array above ``threshold``.

    In 2-D a point is a maximum when it exceeds every neighbour within
    ``min_separation`` cells (Chebyshev distance).
    """
    v = np.asarray(values, dtype=float)
    if v.ndim == 1:
        idx = []
        for i in range(len(v)):
            lo, hi = max(0, i - min_separation), min(len(v), i + min_separation + 1)
            window = np.delete(v[lo:hi], i - lo)
            if v[i] > threshold and np.all(v[i] > window):
                idx.append(i)
        return idx
    from scipy.ndimage import maximum_filter

    size = 2 * min_separation + 1
    mx = maximum_filter(v, size=size, mode="constant", cval=-np.inf)
    cand = np.argwhere((v == mx) & (v > threshold))
    return [tuple(c) for c in cand]
