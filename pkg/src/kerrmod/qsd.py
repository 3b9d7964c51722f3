"""Quantum-state-diffusion trajectories and their ensemble reduction.

Each trajectory obeys the Ito stochastic Schroedinger equation

    d psi = [-i H - sum_j (L_j^+ L_j / 2 - <L_j^+> L_j + <L_j^+><L_j> / 2)] psi dt
            + sum_j (L_j - <L_j>) psi dxi_j

with complex Wiener increments ``E[dxi dxi^*] = dt``.  The ensemble mean of
``|psi><psi|`` reproduces the Lindblad master equation.

:func:`qsd_step` is the textbook explicit Euler-Maruyama step.  Trajectory
runs use the same step with one change: the diagonal part of H
(``delta n + chi(t) n^2``) is integrated exactly, Strang-split around the
Euler-Maruyama update of everything else.  Without this the Kerr term, whose
spread ``chi n^2`` reaches 10^3 - 10^4 in the regimes of interest, would force
time steps far below 10^-3.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import fock
from .errors import (
    InvalidParameterError,
    StepFailureError,
    TruncationOverflowError,
    UndefinedQError,
)
from .model import apply_hamiltonian, chi_at, drive_at, lindblad_coeffs

#: Trajectories per work unit.  Fixed, so reductions never depend on workers.
BLOCK_SIZE = 50
#: Integration steps per batch of random numbers drawn from each stream.
NOISE_CHUNK = 2048
_NORM_FLOOR = 1e-8


# --------------------------------------------------------------------------
# configuration


def parse_initial_state(spec):
    """Normalize an initial-state description to ``(kind, value)``.

    Accepts ``"vacuum"``, ``"fock:3"``, ``"coherent:1+0.5j"`` or the
    equivalent tuples ``("fock", 3)`` / ``("coherent", 1+0.5j)``.
    """
    if isinstance(spec, str):
        kind, _, arg = spec.partition(":")
        kind = kind.strip().lower()
        arg = arg.strip()
    else:
        kind, arg = spec if len(spec) == 2 else (spec[0], None)
        kind = str(kind).lower()
    try:
        if kind == "vacuum":
            return ("vacuum", None)
        if kind == "fock":
            n = int(arg)
            if n < 0:
                raise ValueError
            return ("fock", n)
        if kind == "coherent":
            alpha = complex(arg.replace(" ", "")) if isinstance(arg, str) else complex(arg)
            return ("coherent", alpha)
    except (TypeError, ValueError):
        pass
    raise InvalidParameterError(f"unrecognized initial state {spec!r}")


def format_initial_state(state):
    kind, value = parse_initial_state(state)
    if kind == "vacuum":
        return "vacuum"
    if kind == "fock":
        return f"fock:{value}"
    return f"coherent:{value.real!r}{value.imag:+.17g}j"


def initial_vector(state, dim):
    kind, value = parse_initial_state(state)
    if kind == "vacuum":
        return fock.basis(dim, 0)
    if kind == "fock":
        return fock.basis(dim, value)
    return fock.coherent_state(value, dim)


@dataclass(frozen=True)
class TrajectoryConfig:
    dt: float = 1e-3
    t_end: float = 10.0
    sample_times: tuple = ()
    seed: int = 0
    initial_state: object = "vacuum"
    dim: int = 20
    tail_threshold: float = fock.TAIL_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "t_end", float(self.t_end))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "dim", int(self.dim))
        times = tuple(float(t) for t in self.sample_times)
        if not times:
            n = int(round(self.t_end / 0.1))
            times = tuple(round(0.1 * k, 12) for k in range(n + 1))
        object.__setattr__(self, "sample_times", times)
        object.__setattr__(self, "initial_state", parse_initial_state(self.initial_state))
        if not 0 < self.dt <= 1e-2:
            raise InvalidParameterError(f"dt must lie in (0, 1e-2], got {self.dt}")
        if self.dim < 2:
            raise InvalidParameterError(f"dim must be >= 2, got {self.dim}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidParameterError("sample_times must be strictly ascending")
        if times[0] < 0 or times[-1] > self.t_end + 1e-12:
            raise InvalidParameterError("sample_times must lie within [0, t_end]")
        if self.initial_state[0] == "fock" and self.initial_state[1] >= self.dim:
            raise InvalidParameterError("initial Fock state exceeds the basis size")

    def with_(self, **changes):
        return replace(self, **changes)


def strobe_times(t_first, period, t_end):
    """``t_first + k * period`` for all k >= 0 not exceeding ``t_end``."""
    k = np.arange(int(math.floor((t_end - t_first) / period + 1e-9)) + 1)
    return tuple(float(t) for t in t_first + period * k)


@dataclass
class EnsembleStats:
    times: np.ndarray
    mean_n: np.ndarray
    mean_n2: np.ndarray
    q: np.ndarray
    se_n: np.ndarray
    n_traj: int
    se_q: np.ndarray = field(default=None)

    def at(self, t):
        """Index of the sample closest to time ``t``."""
        return int(np.argmin(np.abs(self.times - t)))


# --------------------------------------------------------------------------
# single steps


def mandel_q(mean_n, mean_n2):
    """Mandel parameter ``(<n^2> - <n>^2 - <n>) / <n>``."""
    if not mean_n > 0:
        raise UndefinedQError(f"Mandel Q undefined for <n> = {mean_n}")
    return (mean_n2 - mean_n * mean_n - mean_n) / mean_n


def _mandel_q_series(mean_n, mean_n2):
    with np.errstate(invalid="ignore", divide="ignore"):
        q = (mean_n2 - mean_n**2 - mean_n) / mean_n
    return np.where(mean_n > 0, q, np.nan)


def _dissipative_terms(psi, c1, c2):
    """Drift and per-channel diffusion vectors for ``L1 = c1 a``, ``L2 = c2 a^+``."""
    a_psi = fock.apply_lowering(psi)
    ea = np.sum(psi.conj() * a_psi, axis=-1, keepdims=True)
    ea2 = np.abs(ea) ** 2
    n = np.arange(psi.shape[-1])
    drift = c1 * c1 * (ea.conj() * a_psi - 0.5 * n * psi - 0.5 * ea2 * psi)
    diff1 = c1 * (a_psi - ea * psi)
    diff2 = None
    if c2 > 0:
        ad_psi = fock.apply_raising(psi)
        drift = drift + c2 * c2 * (ea * ad_psi - 0.5 * (n + 1) * psi - 0.5 * ea2 * psi)
        diff2 = c2 * (ad_psi - ea.conj() * psi)
    return drift, diff1, diff2


def _renormalize(psi, t):
    norm = np.sqrt(np.sum(np.abs(psi) ** 2, axis=-1, keepdims=True))
    if np.any(norm < _NORM_FLOOR):
        raise StepFailureError(f"state norm collapsed at t={t:.6g}; reduce dt", time=t)
    return psi / norm


def qsd_step(s, t, dt, noise, p):
    """One explicit Euler-Maruyama step of the QSD equation, renormalized.

    ``noise`` holds the two complex Wiener increments ``(dxi_1, dxi_2)``
    (last axis of length 2 for batched states).  Expectations are taken in
    ``s``, which must be normalized.
    """
    psi = np.asarray(s, dtype=complex)
    noise = np.asarray(noise, dtype=complex)
    c1, c2 = lindblad_coeffs(p)
    drift, diff1, diff2 = _dissipative_terms(psi, c1, c2)
    out = psi + (-1j * apply_hamiltonian(psi, t, p) + drift) * dt
    out = out + diff1 * noise[..., 0:1]
    if diff2 is not None:
        out = out + diff2 * noise[..., 1:2]
    return _renormalize(out, t)


# --------------------------------------------------------------------------
# trajectory integration


def _time_grid(dt, stops):
    """Step boundaries from 0 to ``max(stops)`` at spacing ``dt``, hitting every stop exactly."""
    t_last = max(stops)
    n = int(math.floor(t_last / dt + 1e-9))
    grid = np.concatenate([dt * np.arange(n + 1), np.asarray(stops, dtype=float)])
    grid = np.unique(grid)
    # fold slivers left by floating-point rounding into their neighbour
    keep = np.concatenate([[True], np.diff(grid) > 1e-9 * max(dt, 1.0)])
    grid = grid[keep]
    for s in stops:
        grid[np.argmin(np.abs(grid - s))] = s
    return grid


def _kerr_phase(t0, t1, p):
    """Exact integral of ``chi`` over [t0, t1]."""
    w, ph = p.mod_freq_chi, p.phase_chi
    if p.chi1 == 0 or w == 0:
        return chi_at(t0, p) * (t1 - t0)
    return p.chi0 * (t1 - t0) - p.chi1 / w * (math.cos(w * t1 + ph) - math.cos(w * t0 + ph))


def _diag_propagator(dim, t0, t1, p):
    n = np.arange(dim, dtype=float)
    return np.exp(-1j * (p.delta * n * (t1 - t0) + _kerr_phase(t0, t1, p) * n * n))


def _noise_streams(seeds):
    return [np.random.Generator(np.random.Philox(key=int(s))) for s in seeds]


class _Integrator:
    """Split-step integrator for a batch of trajectories sharing one time grid."""

    def __init__(self, cfg, p, rho_times=()):
        self.cfg = cfg
        self.p = p
        self.c1, self.c2 = lindblad_coeffs(p)
        self.sample_times = np.asarray(cfg.sample_times)
        self.rho_times = np.asarray(sorted(rho_times), dtype=float)
        stops = list(cfg.sample_times) + list(self.rho_times)
        self.grid = _time_grid(cfg.dt, stops)
        self.sample_idx = np.searchsorted(self.grid, self.sample_times)
        self.rho_idx = np.searchsorted(self.grid, self.rho_times)
        self.dim = cfg.dim
        self.sqrt_n = np.sqrt(np.arange(1, self.dim))
        self.n = np.arange(self.dim, dtype=float)
        self._damp_cache = {}

    def run(self, seeds, on_rho=None):
        """Integrate one trajectory per seed.

        Returns per-trajectory ``(mean_n, mean_n2)`` arrays of shape
        ``(len(seeds), n_samples)``.  ``on_rho(i, states)`` receives the
        states at each density-matrix sample time.
        """
        cfg, p, grid = self.cfg, self.p, self.grid
        B, dim = len(seeds), self.dim
        psi = np.tile(initial_vector(cfg.initial_state, dim), (B, 1))
        streams = _noise_streams(seeds)
        n_samp = len(self.sample_times)
        mn = np.empty((B, n_samp))
        mn2 = np.empty((B, n_samp))
        is_sample = np.full(len(grid), -1)
        is_sample[self.sample_idx] = np.arange(n_samp)
        is_rho = {int(k): i for i, k in enumerate(self.rho_idx)}

        n_steps = len(grid) - 1
        two_channels = self.c2 > 0
        noise = None
        for k in range(n_steps + 1):
            t = grid[k]
            if is_sample[k] >= 0:
                j = is_sample[k]
                mn[:, j], mn2[:, j] = fock.moments(psi)
                self._check_tail(psi, t, seeds)
            if k in is_rho and on_rho is not None:
                on_rho(is_rho[k], psi)
            if k == n_steps:
                break
            c = k % NOISE_CHUNK
            if c == 0:
                size = min(NOISE_CHUNK, n_steps - k)
                noise = np.stack([g.standard_normal((size, 4)) for g in streams], axis=1)
            psi = self._step(psi, t, grid[k + 1], noise[c], two_channels)
        return mn, mn2

    def _check_tail(self, psi, t, seeds):
        tail = fock.tail_mass(psi)
        bad = np.nonzero(tail > self.cfg.tail_threshold)[0]
        if bad.size:
            i = int(bad[0])
            raise TruncationOverflowError(
                f"tail mass {tail[i]:.3g} exceeds {self.cfg.tail_threshold:g} at "
                f"t={t:.6g} (dim={self.dim}); increase dim",
                time=float(t),
                tail_mass=float(tail[i]),
                trajectory=i,
            )

    def _apply_x(self, psi):
        """(a + a^+) psi for a batch of states."""
        sq = self.sqrt_n
        out = np.empty_like(psi)
        out[:, :-1] = sq * psi[:, 1:]
        out[:, -1] = 0
        out[:, 1:] += sq * psi[:, :-1]
        return out

    def _drive_propagator(self, psi, theta):
        """Fourth-order Taylor approximation of ``exp(-i theta (a + a^+)) psi``."""
        out = psi
        term = psi
        for k in range(1, 5):
            term = (-1j * theta / k) * self._apply_x(term)
            out = out + term
        return out

    def _damping(self, h):
        """``exp(-h (c1^2 n + c2^2 (n + 1)) / 4)``, the diagonal part of a quarter of the drift."""
        d = self._damp_cache.get(h)
        if d is None:
            rate = self.c1 * self.c1 * self.n + self.c2 * self.c2 * (self.n + 1)
            d = np.exp(-0.25 * h * rate)
            self._damp_cache[h] = d
        return d

    def _lower(self, psi):
        out = np.zeros_like(psi)
        out[:, :-1] = self.sqrt_n * psi[:, 1:]
        return out

    def _raise(self, psi):
        out = np.zeros_like(psi)
        out[:, 1:] = self.sqrt_n * psi[:, :-1]
        return out

    def _step(self, psi, t0, t1, z, two_channels):
        # Symmetric split: half the Kerr/detuning phase and half the diagonal
        # damping, the drive, the off-diagonal drift plus noise, then the
        # other half.  The diagonal damping is exact, so coherent states stay
        # coherent and the deterministic part carries no O(dt) bias.
        #
        # Terms proportional to psi itself (-<L> psi dxi, -|<L>|^2 psi dt / 2)
        # only change norm and global phase, which renormalization discards.
        # Keeping them divides the rest of the increment by 1 - <L> dxi + ...,
        # which approaches zero when |<L>|^2 dt ~ 1 and amplifies the
        # unpopulated top of the basis.  Dropping them leaves the projector
        # dynamics unchanged to first order.
        p, dim = self.p, self.dim
        h = t1 - t0
        tm = 0.5 * (t0 + t1)
        damp = self._damping(h)
        psi = psi * (_diag_propagator(dim, t0, tm, p) * damp)
        f = drive_at(tm, p)
        if f != 0:
            psi = self._drive_propagator(psi, f * h)

        a_psi = self._lower(psi)
        norm2 = np.sum(np.abs(psi) ** 2, axis=1, keepdims=True)
        ea = np.sum(psi.conj() * a_psi, axis=1, keepdims=True) / norm2
        k1 = self.c1 * self.c1 * ea.conj()
        scale = math.sqrt(0.5 * h)
        dxi1 = (scale * (z[:, 0] + 1j * z[:, 1]))[:, None]
        if two_channels:
            k2 = self.c2 * self.c2 * ea
            ad_psi = self._raise(psi)
            kpsi = k1 * a_psi + k2 * ad_psi
            kkpsi = k1 * self._lower(kpsi) + k2 * self._raise(kpsi)
            dxi2 = (scale * (z[:, 2] + 1j * z[:, 3]))[:, None]
            noise = self.c1 * a_psi * dxi1 + self.c2 * ad_psi * dxi2
        else:
            kpsi = k1 * a_psi
            kkpsi = k1 * self._lower(kpsi)
            noise = self.c1 * a_psi * dxi1
        out = psi + h * kpsi + (0.5 * h * h) * kkpsi + noise
        out = out * (_diag_propagator(dim, tm, t1, p) * damp)
        return _renormalize(out, t0)


# --------------------------------------------------------------------------
# public drivers


def run_trajectory(cfg, p, want_state=False):
    """Integrate a single trajectory seeded with ``cfg.seed``.

    Returns ``(mean_n, mean_n2)`` over ``cfg.sample_times``, plus the list of
    states at those times when ``want_state`` is set.
    """
    integ = _Integrator(cfg, p, rho_times=cfg.sample_times if want_state else ())
    states = []

    def grab(i, psi):
        states.append(psi[0].copy())

    mn, mn2 = integ.run([cfg.seed], on_rho=grab if want_state else None)
    if want_state:
        return mn[0], mn2[0], states
    return mn[0], mn2[0]


def _run_block(args):
    cfg, p, rho_times, first, count = args
    integ = _Integrator(cfg, p, rho_times=rho_times)
    dim = cfg.dim
    rho_sums = np.zeros((len(integ.rho_times), dim, dim), dtype=complex)

    def accumulate(i, psi):
        rho_sums[i] += psi.T @ psi.conj()

    seeds = [cfg.seed + first + k for k in range(count)]
    try:
        mn, mn2 = integ.run(seeds, on_rho=accumulate)
    except (TruncationOverflowError, StepFailureError) as exc:
        if getattr(exc, "trajectory", None) is not None:
            exc.trajectory = first + exc.trajectory
        exc.args = (f"trajectory {exc.trajectory}: {exc.args[0]}",)
        raise
    return mn, mn2, rho_sums


def resolve_workers(workers=None):
    if workers is None:
        workers = int(os.environ.get("KERRMOD_WORKERS", "1"))
    return max(1, int(workers))


def run_ensemble(n_traj, cfg, p, rho_sample_times=(), workers=None, block_size=BLOCK_SIZE):
    """Run ``n_traj`` trajectories (seeds ``cfg.seed + k``) and reduce them.

    Returns ``(EnsembleStats, rhos)`` where ``rhos`` holds one density matrix
    per entry of ``rho_sample_times`` (in the order given).  Results do not
    depend on ``workers``: trajectories are integrated in fixed blocks and all
    sums run in trajectory-index order.
    """
    n_traj = int(n_traj)
    if n_traj < 1:
        raise InvalidParameterError(f"n_traj must be >= 1, got {n_traj}")
    rho_times = [float(t) for t in rho_sample_times]
    for t in rho_times:
        if not 0 <= t <= cfg.t_end + 1e-12:
            raise InvalidParameterError(f"density sample time {t} outside [0, t_end]")
    order = np.argsort(rho_times)
    jobs = [
        (cfg, p, sorted(rho_times), first, min(block_size, n_traj - first))
        for first in range(0, n_traj, block_size)
    ]
    workers = resolve_workers(workers)
    if workers == 1 or len(jobs) == 1:
        results = [_run_block(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_block, jobs))

    mn = np.concatenate([r[0] for r in results])
    mn2 = np.concatenate([r[1] for r in results])
    rho_sum = np.zeros((len(rho_times), cfg.dim, cfg.dim), dtype=complex)
    for r in results:
        rho_sum += r[2]
    rhos_sorted = rho_sum / n_traj
    rhos_sorted = 0.5 * (rhos_sorted + np.conj(np.swapaxes(rhos_sorted, -1, -2)))
    rhos = [None] * len(rho_times)
    for pos, idx in enumerate(order):
        rhos[idx] = rhos_sorted[pos]

    stats = reduce_moments(np.asarray(cfg.sample_times), mn, mn2)
    return stats, rhos


def reduce_moments(times, mn, mn2):
    """Ensemble statistics from per-trajectory moments (rows = trajectories)."""
    n_traj = mn.shape[0]
    # pairwise summation along contiguous rows, in trajectory-index order
    mean_n = np.ascontiguousarray(mn.T).sum(axis=1) / n_traj
    mean_n2 = np.ascontiguousarray(mn2.T).sum(axis=1) / n_traj
    q = _mandel_q_series(mean_n, mean_n2)
    if n_traj > 1:
        se_n = np.std(mn, axis=0, ddof=1) / math.sqrt(n_traj)
        se_q = _jackknife_q_se(mn, mn2)
    else:
        se_n = np.zeros_like(mean_n)
        se_q = np.zeros_like(mean_n)
    return EnsembleStats(
        times=np.asarray(times, dtype=float),
        mean_n=mean_n,
        mean_n2=mean_n2,
        q=q,
        se_n=se_n,
        n_traj=n_traj,
        se_q=se_q,
    )


def _jackknife_q_se(mn, mn2, n_groups=20):
    """Delete-a-group jackknife standard error of the ensemble Mandel Q."""
    n = mn.shape[0]
    g = min(n_groups, n)
    labels = np.arange(n) % g
    sum_n, sum_n2 = mn.sum(axis=0), mn2.sum(axis=0)
    estimates = []
    for k in range(g):
        mask = labels == k
        m = n - mask.sum()
        estimates.append(
            _mandel_q_series((sum_n - mn[mask].sum(axis=0)) / m, (sum_n2 - mn2[mask].sum(axis=0)) / m)
        )
    estimates = np.asarray(estimates)
    return np.sqrt((g - 1) / g * np.sum((estimates - estimates.mean(axis=0)) ** 2, axis=0))
