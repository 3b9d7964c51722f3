import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(rng, dim, empty_top=0):
    """Normalized random vector with the top ``empty_top`` bins zeroed."""
    s = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    if empty_top:
        s[dim - empty_top:] = 0
    return s / np.linalg.norm(s)


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


# --------------------------------------------------------------------------
# acceptance report: one PASS/FAIL line per criterion, printed at the end of
# the session whatever the capture mode

_ACCEPTANCE = pytest.StashKey()


@pytest.fixture
def criterion(request):
    """``criterion(number, title, ok, detail)`` records a result line and returns ``ok``."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        lines.append((number, line))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines, key=lambda x: x[0]):
        terminalreporter.write_line(line)
