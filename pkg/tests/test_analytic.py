import math

import numpy as np
import pytest
from scipy.integrate import quad

from kerrmod import analytic, fock
from kerrmod.analytic import UnitaryKerrSpec
from kerrmod.errors import InvalidParameterError, NoSuperpositionTimeError
from kerrmod.model import OscillatorParams, chi_at


def test_phase_examples():
    spec = UnitaryKerrSpec(chi0=1.3)
    assert analytic.phase_accum(2.0, spec) == pytest.approx(2.6)
    mod = UnitaryKerrSpec(chi0=1, chi1=0.5, delta_mod=2)
    assert analytic.phase_accum(0.0, mod) == 0
    assert analytic.phase_accum(math.pi, mod) == pytest.approx(math.pi, abs=1e-14)


def test_phase_matches_quadrature(rng):
    for _ in range(100):
        chi0, chi1 = rng.uniform(0, 3), rng.uniform(0, 2)
        w, ph, t = rng.uniform(0.01, 10), rng.uniform(-math.pi, math.pi), rng.uniform(0, 20)
        spec = UnitaryKerrSpec(chi0=chi0, chi1=chi1, delta_mod=w, phase_chi=ph)
        p = OscillatorParams(chi0=chi0, chi1=chi1, mod_freq_chi=w, phase_chi=ph)
        ref, _ = quad(chi_at, 0, t, args=(p,), epsabs=1e-13, epsrel=1e-13, limit=500)
        assert analytic.phase_accum(t, spec) == pytest.approx(ref, abs=1e-10)


def test_state_at_zero_is_coherent():
    spec = UnitaryKerrSpec(alpha0=1.2 + 0.3j, chi0=0.7, dim=30)
    np.testing.assert_allclose(analytic.unitary_state(0.0, spec), fock.coherent_state(spec.alpha0, 30))


def test_state_is_phase_only():
    spec = UnitaryKerrSpec(alpha0=2, chi0=1, chi1=0.5, delta_mod=1.3, dim=40)
    s0 = analytic.unitary_state(0.0, spec)
    for t in (0.3, 1.1, 7.9):
        s = analytic.unitary_state(t, spec)
        np.testing.assert_allclose(np.abs(s), np.abs(s0), atol=1e-15)
        assert fock.moments(s)[0] == pytest.approx(4.0, abs=1e-9)
        assert np.linalg.norm(s) == pytest.approx(1.0, abs=1e-12)


def test_density_matches_outer_product():
    spec = UnitaryKerrSpec(alpha0=2, chi0=1, chi1=0.5, delta_mod=0.8, phase_chi=0.3, dim=40)
    t = 1.7
    rho = analytic.unitary_density_matrix(t, spec)
    for n in range(0, 20, 3):
        for m in range(0, 20, 4):
            assert abs(analytic.unitary_density(n, m, t, spec) - rho[n, m]) < 1e-12


def test_density_diagonal_is_poisson():
    spec = UnitaryKerrSpec(alpha0=2, chi0=1, dim=40)
    for n in range(10):
        pois = math.exp(-4) * 4**n / math.factorial(n)
        for t in (0.0, 0.6, 3.0):
            assert analytic.unitary_density(n, n, t, spec) == pytest.approx(pois, abs=1e-15)


def test_density_hermitian():
    spec = UnitaryKerrSpec(alpha0=2, chi0=1, chi1=0.5, delta_mod=1, dim=40)
    for n, m in [(1, 0), (3, 7), (5, 2)]:
        a = analytic.unitary_density(n, m, 0.9, spec)
        b = analytic.unitary_density(m, n, 0.9, spec)
        assert a == pytest.approx(b.conjugate(), abs=1e-15)


def test_density_one_zero_at_quarter_turn():
    # magnitude e^{-4} * 2; the phase sign follows rho_nm = <n|psi><psi|m>
    spec = UnitaryKerrSpec(alpha0=2, chi0=1, dim=40)
    t = math.pi / 2
    val = analytic.unitary_density(1, 0, t, spec)
    assert abs(val) == pytest.approx(2 * math.exp(-4), abs=1e-15)
    assert val == pytest.approx(2 * math.exp(-4) * np.exp(-1j * math.pi / 2), abs=1e-15)


def test_superposition_time_examples():
    assert analytic.superposition_time(UnitaryKerrSpec(chi0=1)) == pytest.approx(math.pi / 2, abs=1e-10)
    spec = UnitaryKerrSpec(chi0=1, chi1=0.5, delta_mod=1e-3, phase_chi=math.pi / 2)
    t = analytic.superposition_time(spec)
    assert abs(t - math.pi / 3) < 1e-3
    assert abs(analytic.phase_accum(t, spec) - math.pi / 2) < 1e-10


def test_superposition_time_nonmonotone():
    # chi1 > chi0 makes phi(t) non-monotone; the root is still bracketed
    spec = UnitaryKerrSpec(chi0=0.2, chi1=1.0, delta_mod=0.5, phase_chi=-math.pi / 2)
    t = analytic.superposition_time(spec)
    assert abs(analytic.phase_accum(t, spec) - math.pi / 2) < 1e-10
    ts = np.linspace(0, t, 2000)[:-1]
    assert np.all(analytic.phase_accum(ts, spec) < math.pi / 2)


def test_superposition_time_errors():
    with pytest.raises(InvalidParameterError):
        analytic.superposition_time(UnitaryKerrSpec(chi0=0))
    with pytest.raises(NoSuperpositionTimeError):
        analytic.superposition_time(UnitaryKerrSpec(chi0=1.0), target=1e6)


def test_spec_validation():
    with pytest.raises(InvalidParameterError):
        UnitaryKerrSpec(chi1=0.5, delta_mod=0)
    with pytest.raises(InvalidParameterError):
        UnitaryKerrSpec(alpha0=4, dim=20)
