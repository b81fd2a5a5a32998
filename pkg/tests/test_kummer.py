"""Confluent hypergeometric engine vs a multiprecision oracle."""
import cmath

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slowquench.errors import ConvergenceError
from slowquench.kummer import SERIES_RADIUS, kummer_m, kummer_m_and_diff

mp.mp.dps = 40


def oracle(a, b, z):
    return complex(mp.hyp1f1(mp.mpc(a), mp.mpc(b), mp.mpc(z)))


def rel_err(got, want):
    return abs(got - want) / max(abs(want), 1e-300)


def test_at_origin_and_trivial_parameter():
    assert kummer_m(-0.7j, -1.4j, 0.0) == 1.0 + 0.0j
    assert kummer_m(0.0, -1.4j, -5.0j) == 1.0 + 0.0j


def test_equal_parameters_give_exponential():
    for z in (-7.0j, -0.3j, 2.0 - 1.0j):
        assert rel_err(kummer_m(0.5j, 0.5j, z), cmath.exp(z)) < 1e-14


def test_classic_real_value():
    assert rel_err(kummer_m(1.0, 2.0, 1.0), cmath.e - 1.0) < 1e-14


# mpmath.hyp1f1 at 40 digits, frozen
FROZEN = [
    (-1.5j, -2.0j, -10.0j, -0.8485756745555381 - 0.31550180311414006j, 1e-10),
    (-6.0j, -8.0j, -25.0j, -0.9184031315018466 + 0.013701886875145687j, 1e-10),
    (-0.4j, -0.6j, -120.0j, 0.6615978409935087 + 0.4347445936892072j, 1e-9),
]


@pytest.mark.parametrize("a,b,z,want,tol", FROZEN)
def test_frozen_multiprecision_values(a, b, z, want, tol):
    assert rel_err(kummer_m(a, b, z), want) < tol


def test_series_regime_matches_oracle():
    rng = np.random.default_rng(0)
    for _ in range(60):
        g = rng.uniform(0.01, 12.0)
        a = -1j * g * (1 + rng.uniform(-1, 1))
        b = -2j * g
        z = -1j * rng.uniform(0.01, SERIES_RADIUS)
        assert rel_err(kummer_m(a, b, z), oracle(a, b, z)) < 1e-12


def test_large_argument_matches_oracle():
    rng = np.random.default_rng(1)
    for _ in range(40):
        g = rng.uniform(0.02, 3.0)
        a = -1j * g * (1 + rng.uniform(-1, 1))
        b = -2j * g
        z = -1j * rng.uniform(31.0, 2000.0)
        assert rel_err(kummer_m(a, b, z), oracle(a, b, z)) < 1e-6


def test_strong_coupling_just_past_series_radius():
    """Where the asymptotic expansion stalls the compensated series takes
    over; either way the result stays within 1e-6 relative or 1e-9 absolute."""
    rng = np.random.default_rng(7)
    for _ in range(40):
        g = rng.uniform(4.0, 12.0)
        a = -1j * g * (1 + rng.uniform(-1, 1))
        b = -2j * g
        z = -1j * rng.uniform(30.01, 45.0)
        want = oracle(a, b, z)
        err = abs(kummer_m(a, b, z) - want)
        assert err < max(1e-6 * abs(want), 1e-9)


def test_difference_pair_matches_oracle():
    rng = np.random.default_rng(2)
    for _ in range(40):
        g = rng.uniform(0.01, 10.0)
        a = -1j * g * (1 + rng.uniform(-0.99, 0.99))
        b = -2j * g
        z = -1j * 10.0 ** rng.uniform(-6, np.log10(SERIES_RADIUS))
        m, d = kummer_m_and_diff(a, b, z)
        assert rel_err(m, oracle(a, b, z)) < 1e-12
        # subtract before leaving multiprecision or the oracle itself cancels
        want_d = complex(
            mp.hyp1f1(mp.mpc(a + 1), mp.mpc(b + 1), mp.mpc(z))
            - mp.hyp1f1(mp.mpc(a), mp.mpc(b), mp.mpc(z))
        )
        assert rel_err(d, want_d) < 1e-10


@settings(max_examples=60, deadline=None)
@given(
    g=st.floats(0.02, 8.0),
    c=st.floats(-0.99, 0.99),
    y=st.floats(1e-3, 28.0),
)
def test_kummer_transformation_identity(g, c, y):
    """M(a, b, z) = e^z M(b - a, b, -z), evaluated entirely in-house."""
    a = -1j * g * (1 + c)
    b = -2j * g
    z = -1j * y
    lhs = kummer_m(a, b, z)
    rhs = cmath.exp(z) * kummer_m(b - a, b, -z)
    assert abs(lhs - rhs) < 1e-12 * abs(lhs)


@pytest.mark.parametrize("b", [0.0, -1.0, -2.0 + 0.0j])
def test_pole_rejected(b):
    with pytest.raises(ValueError):
        kummer_m(-0.5j, b, -1.0j)


def test_unreachable_accuracy_raises():
    # strong coupling with |z| beyond the series fallback: the asymptotic
    # truncation error is O(1) and the call must refuse, not degrade
    with pytest.raises(ConvergenceError):
        kummer_m(-12.6j, -18.0j, -46.0j)
