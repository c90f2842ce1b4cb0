import numpy as np
import pytest

from dqgtlab.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, QuadratureError, integrate


def test_rule_integrates_polynomials():
    # Kronrod 15 is exact to degree 22, Gauss 7 to degree 13
    for deg in range(23):
        exact = (1 - (-1) ** (deg + 1)) / (deg + 1)
        assert KRONROD_WEIGHTS @ NODES**deg == pytest.approx(exact, abs=1e-14)
        if deg <= 13:
            assert GAUSS_WEIGHTS @ NODES**deg == pytest.approx(exact, abs=1e-14)


def test_smooth_integrand():
    res = integrate(np.cos, 0.0, 3.0, rtol=1e-12)
    assert res.value == pytest.approx(np.sin(3.0), rel=1e-12)


def test_peaked_integrand_refines():
    res = integrate(lambda x: 1.0 / (1e-4 + x * x), -1.0, 1.0, rtol=1e-10)
    assert res.value == pytest.approx(2 * np.arctan(1e2) / 1e-2, rel=1e-10)
    assert len(res.pieces) > 8


def test_cumulative_ends_at_total():
    res = integrate(np.exp, 0.0, 1.0, breakpoints=[0.25, 0.5])
    cum = res.cumulative()
    assert cum[0] == 0.0
    assert cum[-1] == pytest.approx(res.value, rel=1e-15)
    assert 0.25 in res.breakpoints and 0.5 in res.breakpoints
    np.testing.assert_allclose(cum, np.exp(res.breakpoints) - 1, rtol=1e-12)


def test_deterministic():
    a = integrate(lambda x: np.sqrt(np.abs(x)), -1.0, 2.0)
    b = integrate(lambda x: np.sqrt(np.abs(x)), -1.0, 2.0)
    assert a.value == b.value


def test_failure_is_reported():
    with pytest.raises(QuadratureError):
        integrate(lambda x: 1.0 / np.abs(x - 0.3), 0.0, 1.0, rtol=1e-12, max_intervals=50)
