import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gamma_pm.errors import DivergenceError, DomainError
from gamma_pm.functions import (MAX_EIGEN, SPECTRAL_RADIUS, GrowthFunction, JumpCost,
                                SymmetricMatrix2, growth_exponent_estimate, hessian_norm,
                                jump_cost_catalog, jump_exponent, phi_eval)

PHIS = [GrowthFunction.perona_malik(), GrowthFunction.power(0.5), GrowthFunction.power(0.0, 1.0),
        GrowthFunction.power(0.3, 0.0),
        GrowthFunction.custom([[0, 0], [1, 0.5], [3, 0.9]], a=0.0)]


def test_phi_values():
    pm = GrowthFunction.perona_malik()
    assert phi_eval(pm, 0.0) == 0.0
    assert phi_eval(pm, 1.0) == pytest.approx(math.log(2.0), abs=1e-15)
    assert phi_eval(GrowthFunction.power(0.5, 0.0), 4.0) == pytest.approx(2.0, abs=1e-15)


def test_smoothed_power_vanishes_at_zero():
    phi = GrowthFunction.power(0.5, 1e-3)
    assert phi(0.0) == 0.0
    assert phi(2.0) == pytest.approx((4 + 1e-6) ** 0.25 - 1e-3 ** 0.5)


@pytest.mark.parametrize("phi", PHIS)
def test_phi_even_zero_monotone(phi):
    p = np.linspace(0.0, 50.0, 2001)
    v = phi(p)
    assert phi(0.0) == 0.0
    assert np.array_equal(phi(-p), v)
    assert np.all(np.diff(v) >= -1e-15)


@pytest.mark.parametrize("phi", PHIS[:4])
def test_derivatives_match_differences(phi):
    p = np.linspace(-5, 5, 41) + 0.013
    h = 1e-6
    fd1 = (phi(p + h) - phi(p - h)) / (2 * h)
    fd2 = (phi.derivative(p + h) - phi.derivative(p - h)) / (2 * h)
    assert np.allclose(phi.derivative(p), fd1, rtol=1e-6, atol=1e-8)
    assert np.allclose(phi.second_derivative(p), fd2, rtol=1e-5, atol=1e-6)


def test_growth_function_validation():
    with pytest.raises(DomainError):
        GrowthFunction.power(1.0)
    with pytest.raises(DomainError):
        GrowthFunction("perona-malik", 0.5)
    with pytest.raises(DomainError):
        GrowthFunction.custom([[0, 0], [1, -1]])
    with pytest.raises(DomainError):
        GrowthFunction.custom([[0.5, 0], [1, 1]])


def test_growth_json_roundtrip():
    for phi in PHIS:
        assert GrowthFunction.from_json(phi.to_json()) == phi


def test_growth_exponent_pm():
    est = growth_exponent_estimate(GrowthFunction.perona_malik(), 2.0, np.geomspace(10, 1e8, 50))
    assert abs(est.estimate) <= 1e-3
    assert est.admissible
    # the raw ratio is still far from 0 at p = 1e8
    assert est.raw_tail > 0.03


def test_growth_exponent_power_exact():
    est = growth_exponent_estimate(GrowthFunction.power(0.5, 0.0), 4.0, np.geomspace(10, 1e6, 20))
    assert est.estimate == 0.5


def test_growth_exponent_linear_inadmissible():
    phi = GrowthFunction.custom([[0, 0], [1, 1]], a=0.0)
    est = growth_exponent_estimate(phi, 2.0, np.geomspace(10, 1e6, 20))
    assert est.estimate == pytest.approx(1.0, abs=1e-9)
    assert not est.admissible


def test_growth_exponent_not_cauchy():
    # log-periodic oscillation never settles
    class Wobble:
        def __call__(self, p):
            p = np.asarray(p, float)
            return p ** 0.5 * (2.0 + np.sin(3.0 * np.log(p)))
    with pytest.raises(DivergenceError):
        growth_exponent_estimate(Wobble(), 2.0, np.geomspace(10, 1e8, 40))


def test_growth_exponent_bad_input():
    with pytest.raises(DomainError):
        growth_exponent_estimate(GrowthFunction.perona_malik(), 1.0, np.geomspace(10, 1e6, 20))


def test_jump_exponent():
    assert jump_exponent(0.0) == 0.5
    assert jump_exponent(0.5) == pytest.approx(5 / 7, abs=1e-15)
    with pytest.raises(DomainError):
        jump_exponent(1.0)
    a = np.linspace(0, 1, 1000, endpoint=False)
    v = np.array([jump_exponent(x) for x in a])
    assert np.all(np.diff(v) > 0) and v.min() >= 0.5 and v.max() < 1.0


@pytest.mark.parametrize("name", list(jump_cost_catalog()))
def test_catalog_admissible(name):
    theta = jump_cost_catalog()[name]
    t = np.linspace(0.0, 10.0, 100)
    S, T = np.meshgrid(t, t)
    assert np.all(theta(S + T) <= theta(S) + theta(T) + 1e-12)
    assert np.array_equal(theta(-t), theta(t))
    checks = theta.admissibility()
    if name == "custom-concave":
        # a finite table has finite slope at 0
        assert checks["zero"] and checks["monotone"] and checks["subadditive"]
    else:
        assert all(checks.values()), checks


def test_jump_cost_parse():
    assert JumpCost.from_spec("sqrt")(4.0) == 2.0
    assert JumpCost.from_spec("power:0.25")(16.0) == pytest.approx(2.0)
    assert JumpCost.from_spec("growth:0.5").exponent == pytest.approx(5 / 7)
    th = JumpCost.from_spec({"kind": "custom", "table": [[0, 0], [1, 1], [2, 1.5]]})
    assert th(3.0) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        JumpCost.from_spec("cubic")


def test_linear_cost_is_not_infinite_slope():
    assert not JumpCost.power(1.0).admissibility()["infinite_slope"]


@given(st.floats(0.01, 0.99), st.floats(0.1, 100.0), st.floats(0.1, 100.0))
@settings(max_examples=60, deadline=None)
def test_power_homogeneity(a, lam, p):
    phi = GrowthFunction.power(a, 0.0)
    assert phi(lam * p) == pytest.approx(lam ** a * phi(p), rel=1e-12)


def test_hessian_norm():
    assert hessian_norm(SymmetricMatrix2(2, 0, -3)) == pytest.approx(3.0)
    for mode in (SPECTRAL_RADIUS, MAX_EIGEN):
        assert hessian_norm(SymmetricMatrix2(1, 0, 1), mode) == pytest.approx(1.0)
    M = SymmetricMatrix2(-1, 0, -1)
    assert hessian_norm(M, MAX_EIGEN) == 0.0
    assert hessian_norm(M, SPECTRAL_RADIUS) == pytest.approx(1.0)


@given(st.floats(-1e3, 1e3))
@settings(max_examples=50, deadline=None)
def test_hessian_norm_embeds_1d(c):
    assert hessian_norm(SymmetricMatrix2(c, 0.0, 0.0)) == pytest.approx(abs(c), abs=1e-12)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
@settings(max_examples=50, deadline=None)
def test_hessian_norm_against_eigvalsh(a, b, c):
    ev = np.linalg.eigvalsh([[a, b], [b, c]])
    M = SymmetricMatrix2(a, b, c)
    assert hessian_norm(M) == pytest.approx(np.max(np.abs(ev)), abs=1e-9)
    assert hessian_norm(M, MAX_EIGEN) == pytest.approx(max(ev.max(), 0.0), abs=1e-9)
