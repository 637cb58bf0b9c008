import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gamma_pm import fixtures as fx
from gamma_pm.density import (LatticeShift, VectorMeasureAtoms, averaged_inequality_check,
                              best_direction, discrete_energy, dyadic_partitions,
                              interpolate_lattice, l1_distance, polytope_approximate,
                              subadditive_slice_inequality_check, tv_partition_check)
from gamma_pm.errors import CoverageError, DomainError, ZeroMeasureError
from gamma_pm.functions import JumpCost
from gamma_pm.limit import anisotropic_energy_2d, limit_energy_2d
from gamma_pm.partition import PiecewiseConstant1D, extend_constant

SQRT = JumpCost.sqrt()
SQ2 = math.sqrt(2.0)


def ext(u, eps):
    return extend_constant(u, 1.25 * 2 * SQ2 * eps)


def brute_force_2d(value, core, eps, y):
    """Direct enumeration of neighbour pairs in the open sqrt(2) eps dilation."""
    x0, y0, x1, y1 = core
    r = SQ2 * eps

    def inside(p):
        dx = max(x0 - p[0], 0.0, p[0] - x1)
        dy = max(y0 - p[1], 0.0, p[1] - y1)
        return math.hypot(dx, dy) < r

    total = 0.0
    ks = range(int((x0 - 2 * r) / eps) - 2, int((x1 + 2 * r) / eps) + 3)
    ls = range(int((y0 - 2 * r) / eps) - 2, int((y1 + 2 * r) / eps) + 3)
    for k in ks:
        for l in ls:
            p = (eps * (k + y[0]), eps * (l + y[1]))
            if not inside(p):
                continue
            for q in ((p[0] + eps, p[1]), (p[0], p[1] + eps)):
                if inside(q):
                    total += math.sqrt(abs(value(q) - value(p)))
    return eps * total


def test_constant_zero():
    u = ext(fx.constant(2.0), 1 / 16)
    assert discrete_energy(u, LatticeShift(1 / 16, (0.3, 0.7)), SQRT) == 0.0
    r = averaged_inequality_check(u, 1 / 16, SQRT, 50)
    assert tuple(r) == (0.0, 0.0, 0.0)
    out = interpolate_lattice(u, LatticeShift(1 / 16, (0.1, 0.2)))
    assert np.all(out.values == 2.0)


def test_example_1d():
    v = PiecewiseConstant1D([0.5], [0.0, 1.0], (0.0, 1.0))
    assert discrete_energy(v, LatticeShift(0.25, (0.0,), 1), SQRT) == pytest.approx(1.0)


def test_example_2d_literal_rule():
    eps = 1 / 8
    u = ext(fx.axis_jump(), eps)
    d = discrete_energy(u, LatticeShift(eps, (0.0, 0.0)), SQRT)
    # rows at y = -1/8 .. 9/8 all lie in the dilation: 11 straddling pairs
    oracle = brute_force_2d(lambda p: 1.0 if p[0] >= 0.5 else 0.0, (0, 0, 1, 1), eps, (0, 0))
    assert d == pytest.approx(oracle, abs=1e-14)
    assert d == pytest.approx(11 / 8, abs=1e-14)


def extended_diagonal(p):
    # constant extension: strips copy the adjacent cell, the two corner squares cut by
    # the diagonal take the lower cell (index 0)
    x, y = p
    if (x < 0 and y < 0) or (x > 1 and y > 1):
        return 0.0
    x, y = min(max(x, 0.0), 1.0), min(max(y, 0.0), 1.0)
    return 1.0 if y > x else 0.0


@pytest.mark.parametrize("y", [(0.13, 0.71), (0.5, 0.25), (0.9, 0.05)])
def test_discrete_energy_matches_brute_force(y):
    eps = 1 / 16
    u = ext(fx.diagonal_jump(), eps)
    oracle = brute_force_2d(extended_diagonal, (0, 0, 1, 1), eps, y)
    assert discrete_energy(u, LatticeShift(eps, y), SQRT) == pytest.approx(oracle, abs=1e-12)


def test_margin_required():
    with pytest.raises(DomainError):
        discrete_energy(fx.axis_jump(), LatticeShift(1 / 16, (0, 0)), SQRT)
    with pytest.raises(DomainError):
        LatticeShift(0.1, (1.0, 0.0))


FIXTURES = {
    "axis": fx.axis_jump(),
    "diagonal": fx.diagonal_jump(),
    "tjunction": fx.t_junction(),
    "random": fx.random_partition(6, seed=3),
}


@pytest.mark.parametrize("name", list(FIXTURES))
def test_per_sample_chain(name):
    eps = 1 / 32
    u = ext(FIXTURES[name], eps)
    rng = np.random.default_rng(5)
    for y in rng.random((4, 2)):
        sh = LatticeShift(eps, tuple(y))
        ubar = interpolate_lattice(u, sh)
        e = limit_energy_2d(ubar, SQRT)
        assert e == pytest.approx(anisotropic_energy_2d(ubar, SQRT, 0.0), abs=1e-12)
        assert e <= discrete_energy(u, sh, SQRT) + 1e-10


@pytest.mark.parametrize("name", list(FIXTURES))
def test_averaged_inequality(name):
    eps = 1 / 32
    u = ext(FIXTURES[name], eps)
    r = averaged_inequality_check(u, eps, SQRT, 200, seed=1)
    assert r.mean_d <= r.e0 + 3 * r.std_err
    if name == "axis":
        # E_0 on the dilated core: the jump line extended on both sides
        assert r.e0 == pytest.approx(1 + 2 * 2 * SQ2 * eps, rel=1e-12)
    if name == "diagonal":
        assert r.mean_d >= 0.9 * SQ2
        assert r.mean_d <= SQ2 * r.e0 / SQ2 + 3 * r.std_err


def test_averaged_deterministic_and_parallel():
    eps = 1 / 32
    u = ext(fx.diagonal_jump(), eps)
    a = averaged_inequality_check(u, eps, SQRT, 60, seed=4)
    b = averaged_inequality_check(u, eps, SQRT, 60, seed=4, workers=4)
    assert np.array_equal(a.samples, b.samples)
    with pytest.raises(DomainError):
        averaged_inequality_check(u, eps, SQRT, 10)


def test_subadditive_examples():
    const = PiecewiseConstant1D([], [1.0], (0.0, 1.0))
    assert subadditive_slice_inequality_check(const, 0.1, SQRT) == (0.0, 0.0)
    one = PiecewiseConstant1D([0.5], [0.0, 4.0], (0.0, 1.0))
    lhs, rhs = subadditive_slice_inequality_check(one, 0.1, SQRT)
    assert rhs == pytest.approx(2.0) and lhs == pytest.approx(2.0, abs=1e-12)
    edge = PiecewiseConstant1D([0.95], [0.0, 1.0], (0.0, 1.0))
    lhs, rhs = subadditive_slice_inequality_check(edge, 0.1, SQRT)
    assert lhs == pytest.approx((1.0 - 0.1 - 0.85) / 0.1, abs=1e-12) and rhs == 1.0
    two = PiecewiseConstant1D([0.5, 0.55], [0.0, 1.0, 2.0], (0.0, 1.0))
    lhs, rhs = subadditive_slice_inequality_check(two, 0.1, SQRT)
    # theta(1) on (0.4, 0.45) and (0.5, 0.55), theta(2) on (0.45, 0.5)
    want = (0.05 + 0.05 * SQ2 + 0.05) / 0.1
    assert lhs == pytest.approx(want, abs=1e-12) and rhs == 2.0 and lhs < rhs


@given(st.lists(st.tuples(st.floats(0.01, 0.99), st.floats(-3, 3)), min_size=1, max_size=6),
       st.floats(0.01, 0.5))
@settings(max_examples=60, deadline=None)
def test_subadditive_property(jumps, eps):
    bps = sorted({round(b, 6) for b, _ in jumps})
    vals = np.concatenate([[0.0], np.cumsum([j for _, j in jumps][:len(bps)])])
    v = PiecewiseConstant1D(bps, vals, (0.0, 1.0))
    lhs, rhs = subadditive_slice_inequality_check(v, eps, SQRT)
    assert lhs <= rhs + 1e-10


def test_best_direction():
    cube = (0, 0, 1, 1)
    one = VectorMeasureAtoms([[0.5, 0.5]], [[3.0, 4.0]])
    assert np.allclose(best_direction(one, cube), [0.6, 0.8])
    two = VectorMeasureAtoms([[0.2, 0.2], [0.7, 0.7]], [[1, 0], [0, 1]])
    assert np.allclose(best_direction(two, cube), [1 / SQ2, 1 / SQ2])
    cancel = VectorMeasureAtoms([[0.2, 0.2], [0.7, 0.7]], [[1, 0], [-1, 0]])
    with pytest.raises(ZeroMeasureError):
        best_direction(cancel, cube)


def test_tv_partition_examples():
    two = VectorMeasureAtoms([[0.25, 0.25], [0.75, 0.75]], [[1, 0], [0, 1]])
    levels = dyadic_partitions((0, 0, 1, 1), 1)
    res = tv_partition_check(two, levels)
    assert res[0][1] == pytest.approx(SQ2) and res[1][1] == pytest.approx(2.0)
    single = VectorMeasureAtoms([[0.3, 0.6]], [[-2.0, 1.0]])
    for _, tot in tv_partition_check(single, dyadic_partitions((0, 0, 1, 1), 4)):
        assert tot == pytest.approx(math.sqrt(5.0))
    with pytest.raises(CoverageError):
        tv_partition_check(two, [[(0, 0, 0.5, 0.5)]])


def test_tv_partition_random_atoms():
    rng = np.random.default_rng(11)
    finest = SQ2 / 64
    pts = []
    while len(pts) < 10:
        p = rng.random(2)
        # keep atoms in distinct finest cells by spacing them well apart
        if all(np.linalg.norm(p - q) > 4 * finest for q in pts):
            pts.append(p)
    pts = np.array(pts)
    cells = np.floor(pts * 64)
    assert len({tuple(c) for c in cells}) == 10
    mu = VectorMeasureAtoms(pts, rng.normal(size=(10, 2)))
    res = tv_partition_check(mu, dyadic_partitions((0, 0, 1, 1), 6))
    assert res[-1][1] == pytest.approx(mu.total_variation, abs=1e-12)
    assert np.all(np.diff([t for _, t in res]) >= -1e-12)
    assert np.all(np.diff([d for d, _ in res]) < 0)


@given(st.integers(0, 10 ** 6), st.integers(1, 25))
@settings(max_examples=40, deadline=None)
def test_tv_partition_monotone(seed, n):
    rng = np.random.default_rng(seed)
    mu = VectorMeasureAtoms(rng.random((n, 2)), rng.normal(size=(n, 2)))
    res = [t for _, t in tv_partition_check(mu, dyadic_partitions((0, 0, 1, 1), 5))]
    assert np.all(np.diff(res) >= -1e-12)
    assert res[-1] <= mu.total_variation + 1e-12


def test_from_jumps_totals():
    u = fx.diagonal_jump()
    mu = VectorMeasureAtoms.from_jumps(u, SQRT, 1 / 64)
    assert mu.total_variation == pytest.approx(limit_energy_2d(u, SQRT), rel=1e-12)
    assert np.allclose(mu.weights.sum(axis=0) / mu.total_variation, [-1 / SQ2, 1 / SQ2])


def test_averaged_l1_convergence():
    u0 = fx.diagonal_jump()
    rng = np.random.default_rng(2)
    ys = rng.random((100, 2))
    means = []
    for eps in (1 / 16, 1 / 32, 1 / 64):
        u = ext(u0, eps)
        d = [l1_distance(u0, interpolate_lattice(u, LatticeShift(eps, tuple(y))), u0.domain)
             for y in ys]
        means.append(np.mean(d))
    assert means[0] > means[1] > means[2]
    assert means[-1] <= 2 * (1 / 64) * SQ2 * 1.0


@pytest.mark.parametrize("u0", [fx.axis_jump(), fx.axis_cross()], ids=["axis", "cross"])
def test_polytope_axis_aligned(u0):
    delta = 0.25
    reports = []
    for eps in (delta / 8, delta / 16):
        u = ext(u0, eps)
        r = polytope_approximate(u, delta, eps, SQRT)
        assert r.energy_approx <= r.energy_target + 1e-10
        assert r.energy_approx <= r.energy_target + r.c * r.defect_bound + 1e-10
        assert r.l1_error >= 0
        reports.append(r)
    assert reports[1].l1_error <= reports[0].l1_error + 1e-12


def test_polytope_first_order_l1():
    u0 = fx.diagonal_jump()
    delta = 0.25
    errs = []
    for eps in (delta / 8, delta / 16):
        r = polytope_approximate(ext(u0, eps), delta, eps, SQRT)
        errs.append(r.l1_error)
        assert r.energy_approx <= SQ2 * r.energy_target
        assert r.energy_approx <= r.energy_target + r.c * r.defect_bound + 1e-10
    assert 1.4 <= errs[0] / errs[1] <= 2.8


def test_polytope_constant_and_errors():
    u = ext(fx.constant(1.5), 1 / 32)
    r = polytope_approximate(u, 0.25, 1 / 32, SQRT)
    assert r.energy_approx == 0 and r.energy_target == 0 and r.l1_error == 0
    assert np.all(r.approximant.values == 1.5)
    with pytest.raises(DomainError):
        polytope_approximate(u, 0.25, 0.05, SQRT)
    data = r.to_json()
    assert {"l1Error", "energyApprox", "energyTarget", "cubes"} <= set(data)
