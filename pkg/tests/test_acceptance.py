"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest -v -s tests/test_acceptance.py`` (the lines are printed
even without ``-s``) or ``python tests/test_acceptance.py``.
"""
import math
import time

import numpy as np
import pytest

from gamma_pm import fixtures as fx
from gamma_pm import geometry as geo
from gamma_pm.cli import main as cli_main
from gamma_pm.density import (LatticeShift, VectorMeasureAtoms, averaged_inequality_check,
                              dyadic_partitions, interpolate_lattice,
                              polytope_approximate, tv_partition_check)
from gamma_pm.energy import build_recovery_2d, fnu_1d, fnu_2d, minimize_fnu_1d
from gamma_pm.flow import (NEUMANN, PERIODIC, detect_plateaus, flow_run, flow_step, initial_state,
                           plateau_coverage,
                           periodic_ramp, ramp, weighted_mean)
from gamma_pm.functions import GrowthFunction, JumpCost
from gamma_pm.grid import GridFunction
from gamma_pm.limit import (ConstantG, PolynomialG, RectIndicatorG, anisotropic_energy_2d,
                            limit_energy_2d, slicing_identity_check, total_jump_mass)
from gamma_pm.partition import extend_constant
from gamma_pm.profile import SIGMA0_EXACT, build_recovery_1d, scaling_check, solve_profile

PM = GrowthFunction.perona_malik()
SATURATING = GrowthFunction.power(0.0, 1.0)
SQRT = JumpCost.sqrt()
SQ2 = math.sqrt(2.0)
NUS_1D = (0.1, 0.05, 0.025)


def report(capsys, label, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}", flush=True)
    return ok


def extended(u, eps):
    return extend_constant(u, 1.25 * 2 * SQ2 * eps)


def density_fixtures():
    return {"axis": fx.axis_jump(), "diagonal": fx.diagonal_jump(), "tjunction": fx.t_junction(),
            "random6": fx.random_partition(6, seed=0), "constant": fx.constant(1.0)}


def test_c01_sigma0_oracle(capsys):
    t0 = time.perf_counter()
    sol = solve_profile(0.0, 1.0, 512)
    dt = time.perf_counter() - t0
    e_ok = abs(sol.energy / SIGMA0_EXACT - 1) <= 5e-3
    eta_ok = abs(sol.eta / math.sqrt(6.0) - 1) <= 1e-2
    ok = e_ok and eta_ok and dt < 10
    assert report(capsys, "C1 sigma0 oracle", ok,
                  f"energy={sol.energy:.6f} (target {SIGMA0_EXACT:.6f}, tol 0.5%), "
                  f"eta={sol.eta:.5f} (target {math.sqrt(6):.5f}, tol 1%), {dt:.2f}s < 10s")


def test_c01_cli_sigma(capsys, tmp_path):
    code = cli_main(["profile", "--a", "0", "--s", "1"])
    import json
    data = json.loads(capsys.readouterr().out)
    ok = code == 0 and abs(data["sigmaEstimate"] / SIGMA0_EXACT - 1) <= 5e-3
    assert report(capsys, "C1 (cli) profile --a 0 --s 1", ok,
                  f"exit {code}, sigmaEstimate={data['sigmaEstimate']:.6f}")


def test_c02_scaling_law(capsys):
    t0 = time.perf_counter()
    s_list = [0.5, 1.0, 2.0, 4.0]
    k0, _ = scaling_check(0.0, s_list)
    k5, _ = scaling_check(0.5, s_list)
    dt = time.perf_counter() - t0
    ok = abs(k0 - 0.5) <= 0.02 and abs(k5 - 5 / 7) <= 0.02 and dt < 120
    assert report(capsys, "C2 scaling law", ok,
                  f"exponent a=0: {k0:.5f} (0.5 +- 0.02), a=0.5: {k5:.5f} (5/7 +- 0.02), "
                  f"{dt:.1f}s < 120s")


@pytest.fixture(scope="module")
def minimizers_1d():
    t0 = time.perf_counter()
    runs = [minimize_fnu_1d(1.0, 1.0, nu, PM) for nu in NUS_1D]
    return runs, time.perf_counter() - t0


def test_c03_minimizers(capsys, minimizers_1d):
    runs, dt = minimizers_1d
    e = [r.energy.total for r in runs]
    nonincreasing = all(b <= a + 1e-12 for a, b in zip(e, e[1:]))
    close = abs(e[-1] / SIGMA0_EXACT - 1) <= 0.10
    ok = nonincreasing and close and dt < 300
    assert report(capsys, "C3a 1D minimizer energies (Perona-Malik)", ok,
                  "E=" + ", ".join(f"{v:.4f}" for v in e) + f" at nu={NUS_1D}; "
                  f"nonincreasing={nonincreasing}; finest/sigma0={e[-1] / SIGMA0_EXACT:.4f} "
                  f"(need within 10%); {dt:.1f}s")


def test_c03_recovery(capsys):
    t0 = time.perf_counter()
    prof = solve_profile(0.0, 1.0, 512)
    vals = [fnu_1d(build_recovery_1d(prof, nu, (-0.5, 0.5)), nu, PM).total for nu in NUS_1D]
    errs = [abs(v - prof.energy) for v in vals]
    dt = time.perf_counter() - t0
    ok = all(b < a for a, b in zip(errs, errs[1:])) and dt < 300
    assert report(capsys, "C3b 1D recovery sequence (Perona-Malik)", ok,
                  "F=" + ", ".join(f"{v:.4f}" for v in vals)
                  + f" -> profile {prof.energy:.4f}; errors "
                  + ", ".join(f"{v:.4f}" for v in errs) + " strictly decreasing")


def test_c04_recovery_2d(capsys):
    t0 = time.perf_counter()
    prof = solve_profile(0.0, 1.0, 512)
    nu, shape = 0.02, (512, 512)
    half = build_recovery_2d(prof, nu, signed_distance=lambda X, Y: geo.halfplane_signed_distance(
        X, Y, (1.0, 0.0), 0.5), shape=shape)
    e_half = fnu_2d(half, nu, SATURATING).total
    r, nu_disk = 0.3, 0.01
    disk = build_recovery_2d(prof, nu_disk, signed_distance=lambda X, Y: geo.disk_signed_distance(
        X, Y, (0.5, 0.5), r), shape=shape)
    e_disk = fnu_2d(disk, nu_disk, SATURATING).total
    e_half_pm = fnu_2d(half, nu, PM).total
    dt = time.perf_counter() - t0
    rh = e_half / SIGMA0_EXACT
    rd = e_disk / (SIGMA0_EXACT * 2 * math.pi * r)
    ok = abs(rh - 1) <= 0.05 and abs(rd - 1) <= 0.07 and dt < 600
    assert report(capsys, "C4 2D signed-distance recovery (saturating phi)", ok,
                  f"half-plane ratio {rh:.4f} (tol 5%), disk ratio {rd:.4f} (tol 7%), "
                  f"nu={nu} / {nu_disk} (half-plane / disk), 512^2; Perona-Malik half-plane ratio {e_half_pm / SIGMA0_EXACT:.4f}; "
                  f"{dt:.1f}s")


@pytest.fixture(scope="module")
def averaged_runs():
    t0 = time.perf_counter()
    out = {}
    for name, u0 in density_fixtures().items():
        for eps in (1 / 32, 1 / 64):
            u = extended(u0, eps)
            out[name, eps] = (u, averaged_inequality_check(u, eps, SQRT, 200, seed=0))
    return out, time.perf_counter() - t0


def test_c05_averaged_inequality(capsys, averaged_runs):
    runs, dt = averaged_runs
    lines, ok = [], dt < 300
    for (name, eps), (_, r) in runs.items():
        good = r.mean_d <= r.e0 + 3 * r.std_err
        ok &= good
        lines.append(f"{name}@1/{round(1 / eps)}: {r.mean_d:.4f}<={r.e0:.4f}+3*{r.std_err:.4f}")
    assert report(capsys, "C5 averaged discrete energy", ok, "; ".join(lines) + f"; {dt:.1f}s")


def test_c06_exact_chain(capsys, averaged_runs):
    runs, _ = averaged_runs
    t0 = time.perf_counter()
    worst, count = -math.inf, 0
    for (name, eps), (u, r) in runs.items():
        if eps != 1 / 32:
            continue
        # the same shifts as the averaged check (default_rng(seed).random)
        ys = np.random.default_rng(0).random((200, 2))
        for y, d in zip(ys, r.samples):
            ubar = interpolate_lattice(u, LatticeShift(eps, tuple(y)))
            e = limit_energy_2d(ubar, SQRT)
            e0 = anisotropic_energy_2d(ubar, SQRT, 0.0)
            worst = max(worst, abs(e - e0), e - d)
            count += 1
    ok = worst <= 1e-10
    assert report(capsys, "C6 per-sample chain E(ubar)=E0(ubar)<=D", ok,
                  f"{count} shifts over 5 fixtures at eps=1/32, worst violation {worst:.2e} "
                  f"(tol 1e-10); {time.perf_counter() - t0:.1f}s")


def test_c07_slicing(capsys):
    u = fx.diagonal_jump()
    mass = total_jump_mass(u)
    cases = [("g=1, xi=e1", (1.0, 0.0), ConstantG()),
             ("g=1, xi=(0.6,0.8)", (0.6, 0.8), ConstantG()),
             ("g=rect", (1.0, 0.0), RectIndicatorG((0.2, 0.1, 0.7, 0.8))),
             ("g=poly", (0.6, 0.8), PolynomialG({(1, 0): 1.0, (0, 1): -0.5}))]
    ok, lines = True, []
    for label, xi, g in cases:
        errs = []
        for n in (64, 256):
            lhs, rhs = slicing_identity_check(u, xi, g, n)
            errs.append(abs(lhs - rhs))
            ok &= errs[-1] <= 2 * mass / n
        # first order: quartering the spacing must at least halve a nonzero error
        decay = errs[0] <= 1e-12 or errs[1] <= 0.5 * errs[0]
        ok &= decay
        lines.append(f"{label}: {errs[0]:.2e} -> {errs[1]:.2e} (bounds {2 * mass / 64:.3f}, "
                     f"{2 * mass / 256:.4f})")
    assert report(capsys, "C7 slicing identity", ok, "; ".join(lines))


def test_c08_polytope(capsys):
    t0 = time.perf_counter()
    diag, lines = [], []
    for delta in (1 / 4, 1 / 8, 1 / 16):
        eps = delta / 8
        diag.append(polytope_approximate(extended(fx.diagonal_jump(), eps), delta, eps, SQRT))
    l1 = [r.l1_error for r in diag]
    decreasing = all(b < a for a, b in zip(l1, l1[1:]))
    final = abs(diag[-1].energy_approx / diag[-1].energy_target - 1)
    ok = decreasing and final <= 0.10
    lines.append("diagonal l1 " + ", ".join(f"{v:.3e}" for v in l1)
                 + f"; final energy {diag[-1].energy_approx:.4f} vs {diag[-1].energy_target:.4f}")
    worst = -math.inf
    for name, u0 in (("axis", fx.axis_jump()), ("cross", fx.axis_cross())):
        for delta in (1 / 4, 1 / 8, 1 / 16):
            eps = delta / 8
            r = polytope_approximate(extended(u0, eps), delta, eps, SQRT)
            worst = max(worst, r.energy_approx - r.energy_target)
            lines.append(f"{name} delta=1/{round(1 / delta)}: {r.energy_approx:.6f} vs "
                         f"{r.energy_target:.6f}")
    ok &= worst <= 1e-10
    dt = time.perf_counter() - t0
    ok &= dt < 600
    assert report(capsys, "C8 polytope density pipeline", ok,
                  "; ".join(lines) + f"; axis-aligned max excess {worst:.2e} (tol 1e-10); {dt:.1f}s")


def test_c09_tv_partition(capsys):
    rng = np.random.default_rng(2024)
    pts = []
    while len(pts) < 10:
        p = rng.random(2)
        if all(np.linalg.norm(p - q) > 4 * SQ2 / 64 for q in pts):
            pts.append(p)
    mu = VectorMeasureAtoms(np.array(pts), rng.normal(size=(10, 2)))
    res = tv_partition_check(mu, dyadic_partitions((0, 0, 1, 1), 6))
    sums = [t for _, t in res]
    monotone = all(b >= a - 1e-12 for a, b in zip(sums, sums[1:]))
    hit = abs(sums[-1] - mu.total_variation) <= 1e-12
    ok = monotone and hit
    assert report(capsys, "C9 TV partition lemma", ok,
                  "sums " + ", ".join(f"{v:.6f}" for v in sums)
                  + f" -> |mu|={mu.total_variation:.12f}, final diff {abs(sums[-1] - mu.total_variation):.1e}")


def test_c10_flow(capsys):
    t0 = time.perf_counter()
    n, nu = 1024, 0.05
    u0 = GridFunction((0.0, 1.0), ramp(np.linspace(0, 1, n)))
    run = flow_run(u0, 1.0, nu, PM, NEUMANN, snapshot_every=0)
    st = run.state
    e = np.array([v for _, v in st.energy_history])
    worst_energy = float(np.max(np.diff(e))) / (1 + e[0])
    mean_err = abs(st.mean - weighted_mean(u0)) / abs(weighted_mean(u0))
    pc = detect_plateaus(st.u, 0.1)
    nplat = sum(1 for p in pc.plateaus if not p.degenerate)
    cover = plateau_coverage(pc)
    m = 128
    up = GridFunction((0.0, 1.0), periodic_ramp(np.arange(m) / m), periodic=True)
    ps = initial_state(up, 0.1, PM, PERIODIC)
    for _ in range(1000):
        ps = flow_step(ps, PM, PERIODIC)
    per_mean = abs(ps.mean - weighted_mean(up)) / abs(weighted_mean(up))
    ep = np.array([v for _, v in ps.energy_history])
    worst_energy = max(worst_energy, float(np.max(np.diff(ep))) / (1 + ep[0]))
    dt = time.perf_counter() - t0
    ok = (worst_energy <= 1e-10 and mean_err <= 1e-12 and per_mean <= 1e-12 and nplat <= 3
          and cover >= 0.9 and dt < 120)
    assert report(capsys, "C10 flow properties", ok,
                  f"max energy increase {worst_energy:.1e} (tol 1e-10 rel), mean drift "
                  f"{mean_err:.1e}/{per_mean:.1e} (tol 1e-12), ramp -> {nplat} plateaus covering "
                  f"{cover:.1%}; {st.accepted} steps; {dt:.1f}s < 120s")


def test_c11_equicoercivity(capsys, minimizers_1d):
    runs, _ = minimizers_1d
    tv = [r.tv for r in runs]
    ok = all(1.0 - 1e-12 <= v <= 1.1 for v in tv)
    assert report(capsys, "C11 equicoercivity surrogate", ok,
                  "TV=" + ", ".join(f"{v:.6f}" for v in tv) + " in [1, 1.1]")


if __name__ == "__main__":
    raise SystemExit(pytest.main(["-q", __file__]))
