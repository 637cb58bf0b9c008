"""L2 gradient flow of the 1D perturbed energy.

W u_t = -grad F_nu(u) with W the quadrature weights.  Each step treats the
fourth-order part implicitly and the growth term explicitly,

    (W + dt Q) delta = -dt grad F_nu(u),

and keeps the step only if the discrete energy does not increase.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy.linalg import solveh_banded

from .energy import Fnu1D, _check_nu
from .errors import DomainError, ResolutionError, StiffnessError
from .grid import GridFunction
from .partition import PiecewiseConstant1D, Plateau
from .stencils import to_banded_upper

PERIODIC = "periodic"
NEUMANN = "neumann"
BOUNDARY_CONDITIONS = (PERIODIC, NEUMANN)
NODES_PER_NU = 8


@dataclass(frozen=True)
class FlowState:
    u: GridFunction
    t: float
    nu: float
    dt: float
    energy_history: tuple = ()
    parts_history: tuple = ()
    accepted: int = 0
    rejected: int = 0

    @property
    def energy(self):
        return self.energy_history[-1][1] if self.energy_history else math.nan

    @property
    def mean(self):
        return weighted_mean(self.u)


@dataclass
class FlowRun:
    state: FlowState
    snapshots: list = field(default_factory=list)


def weighted_mean(u):
    v = u.values
    if u.periodic:
        return float(np.mean(v))
    w = np.ones(v.size)
    w[0] = w[-1] = 0.5
    return float(w @ v / w.sum())


class _Stepper:
    def __init__(self, n, h, nu, phi, bc):
        self.bc = bc
        self.F = Fnu1D(n, h, nu, phi, periodic=(bc == PERIODIC))
        self.w = self.F.w
        if bc == PERIODIC:
            k = np.arange(n)
            lam2 = (2.0 * np.cos(2.0 * np.pi * k / n) - 2.0) / (h * h)
            self.qsym = nu ** 3 * h * lam2 * lam2
        else:
            self.Qb = to_banded_upper(self.F.Q, 3)

    def solve(self, rhs, dt):
        if self.bc == PERIODIC:
            return np.real(np.fft.ifft(np.fft.fft(rhs) / (self.w[0] + dt * self.qsym)))
        ab = dt * self.Qb
        ab[-1] += self.w
        return solveh_banded(ab, rhs)

    def propose(self, u, dt):
        # the gradient ignores constants; shifting by u[0] keeps constant data exactly fixed
        delta = self.solve(-dt * self.F.gradient(u - u[0]), dt)
        # the exact step has zero weighted mean; remove round-off
        delta -= (self.w @ delta) / self.w.sum()
        return u + delta


_STEPPERS = {}


def _stepper(u, nu, phi, bc):
    key = (u.shape[0], u.spacing[0], nu, repr(phi), bc)
    st = _STEPPERS.get(key)
    if st is None:
        if len(_STEPPERS) > 16:
            _STEPPERS.clear()
        st = _STEPPERS[key] = _Stepper(u.shape[0], u.spacing[0], nu, phi, bc)
    return st


def _check(u, nu, bc):
    if bc not in BOUNDARY_CONDITIONS:
        raise DomainError(f"bc must be one of {BOUNDARY_CONDITIONS}")
    if u.dim != 1:
        raise DomainError("the flow is one-dimensional")
    if (bc == PERIODIC) != u.periodic:
        raise DomainError("periodic bc needs a periodic grid and vice versa")
    if u.spacing[0] > nu / NODES_PER_NU * (1 + 1e-12):
        raise ResolutionError(f"grid spacing must resolve nu with {NODES_PER_NU} nodes")


def initial_state(u0, nu, phi, bc=NEUMANN, dt=1e-4):
    nu = _check_nu(nu)
    _check(u0, nu, bc)
    st = _stepper(u0, nu, phi, bc)
    hs, gr = st.F.parts(u0.values)
    return FlowState(u0, 0.0, nu, float(dt), ((0.0, hs + gr),), ((hs, gr),))


def _advance(st, u, e_old, e0, dt, dt_max, dt_min, dt_cap, t):
    slack = 1e-14 * (1.0 + abs(e0))
    rejected = 0
    while True:
        step = dt if dt_cap is None else min(dt, dt_cap)
        v = st.propose(u, step)
        hs, gr = st.F.parts(v)
        e_new = hs + gr
        if np.all(np.isfinite(v)) and e_new <= e_old + slack:
            break
        rejected += 1
        dt *= 0.5
        if dt < dt_min:
            raise StiffnessError(f"time step fell below {dt_min:g} at t = {t:.6g}")
    grown = min(1.2 * dt, dt_max) if step == dt else dt
    return v, hs, gr, step, grown, rejected


def flow_step(state, phi, bc=NEUMANN, dt_max=1e-2, dt_min=1e-12, dt_cap=None):
    """One accepted semi-implicit step; rejected trials halve dt."""
    _check(state.u, state.nu, bc)
    if not state.dt > 0:
        raise DomainError("dt must be positive")
    st = _stepper(state.u, state.nu, phi, bc)
    e_old = state.energy if state.energy_history else st.F.energy(state.u.values)
    e0 = state.energy_history[0][1] if state.energy_history else e_old
    v, hs, gr, step, grown, rej = _advance(st, state.u.values, e_old, e0, state.dt,
                                           dt_max, dt_min, dt_cap, state.t)
    t = state.t + step
    return replace(state, u=state.u.with_values(v), t=t, dt=grown,
                   energy_history=state.energy_history + ((t, hs + gr),),
                   parts_history=state.parts_history + ((hs, gr),),
                   accepted=state.accepted + 1, rejected=state.rejected + rej)


def flow_run(u0, T, nu, phi, bc=NEUMANN, snapshot_every=100, dt0=1e-4, dt_max=1e-2,
             dt_min=1e-12, max_steps=10 ** 6):
    """Advance to time T; snapshots (t, values) every ``snapshot_every`` steps and at T.

    Equivalent to repeated ``flow_step`` calls, with the histories kept in
    lists while running.
    """
    state = initial_state(u0, nu, phi, bc, dt0)
    st = _stepper(u0, state.nu, phi, bc)
    u = u0.values.copy()
    t, dt = 0.0, state.dt
    energies = list(state.energy_history)
    parts = list(state.parts_history)
    e0 = energies[0][1]
    accepted = rejected = 0
    snaps = [(0.0, u.copy())]
    while t < T * (1 - 1e-14):
        if accepted >= max_steps:
            raise StiffnessError(f"step budget {max_steps} exhausted at t = {t:.6g}")
        u, hs, gr, step, dt, rej = _advance(st, u, energies[-1][1], e0, dt, dt_max, dt_min,
                                            T - t, t)
        t += step
        accepted += 1
        rejected += rej
        energies.append((t, hs + gr))
        parts.append((hs, gr))
        if snapshot_every and accepted % snapshot_every == 0:
            snaps.append((t, u.copy()))
    if snaps[-1][0] != t:
        snaps.append((t, u.copy()))
    final = replace(state, u=u0.with_values(u), t=t, dt=dt, energy_history=tuple(energies),
                    parts_history=tuple(parts), accepted=accepted, rejected=rejected)
    return FlowRun(final, snaps)


def _runs(mask):
    """(start, stop) index pairs of the True runs of a boolean array."""
    d = np.diff(np.concatenate([[0], mask.astype(int), [0]]))
    return list(zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)))


def detect_plateaus(u, slope_tol):
    """Piecewise-constant summary of a 1D field.

    Runs of nodes with |u'| <= slope_tol become plateaus at their mean value.
    Each transition zone between plateaus gets one breakpoint at its
    steepest point (the middle of a tie).  If a transition touches an end of
    the interval, a zero-width degenerate plateau holds the end value.
    """
    if not slope_tol > 0:
        raise DomainError("slope_tol must be positive")
    x = u.coords(0)
    v = u.values
    slope = np.abs(np.gradient(v, x))
    runs = _runs(slope <= slope_tol)
    plats = []
    if not runs or runs[0][0] > 0:
        plats.append((0, 0, float(v[0]), True))
    for a, b in runs:
        plats.append((a, b - 1, float(np.mean(v[a:b])), False))
    if not runs or runs[-1][1] < v.size:
        plats.append((v.size - 1, v.size - 1, float(v[-1]), True))
    bps = []
    for p, q in zip(plats[:-1], plats[1:]):
        lo, hi = p[1], q[0]
        zone = np.arange(lo, hi + 1)
        s = slope[zone]
        ties = zone[s >= s.max() * (1 - 1e-12)]
        m = len(ties)
        if m == len(zone):
            bp = 0.5 * (x[lo] + x[hi])
        elif m % 2:
            bp = x[ties[m // 2]]
        else:
            bp = 0.5 * (x[ties[m // 2 - 1]] + x[ties[m // 2]])
        if not (x[0] < bp < x[-1]):
            bp = 0.5 * (x[lo] + x[hi])
        bps.append(float(bp))
    plateaus = tuple(Plateau(float(x[a]), float(x[b]), val, deg) for a, b, val, deg in plats)
    ivl = (u.extent[0], u.extent[1])
    return PiecewiseConstant1D(bps, [p[2] for p in plats], ivl, plateaus)


def plateau_coverage(pc):
    lo, hi = pc.interval
    return sum(p.end - p.start for p in pc.plateaus if not p.degenerate) / (hi - lo)


def ramp(x, height=1.0, width=0.1, center=0.5):
    return 0.5 * height * (1.0 + np.tanh((x - center) / width))


def periodic_ramp(x, height=1.0, width=0.05):
    """Smoothed up-step at 1/4 and down-step at 3/4 on the unit period."""
    return ramp(x, height, width, 0.25) - ramp(x, height, width, 0.75)
