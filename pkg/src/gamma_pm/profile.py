"""Optimal one-dimensional transition profiles.

The profile problem is

    e_a(s) = 1/2 inf { int_0^eta (psi'')^2 + |psi'|^a :
                       eta > 0, psi(0) = 0, psi(eta) = s, psi'(0) = psi'(eta) = 0 }.

For a = 0 the second integrand is read as the support length eta, which makes
the inner problem a quadratic whose minimiser is the clamped cubic
s (3 tau^2 - 2 tau^3); the optimal width is (36 s^2)^(1/4) and the value is
(2 sqrt 6 / 3) sqrt s.  For a > 0 the inner problem is nonconvex and the
computed energies are upper bounds obtained from a local minimiser.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import spsolve

from .errors import ConvergenceError, DomainError, ResolutionError
from .functions import GrowthFunction, jump_exponent
from .grid import GridFunction
from .optim import minimize_banded
from .stencils import d1_matrix, d2_matrix, trapezoid_weights

SIGMA0_EXACT = 2.0 * math.sqrt(6.0) / 3.0
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ProfileOptions:
    n: int = 512
    max_outer: int = 80
    eta_rtol: float = 1e-4
    inner_tol: float = 1e-7
    inner_maxiter: int = 400
    eps_rel: float = 1e-8
    scan_points: int = 9
    scan_range: tuple = (0.1, 10.0)


@dataclass(frozen=True)
class ProfileSolution:
    a: float
    s: float
    eta: float
    psi: GridFunction
    energy: float
    inner_iterations: int
    outer_iterations: int

    @property
    def slope(self):
        h = self.psi.spacing[0]
        return d1_matrix(self.psi.shape[0], h) @ self.psi.values

    @property
    def curvature(self):
        h = self.psi.spacing[0]
        return d2_matrix(self.psi.shape[0], h) @ self.psi.values


def _clamped_map(n, s):
    """psi = P v + q with psi_0 = 0, psi_{n-1} = s and zero one-sided slopes.

    Free unknowns are psi_2 .. psi_{n-3}; psi_1 = psi_2 / 4 and
    psi_{n-2} = (3 s + psi_{n-3}) / 4 zero the (-3, 4, -1) end stencils.
    """
    m = n - 4
    rows = list(range(2, n - 2)) + [1, n - 2]
    cols = list(range(m)) + [0, m - 1]
    vals = [1.0] * m + [0.25, 0.25]
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n, m))
    q = np.zeros(n)
    q[n - 2] = 0.75 * s
    q[n - 1] = s
    return P, q


class _Inner:
    """Discrete inner problem at fixed (a, s, n); evaluated for varying eta."""

    def __init__(self, a, s, opts):
        self.a, self.s, self.opts = a, s, opts
        self.n = opts.n
        self.P, self.q = _clamped_map(self.n, s)

    def solve(self, eta):
        n, a, s = self.n, self.a, self.s
        h = eta / (n - 1)
        D1, D2 = d1_matrix(n, h), d2_matrix(n, h)
        w = trapezoid_weights(n, h)
        P, q = self.P, self.q
        W = sp.diags(w)
        A = (P.T @ D2.T @ W @ D2 @ P).tocsr()
        if a == 0.0:
            v = spsolve(A.tocsc(), -(P.T @ (D2.T @ (w * (D2 @ q)))))
            psi = P @ v + q
            b = D2 @ psi
            return 0.5 * (w @ (b * b) + eta), psi, 0
        phi = GrowthFunction.power(a, self.opts.eps_rel * s / eta)

        def fun(v):
            u = P @ v + q
            p, b = D1 @ u, D2 @ u
            e = 0.5 * (w @ (b * b) + w @ phi(p))
            g = P.T @ (D2.T @ (w * b) + 0.5 * (D1.T @ (w * phi.derivative(p))))
            return e, g

        def hess(v):
            p = D1 @ (P @ v + q)
            return A + 0.5 * (P.T @ D1.T @ sp.diags(w * phi.second_derivative(p)) @ D1 @ P)

        tau = np.linspace(0.0, 1.0, n)
        v0 = (s * (3 * tau**2 - 2 * tau**3))[2:-2]
        res = minimize_banded(fun, v0, A, hess, tol_rel=self.opts.inner_tol,
                              maxiter=self.opts.inner_maxiter, max_newton=20,
                              gradient_check=False)
        return res.energy, P @ res.v + q, res.iterations + res.newton_steps


def solve_profile(a, s, n=None, opts=None):
    """Minimise the discrete profile energy over the interior values and eta."""
    opts = opts or ProfileOptions()
    if n is not None:
        opts = ProfileOptions(**{**opts.__dict__, "n": int(n)})
    a = float(a)
    s = float(s)
    if not (0.0 <= a < 1.0):
        raise DomainError(f"growth exponent a must lie in [0,1), got {a}")
    if s < 0 or not math.isfinite(s):
        raise DomainError("s must be a finite nonnegative number")
    if opts.n < 32:
        raise DomainError("profile solves need n >= 32")
    if s == 0.0:
        # the infimum 0 is approached as eta -> 0; report the zero profile on the unit scale
        eta = math.sqrt(6.0)
        psi = GridFunction((0.0, eta), np.zeros(opts.n))
        return ProfileSolution(a, 0.0, eta, psi, 0.0, 0, 0)

    inner = _Inner(a, s, opts)
    # the a > 0 widths scale like s^((2-a)/(4-a)); keep the seed on that curve
    seed = math.sqrt(6.0) * s ** ((2.0 - a) / (4.0 - a))
    cache = {}
    total_inner = 0

    def energy(log_eta):
        nonlocal total_inner
        if log_eta not in cache:
            e, psi, it = inner.solve(math.exp(log_eta))
            cache[log_eta] = (e, psi)
            total_inner += it
        return cache[log_eta][0]

    lo, hi = math.log(seed * opts.scan_range[0]), math.log(seed * opts.scan_range[1])
    grid = np.linspace(lo, hi, opts.scan_points)
    vals = [energy(x) for x in grid]
    k = int(np.argmin(vals))
    if k == 0 or k == len(grid) - 1:
        raise ConvergenceError("eta search did not bracket a minimum")
    a_, b_ = grid[k - 1], grid[k + 1]
    c_ = b_ - GOLDEN * (b_ - a_)
    d_ = a_ + GOLDEN * (b_ - a_)
    outer = 0
    while b_ - a_ > opts.eta_rtol:
        if outer >= opts.max_outer:
            raise ConvergenceError("eta search exceeded max_outer iterations")
        if energy(c_) < energy(d_):
            b_, d_ = d_, c_
            c_ = b_ - GOLDEN * (b_ - a_)
        else:
            a_, c_ = c_, d_
            d_ = a_ + GOLDEN * (b_ - a_)
        outer += 1
    best = min(cache, key=lambda x: cache[x][0])
    eta = math.exp(best)
    e, psi = cache[best]
    return ProfileSolution(a, s, eta, GridFunction((0.0, eta), psi), float(e),
                           total_inner, outer + len(grid))


def sigma_estimate(a, opts=None):
    """sigma_a = e_a(1), Richardson-extrapolated from n and 2n samples."""
    opts = opts or ProfileOptions()
    e1 = solve_profile(a, 1.0, opts.n, opts).energy
    e2 = solve_profile(a, 1.0, 2 * opts.n - 1, opts).energy
    return e2 + (e2 - e1) / 3.0


def scaling_check(a, s_list, opts=None):
    """Least-squares exponent of e_a(s) in s and the max relative misfit."""
    s_arr = np.asarray(s_list, dtype=float)
    if s_arr.size < 3:
        raise DomainError("scaling_check needs at least three values of s")
    if np.any(s_arr <= 0) or s_arr.max() / s_arr.min() < 8.0:
        raise DomainError("s values must be positive and span a factor of at least 8")
    e = np.array([solve_profile(a, s, opts=opts).energy for s in s_arr])
    slope, icpt = np.polyfit(np.log(s_arr), np.log(e), 1)
    fit = np.exp(icpt) * s_arr ** slope
    return float(slope), float(np.max(np.abs(e / fit - 1.0)))


def predicted_exponent(a):
    return jump_exponent(a)


def profile_interpolant(profile):
    """C^1 interpolant of psi on [0, eta] with the clamped end slopes."""
    t = profile.psi.coords(0)
    return CubicSpline(t, profile.psi.values, bc_type=((1, 0.0), (1, 0.0)))


def recovery_values(profile, nu, x):
    """u_nu(x): 0 for x < 0, psi(x/nu) on the layer, s beyond nu*eta."""
    x = np.asarray(x, dtype=float)
    spline = profile_interpolant(profile)
    t = np.clip(x / nu, 0.0, profile.eta)
    out = spline(t)
    out = np.where(x <= 0.0, 0.0, out)
    return np.where(x >= nu * profile.eta, profile.s, out)


def build_recovery_1d(profile, nu, window, n=None, min_layer_samples=16):
    """Sample the rescaled profile on ``window`` = (lo, hi) with lo < 0 < eta*nu < hi.

    The default resolution places 64 samples across the transition layer.
    """
    lo, hi = (float(window[0]), float(window[1]))
    if not (0.0 < nu <= 1.0):
        raise DomainError("nu must lie in (0,1]")
    width = profile.eta * nu
    if not (lo < 0.0 < width < hi):
        raise DomainError("the window must contain the layer [0, eta*nu]")
    if n is None:
        n = int(math.ceil((hi - lo) / (width / 64.0))) + 1
    g = GridFunction((lo, hi), np.zeros(int(n)))
    x = g.coords(0)
    inside = np.count_nonzero((x > 0.0) & (x < width))
    if inside < min_layer_samples:
        raise ResolutionError(
            f"only {inside} samples inside the layer, need {min_layer_samples}")
    return g.with_values(recovery_values(profile, nu, x))
