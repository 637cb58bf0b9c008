"""The perturbed energies F_nu on 1D and 2D grids, their minimisation and
recovery sequences.

F_nu(u) = 1/2 int nu^3 |D^2 u|^2 + phi(|Du|) / (nu phi(1/nu)).
"""
from __future__ import annotations

from dataclasses import dataclass
import math
import warnings

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, DomainError, ResolutionError
from .functions import SPECTRAL_RADIUS, GrowthFunction, hessian_norm_array
from .grid import GridFunction
from .optim import minimize_banded
from .profile import recovery_values
from .stencils import (d1_matrix, d2_matrix, periodic_d1, periodic_d2, trapezoid_weights)
from . import geometry as geo


@dataclass(frozen=True)
class EnergyBreakdown:
    hessian_term: float
    gradient_term: float
    total: float
    nu: float

    def to_json(self):
        return {"hessianTerm": self.hessian_term, "gradientTerm": self.gradient_term,
                "total": self.total, "nu": self.nu}


@dataclass(frozen=True)
class MinimizeReport:
    minimizer: GridFunction
    energy: EnergyBreakdown
    iterations: int
    grad_norm: float
    tv: float
    converged: bool


def _check_nu(nu):
    nu = float(nu)
    if not (0.0 < nu <= 1.0):
        raise DomainError(f"nu must lie in (0,1], got {nu}")
    return nu


def normalisation(phi, nu):
    """nu * phi(1/nu), evaluated exactly."""
    return nu * float(phi(1.0 / nu))


def pm_epsilon_from_nu(nu):
    """eps = nu^2 sqrt(log(1 + 1/nu^2)), the Perona-Malik regularisation scale."""
    nu = _check_nu(nu)
    return nu * nu * math.sqrt(math.log1p(1.0 / (nu * nu)))


class Fnu1D:
    """Discrete F_nu on a fixed 1D grid; energy, gradient and Hessian in u."""

    def __init__(self, n, h, nu, phi, periodic=False):
        self.nu = _check_nu(nu)
        self.phi = phi
        self.n, self.h = n, h
        if periodic:
            self.D1, self.D2 = periodic_d1(n, h), periodic_d2(n, h)
            self.w = np.full(n, float(h))
        else:
            if n < 4:
                raise DomainError("1D grids need at least 4 samples")
            self.D1, self.D2 = d1_matrix(n, h), d2_matrix(n, h)
            self.w = trapezoid_weights(n, h)
        self.c = normalisation(phi, self.nu)
        self.Q = (self.nu ** 3 * (self.D2.T @ sp.diags(self.w) @ self.D2)).tocsr()

    def parts(self, u):
        p, b = self.D1 @ u, self.D2 @ u
        hess = 0.5 * self.nu ** 3 * float(self.w @ (b * b))
        grad = 0.5 * float(self.w @ self.phi(p)) / self.c
        return hess, grad

    def energy(self, u):
        hs, gr = self.parts(u)
        return hs + gr

    def gradient(self, u):
        p = self.D1 @ u
        return self.Q @ u + 0.5 * (self.D1.T @ (self.w * self.phi.derivative(p))) / self.c

    def phi_gradient(self, u):
        p = self.D1 @ u
        return 0.5 * (self.D1.T @ (self.w * self.phi.derivative(p))) / self.c

    def hessian(self, u):
        p = self.D1 @ u
        return self.Q + 0.5 * (self.D1.T @ sp.diags(self.w * self.phi.second_derivative(p))
                               @ self.D1) / self.c


def fnu_1d(u, nu, phi):
    """F_nu of a 1D grid function (trapezoid rule, second-order stencils)."""
    nu = _check_nu(nu)
    if u.dim != 1:
        raise DomainError("fnu_1d needs a 1D grid function")
    F = Fnu1D(u.shape[0], u.spacing[0], nu, phi, u.periodic)
    hs, gr = F.parts(u.values)
    return EnergyBreakdown(hs, gr, hs + gr, nu)


def fnu_2d(u, nu, phi, mode=SPECTRAL_RADIUS):
    """F_nu of a 2D grid function with the full Hessian and ``hessian_norm`` per node."""
    nu = _check_nu(nu)
    if u.dim != 2:
        raise DomainError("fnu_2d needs a 2D grid function")
    nx, ny = u.shape
    if nx < 4 or ny < 4:
        raise DomainError("2D grids need at least 4 samples per axis")
    hx, hy = u.spacing
    U = u.values
    D1x, D2x = d1_matrix(nx, hx), d2_matrix(nx, hx)
    D1y, D2y = d1_matrix(ny, hy), d2_matrix(ny, hy)
    ux = D1x @ U
    uy = (D1y @ U.T).T
    uxx = D2x @ U
    uyy = (D2y @ U.T).T
    uxy = (D1y @ ux.T).T
    W = np.outer(trapezoid_weights(nx, hx), trapezoid_weights(ny, hy))
    M = hessian_norm_array(uxx, uxy, uyy, mode)
    c = normalisation(phi, nu)
    hs = 0.5 * nu ** 3 * float(np.sum(W * M * M))
    gr = 0.5 * float(np.sum(W * phi(np.hypot(ux, uy)))) / c
    return EnergyBreakdown(hs, gr, hs + gr, nu)


def total_variation(values):
    return float(np.sum(np.abs(np.diff(values))))


def minimize_fnu_1d(s, L, nu, phi, n=None, init=None, tol_rel=1e-8, maxiter=20000,
                    nodes_per_nu=32):
    """Local minimiser of the discrete F_nu on (0, L) with clamped data (0, s).

    The first two nodes are pinned to 0 and the last two to s, which imposes
    u(0) = 0, u(L) = s and vanishing one-sided slopes.  The default start is
    a clamped cubic transition of width sqrt(6) nu centred in the interval.
    """
    nu = _check_nu(nu)
    L = float(L)
    if n is None:
        n = int(math.ceil(nodes_per_nu * L / nu)) + 1
    n = int(n)
    h = L / (n - 1)
    if h > nu / nodes_per_nu * (1.0 + 1e-12):
        raise ResolutionError(f"spacing {h:.3g} does not give {nodes_per_nu} nodes per nu")
    if math.sqrt(6.0) * nu > L / 4:
        warnings.warn("the transition layer is wide compared with the interval", stacklevel=2)
    F = Fnu1D(n, h, nu, phi)
    x = np.linspace(0.0, L, n)
    if init is None:
        eta = math.sqrt(6.0) * nu
        tau = np.clip((x - 0.5 * L + 0.5 * eta) / eta, 0.0, 1.0)
        u0 = s * (3 * tau**2 - 2 * tau**3)
    else:
        u0 = np.asarray(init.values if isinstance(init, GridFunction) else init, dtype=float)
    m = n - 4
    P = sp.csr_matrix((np.ones(m), (np.arange(2, n - 2), np.arange(m))), shape=(n, m))
    q = np.zeros(n)
    q[n - 2:] = s

    def fun(v):
        u = P @ v + q
        return F.energy(u), P.T @ F.gradient(u)

    def hess(v):
        return P.T @ F.hessian(P @ v + q) @ P

    A = (P.T @ F.Q @ P).tocsr()
    res = minimize_banded(fun, u0[2:-2], A, hess, tol_rel=tol_rel, maxiter=maxiter)
    if not res.converged:
        raise ConvergenceError(
            f"gradient norm {res.grad_norm:.3e} above {tol_rel:g} (1 + E)")
    u = P @ res.v + q
    g = GridFunction((0.0, L), u)
    hs, gr = F.parts(u)
    return MinimizeReport(g, EnergyBreakdown(hs, gr, hs + gr, nu),
                          res.iterations + res.newton_steps, res.grad_norm,
                          total_variation(u), True)


def interface_signed_distance(u, inside, X, Y):
    """Signed distance to the boundary of the union of cells with value ``inside``.

    Positive inside.  Only edges between an inside and an outside cell count
    as interface; the domain boundary does not.
    """
    e = u.edges
    ins = np.isclose(u.values, inside)
    sel = ins[e.a] != ins[e.b]
    pts = np.stack([X, Y], axis=-1)
    d = np.full(X.shape, np.inf)
    for k in np.flatnonzero(sel):
        d = np.minimum(d, geo.point_segment_distance(pts, e.p0[k], e.p1[k]))
    # grid nodes on the outer boundary are pulled just inside before lookup
    x0, y0, x1, y1 = u.domain
    pad = 1e-7 * max(x1 - x0, y1 - y0)
    q = pts.reshape(-1, 2).copy()
    q[:, 0] = np.clip(q[:, 0], x0 + pad, x1 - pad)
    q[:, 1] = np.clip(q[:, 1], y0 + pad, y1 - pad)
    vals = u.evaluate(q)
    sign = np.where(np.isclose(vals, inside), 1.0, -1.0).reshape(X.shape)
    return sign * d


def grid_for_extent(extent, shape):
    return GridFunction(extent, np.zeros(shape))


def build_recovery_2d(profile, nu, signed_distance=None, partition=None, inside=None,
                      extent=(0.0, 1.0, 0.0, 1.0), shape=(512, 512), min_layer_cells=8):
    """u_nu(d(x)) for the 1D recovery profile u_nu and a signed distance d.

    ``signed_distance`` is a GridFunction, or a callable d(X, Y); otherwise
    the distance is computed from ``partition`` and the cell value ``inside``.
    The transition occupies 0 < d < eta nu, inside the set.
    """
    nu = _check_nu(nu)
    if isinstance(signed_distance, GridFunction):
        grid = signed_distance
        d = signed_distance.values
    else:
        grid = grid_for_extent(extent, shape)
        X, Y = grid.mesh()
        if signed_distance is not None:
            d = signed_distance(X, Y)
        elif partition is not None and inside is not None:
            d = interface_signed_distance(partition, inside, X, Y)
        else:
            raise DomainError("need a signed distance or a partition with an inside value")
    h = max(grid.spacing)
    if profile.eta * nu < min_layer_cells * h:
        raise ResolutionError(
            f"layer width {profile.eta * nu:.3g} spans fewer than {min_layer_cells} cells")
    return grid.with_values(recovery_values(profile, nu, d))
