"""Preconditioned quasi-Newton minimisation for banded 1D energies.

The energies minimised here are sums of a stiff quadratic (the second
derivative term) and a mild nonlinearity.  L-BFGS runs in the variables
z = R v where R^T R is the Cholesky factor of the quadratic part, which makes
the problem well conditioned; Levenberg-Marquardt damped Newton steps with the banded
Hessian then drive the gradient to the requested tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, cholesky_banded, cho_solve_banded, solve_banded
from scipy.optimize import minimize

from .errors import GammaPMError
from .stencils import bandwidth, to_banded_upper


class GradientCheckError(GammaPMError):
    """Analytic and finite-difference directional derivatives disagree."""


@dataclass
class OptimResult:
    v: np.ndarray
    energy: float
    grad_norm: float
    iterations: int
    newton_steps: int
    converged: bool


def check_gradient(fun, v, seed=0, rtol=1e-5):
    """Compare g.d with a central difference along a random direction d."""
    rng = np.random.default_rng(seed)
    d = rng.standard_normal(v.size)
    e0, g = fun(v)
    scale = 1.0 + np.max(np.abs(v), initial=0.0)
    h = 1e-5 * scale
    ep, _ = fun(v + h * d)
    em, _ = fun(v - h * d)
    fd = (ep - em) / (2.0 * h)
    an = float(g @ d)
    den = max(abs(fd), abs(an), 1e-10 * (1.0 + abs(e0)))
    err = abs(fd - an) / den
    if err > rtol:
        raise GradientCheckError(f"gradient check failed: relative error {err:.3e}")
    return err


def _band_factor(A, shift=0.0):
    k = max(bandwidth(A), 1)
    ab = to_banded_upper(A, k)
    if shift:
        ab[k] += shift
    return cholesky_banded(ab), k


def minimize_banded(fun, v0, precond, hess=None, tol_rel=1e-8, maxiter=5000,
                    max_newton=200, gradient_check=True, seed=0):
    """Minimise ``fun`` (returning energy and gradient) starting at ``v0``.

    ``precond`` is a sparse symmetric positive definite matrix approximating
    the Hessian; ``hess(v)`` optionally returns the sparse exact Hessian for
    the Newton polish.  Convergence means ||grad||_2 <= tol_rel (1 + |E|).
    """
    v0 = np.asarray(v0, dtype=float).copy()
    n = v0.size
    if gradient_check and n > 0:
        check_gradient(fun, v0, seed)
    if n == 0:
        e, _ = fun(v0)
        return OptimResult(v0, float(e), 0.0, 0, 0, True)

    A = sp.csr_matrix(precond)
    diag_scale = float(np.max(np.abs(A.diagonal())))
    R, k = _band_factor(A, 1e-14 * diag_scale)
    RT = np.zeros((k + 1, n))
    for d in range(k + 1):
        RT[d, : n - d] = R[k - d, d:]

    def to_z(v):
        z = np.zeros(n)
        for d in range(k + 1):
            z[: n - d] += R[k - d, d:] * v[d:]
        return z

    def fz(z):
        v = solve_banded((0, k), R, z)
        e, g = fun(v)
        return e, solve_banded((k, 0), RT, g)

    gtol = 1e-3 * tol_rel * (1.0 + abs(fun(v0)[0]))
    res = minimize(fz, to_z(v0), jac=True, method="L-BFGS-B",
                   options={"maxiter": maxiter, "gtol": gtol, "ftol": 1e-15, "maxcor": 30})
    v = solve_banded((0, k), R, res.x)
    iters = int(res.nit)
    e, g = fun(v)
    gn = float(np.linalg.norm(g))
    steps = 0
    lam = 0.0
    lam_floor = 1e-13 * diag_scale
    while gn > tol_rel * (1.0 + abs(e)) and hess is not None and steps < max_newton:
        steps += 1
        H = sp.csr_matrix(hess(v))
        try:
            Rh, _ = _band_factor(H, lam)
        except LinAlgError:
            lam = max(10.0 * lam, lam_floor)
            continue
        direction = -cho_solve_banded((Rh, False), g)
        vt = v + direction
        et, gt = fun(vt)
        gnt = float(np.linalg.norm(gt))
        if et <= e + 1e-4 * float(g @ direction) or (
                et <= e + 1e-12 * (1.0 + abs(e)) and gnt < gn):
            v, e, g, gn = vt, et, gt, gnt
            lam = 0.0 if lam <= lam_floor else 0.1 * lam
        else:
            lam = max(10.0 * lam, lam_floor)
    converged = gn <= tol_rel * (1.0 + abs(e))
    return OptimResult(v, float(e), gn, iters, steps, bool(converged))
