"""Limit jump energies, slicing along lines and the slicing identity."""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import DegenerateSliceError, DomainError
from . import geometry as geo
from .partition import PiecewiseConstant1D, PiecewisePolyFunction


@dataclass(frozen=True)
class Window:
    """The open set {dist(x, rect) < radius}; radius 0 means the closed rectangle."""

    rect: tuple
    radius: float = 0.0

    def clip(self, p0, p1):
        if self.radius > 0:
            return geo.segment_clip_dilated_rect(p0, p1, self.rect, self.radius)
        return geo.segment_clip_rect(p0, p1, self.rect)


def edge_lengths_in(edges, window=None):
    """Length of each edge inside ``window`` (a Window, a rectangle or None)."""
    lengths = edges.length
    if window is None or len(edges) == 0:
        return lengths
    if not isinstance(window, Window):
        window = Window(tuple(window))
    out = np.zeros(len(edges))
    for k in range(len(edges)):
        r = window.clip(edges.p0[k], edges.p1[k])
        if r is not None:
            out[k] = lengths[k] * max(r[1] - r[0], 0.0)
    return out


def _jump_data(u, window):
    e = u.jump_edges()
    jumps = np.abs(u.values[e.b] - u.values[e.a])
    return e, jumps, edge_lengths_in(e, window)


def limit_energy_1d(u, theta):
    """Sum of theta(|jump|) over the breakpoints of a 1D piecewise-constant u."""
    j = u.jumps
    return float(np.sum(theta(j[j != 0]))) if j.size else 0.0


def limit_energy_2d(u, theta, window=None):
    """Sum over interior edges of theta(|jump|) times the edge length."""
    e, jumps, lengths = _jump_data(u, window)
    if len(e) == 0:
        return 0.0
    return float(np.sum(theta(jumps) * lengths))


def basis_vectors(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c, s]), np.array([-s, c])


def anisotropic_energy_2d(u, theta, basis=0.0, window=None):
    """Jump energy weighted by the 1-norm of the normal in the basis rotated by ``basis``."""
    e, jumps, lengths = _jump_data(u, window)
    if len(e) == 0:
        return 0.0
    b1, b2 = basis_vectors(basis)
    w = np.abs(e.normal @ b1) + np.abs(e.normal @ b2)
    return float(np.sum(w * theta(jumps) * lengths))


def truncate(u, T):
    return u.with_values(np.clip(u.values, -T, T))


@dataclass(frozen=True)
class SliceSpec:
    """The line {y xi_perp + t xi : t real} with xi_perp = (-xi_2, xi_1)."""

    xi: tuple
    y: float

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        if xi.shape != (2,) or abs(np.linalg.norm(xi) - 1.0) > 1e-12:
            raise DomainError("xi must be a unit vector in the plane")
        object.__setattr__(self, "xi", tuple(xi.tolist()))

    @property
    def perp(self):
        return np.array([-self.xi[1], self.xi[0]])

    def point(self, t):
        return self.y * self.perp + np.multiply.outer(np.asarray(t, float), np.asarray(self.xi))


def offset_range(domain, xi):
    """Range of y for which the line of direction xi meets the rectangle."""
    x0, y0, x1, y1 = domain
    corners = geo.rect_polygon(x0, y0, x1, y1)
    perp = np.array([-xi[1], xi[0]])
    proj = corners @ perp
    return float(proj.min()), float(proj.max())


def slice_pc(u, spec, return_shift=False, max_shifts=8):
    """Restriction of ``u`` to the line of ``spec``.

    Returns a PiecewiseConstant1D in the line parameter t (None if the line
    misses the domain).  If the line passes within 1e-9 * size of a vertex it
    is moved by that amount along xi_perp, repeatedly if needed; the total
    shift is returned when ``return_shift`` is set.
    """
    xi = np.asarray(spec.xi)
    tol = u.tol
    y = spec.y
    shift = 0.0
    verts = np.vstack(u.cells)
    for _ in range(max_shifts + 1):
        perp = np.array([-xi[1], xi[0]])
        d = verts @ perp - y
        if not np.any(np.abs(d) <= tol):
            break
        for poly in u.cells:
            dd = poly @ perp - y
            on = np.abs(dd) <= tol
            if np.any(on & np.roll(on, -1)):
                raise DegenerateSliceError("the slicing line runs along a cell edge")
        y += tol
        shift += tol
    else:
        raise DegenerateSliceError("could not move the line off the partition vertices")
    origin = y * np.array([-xi[1], xi[0]])
    pieces = []
    for ci, poly in enumerate(u.cells):
        r = geo.line_convex_interval(origin, xi, poly)
        if r is not None and r[1] - r[0] > tol:
            pieces.append((r[0], r[1], u.values[ci]))
    if not pieces:
        return (None, shift) if return_shift else None
    pieces.sort()
    bps, vals = [], [pieces[0][2]]
    for prev, cur in zip(pieces[:-1], pieces[1:]):
        if cur[2] != vals[-1]:
            bps.append(0.5 * (prev[1] + cur[0]))
            vals.append(cur[2])
    out = PiecewiseConstant1D(bps, vals, (pieces[0][0], pieces[-1][1]))
    return (out, shift) if return_shift else out


class ConstantG:
    def __init__(self, c=1.0):
        self.c = float(c)

    def __call__(self, pts):
        return np.full(np.shape(pts)[:-1], self.c)

    def edge_integral(self, p0, p1):
        return self.c * float(np.linalg.norm(np.subtract(p1, p0)))


class PolynomialG:
    """sum of c x^i y^j over ``coeffs`` = {(i, j): c}."""

    def __init__(self, coeffs):
        self.coeffs = {tuple(k): float(v) for k, v in coeffs.items()}
        self.degree = max((i + j for i, j in self.coeffs), default=0)

    def __call__(self, pts):
        p = np.asarray(pts, dtype=float)
        out = np.zeros(p.shape[:-1])
        for (i, j), c in self.coeffs.items():
            out = out + c * p[..., 0] ** i * p[..., 1] ** j
        return out

    def edge_integral(self, p0, p1):
        k = self.degree // 2 + 1
        t, w = np.polynomial.legendre.leggauss(k)
        p0, p1 = np.asarray(p0, float), np.asarray(p1, float)
        pts = p0 + np.multiply.outer(0.5 * (t + 1.0), p1 - p0)
        return 0.5 * float(np.linalg.norm(p1 - p0)) * float(w @ self(pts))


class RectIndicatorG:
    """Indicator of the rectangle (x0, y0, x1, y1)."""

    def __init__(self, rect):
        self.rect = tuple(float(v) for v in rect)

    def __call__(self, pts):
        p = np.asarray(pts, dtype=float)
        x0, y0, x1, y1 = self.rect
        return ((p[..., 0] >= x0) & (p[..., 0] <= x1) &
                (p[..., 1] >= y0) & (p[..., 1] <= y1)).astype(float)

    def edge_integral(self, p0, p1):
        r = geo.segment_clip_rect(p0, p1, self.rect)
        if r is None:
            return 0.0
        return float(np.linalg.norm(np.subtract(p1, p0))) * (r[1] - r[0])


def slicing_identity_check(u, xi, g, n_lines=256):
    """Midpoint-rule average over line offsets versus the exact edge integral.

    lhs = dy * sum over lines of sum over the slice jumps of g; rhs = sum over
    jump edges of int_edge g |<nu, xi>|.
    """
    if n_lines < 16:
        raise DomainError("n_lines must be at least 16")
    xi = np.asarray(xi, dtype=float)
    lo, hi = offset_range(u.domain, xi)
    dy = (hi - lo) / n_lines
    lhs = 0.0
    for k in range(n_lines):
        spec = SliceSpec(tuple(xi), lo + (k + 0.5) * dy)
        f, shift = slice_pc(u, spec, return_shift=True)
        if f is None or f.breakpoints.size == 0:
            continue
        origin = (spec.y + shift) * spec.perp
        pts = origin + np.multiply.outer(f.breakpoints, xi)
        lhs += float(np.sum(g(pts)))
    lhs *= dy
    e = u.jump_edges()
    rhs = 0.0
    for k in range(len(e)):
        rhs += abs(float(e.normal[k] @ xi)) * g.edge_integral(e.p0[k], e.p1[k])
    return lhs, rhs


def total_jump_mass(u):
    """int over the jump set of |u+ - u-|."""
    e = u.jump_edges()
    return float(np.sum(np.abs(u.values[e.b] - u.values[e.a]) * e.length))


def sup_measure_envelope(u, theta, xi_list):
    """sum over edges of max_k |<nu, xi_k>| theta(|jump|) length."""
    xis = np.atleast_2d(np.asarray(xi_list, dtype=float))
    if xis.shape[0] < 1:
        raise DomainError("xi_list must not be empty")
    e, jumps, lengths = _jump_data(u, None)
    if len(e) == 0:
        return 0.0
    proj = np.max(np.abs(e.normal @ xis.T), axis=1)
    return float(np.sum(proj * theta(jumps) * lengths))


def equispaced_directions(k):
    ang = np.pi * np.arange(k) / k
    return np.column_stack([np.cos(ang), np.sin(ang)])
