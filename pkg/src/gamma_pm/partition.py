"""Piecewise-constant functions: breakpoint lists in 1D, convex polygon partitions in 2D."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import json
import math

import numpy as np

from .errors import DomainError, GeometryError
from . import geometry as geo

SHIFT_DIRECTION = np.array([0.8, 0.6])
MICRO_SHIFT = 1e-9


@dataclass(frozen=True)
class Plateau:
    start: float
    end: float
    value: float
    degenerate: bool = False


@dataclass(frozen=True)
class PiecewiseConstant1D:
    """values[k] holds on (breakpoints[k-1], breakpoints[k]) inside ``interval``."""

    breakpoints: np.ndarray
    values: np.ndarray
    interval: tuple = (0.0, 1.0)
    plateaus: tuple | None = None

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        lo, hi = (float(self.interval[0]), float(self.interval[1]))
        if not hi > lo:
            raise DomainError("interval must be increasing")
        if vals.size != bp.size + 1:
            raise DomainError("need one more value than breakpoints")
        if np.any(np.diff(bp) <= 0) or (bp.size and (bp[0] <= lo or bp[-1] >= hi)):
            raise DomainError("breakpoints must be strictly increasing inside the interval")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vals))):
            raise DomainError("breakpoints and values must be finite")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "interval", (lo, hi))

    @property
    def dim(self):
        return 1

    @property
    def jumps(self):
        return np.diff(self.values)

    def evaluate(self, t):
        idx = np.searchsorted(self.breakpoints, np.asarray(t, dtype=float), side="right")
        return self.values[idx]

    def merged(self, tol=0.0):
        """Drop breakpoints whose jump is at most ``tol`` in absolute value."""
        keep = np.abs(self.jumps) > tol
        vals = np.concatenate([[self.values[0]], self.values[1:][keep]])
        return PiecewiseConstant1D(self.breakpoints[keep], vals, self.interval)

    def to_json(self):
        out = {"dim": 1, "interval": list(self.interval),
               "breakpoints": self.breakpoints.tolist(), "values": self.values.tolist()}
        if self.plateaus is not None:
            out["plateaus"] = [p.__dict__ for p in self.plateaus]
        return out


@dataclass(frozen=True)
class EdgeSet:
    """Interior edges: cell a on one side, cell b on the side the normal points to."""

    a: np.ndarray
    b: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    normal: np.ndarray

    @property
    def length(self):
        return np.linalg.norm(self.p1 - self.p0, axis=1)

    @property
    def midpoint(self):
        return 0.5 * (self.p0 + self.p1)

    def __len__(self):
        return int(self.a.size)

    @classmethod
    def empty(cls):
        z = np.zeros((0, 2))
        return cls(np.zeros(0, int), np.zeros(0, int), z, z.copy(), z.copy())

    def select(self, mask):
        return EdgeSet(self.a[mask], self.b[mask], self.p0[mask], self.p1[mask], self.normal[mask])


def _as_cell(vertices):
    p = np.asarray(vertices, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2 or len(p) < 3:
        raise DomainError("cells need at least three 2D vertices")
    area = geo.polygon_area(p)
    if area < 0:
        p = p[::-1].copy()
        area = -area
    if area <= 0:
        raise DomainError("degenerate cell")
    e = np.roll(p, -1, axis=0) - p
    cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    scale = np.max(np.linalg.norm(e, axis=1)) ** 2
    if np.any(cross < -1e-12 * scale):
        raise DomainError("cells must be convex")
    return p


class PiecewisePolyFunction:
    """Piecewise-constant function on a convex polygonal partition of a rectangle.

    ``domain`` is (x0, y0, x1, y1).  ``core`` is the rectangle the function
    models; it equals ``domain`` unless the function was extended onto a
    margin (see ``extend_constant``).
    """

    dim = 2

    def __init__(self, domain, cells, values, core=None, check=True, _lattice=None):
        self.domain = tuple(float(v) for v in domain)
        x0, y0, x1, y1 = self.domain
        if not (x1 > x0 and y1 > y0):
            raise DomainError("domain must be a nondegenerate rectangle")
        self.core = tuple(float(v) for v in (core if core is not None else domain))
        self.cells = tuple(_as_cell(c) for c in cells) if check else tuple(cells)
        self.values = np.asarray(values, dtype=float).reshape(-1)
        if self.values.size != len(self.cells):
            raise DomainError("one value per cell required")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("cell values must be finite")
        self._lattice = _lattice
        if check:
            total = sum(geo.polygon_area(c) for c in self.cells)
            if abs(total - self.area) > 1e-12 * self.area * max(1, len(self.cells)) ** 0.5:
                raise DomainError(f"cells cover area {total!r}, domain has {self.area!r}")

    @property
    def area(self):
        x0, y0, x1, y1 = self.domain
        return (x1 - x0) * (y1 - y0)

    @property
    def size(self):
        x0, y0, x1, y1 = self.domain
        return max(x1 - x0, y1 - y0)

    @property
    def tol(self):
        return 1e-9 * self.size

    def with_values(self, values):
        return PiecewisePolyFunction(self.domain, self.cells, values, self.core,
                                     check=False, _lattice=self._lattice)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def from_axis_lattice(cls, xs, ys, values, core=None):
        """Rectangles [xs[i], xs[i+1]] x [ys[j], ys[j+1]] with values[i, j]."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        vals = np.asarray(values, dtype=float)
        if vals.shape != (xs.size - 1, ys.size - 1):
            raise DomainError("lattice values must have shape (len(xs)-1, len(ys)-1)")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise DomainError("lattice lines must be strictly increasing")
        cells = [geo.rect_polygon(xs[i], ys[j], xs[i + 1], ys[j + 1])
                 for i in range(xs.size - 1) for j in range(ys.size - 1)]
        dom = (xs[0], ys[0], xs[-1], ys[-1])
        return cls(dom, cells, vals.ravel(), core, check=False, _lattice=(xs, ys, vals))

    @classmethod
    def constant(cls, domain, value=0.0):
        return cls(domain, [geo.rect_polygon(*domain)], [value])

    # -- edges -----------------------------------------------------------------
    @cached_property
    def _edge_data(self):
        if self._lattice is not None:
            return self._lattice_edges()
        return self._generic_edges()

    @property
    def edges(self):
        """All interior edges (including those between equal values)."""
        return self._edge_data[0]

    @property
    def boundary_edges(self):
        """(cell, p0, p1) triples of edges with a single adjacent cell."""
        return self._edge_data[1]

    def jump_edges(self, tol=0.0):
        e = self.edges
        return e.select(np.abs(self.values[e.b] - self.values[e.a]) > tol)

    def _lattice_edges(self):
        xs, ys, vals = self._lattice
        nx, ny = vals.shape
        idx = np.arange(nx * ny).reshape(nx, ny)
        I, J = np.meshgrid(np.arange(nx - 1), np.arange(ny), indexing="ij")
        va = idx[:-1, :].ravel()
        vb = idx[1:, :].ravel()
        vp0 = np.column_stack([xs[I.ravel() + 1], ys[J.ravel()]])
        vp1 = np.column_stack([xs[I.ravel() + 1], ys[J.ravel() + 1]])
        vn = np.tile([1.0, 0.0], (va.size, 1))
        I, J = np.meshgrid(np.arange(nx), np.arange(ny - 1), indexing="ij")
        ha = idx[:, :-1].ravel()
        hb = idx[:, 1:].ravel()
        hp0 = np.column_stack([xs[I.ravel()], ys[J.ravel() + 1]])
        hp1 = np.column_stack([xs[I.ravel() + 1], ys[J.ravel() + 1]])
        hn = np.tile([0.0, 1.0], (ha.size, 1))
        edges = EdgeSet(np.concatenate([va, ha]), np.concatenate([vb, hb]),
                        np.vstack([vp0, hp0]), np.vstack([vp1, hp1]), np.vstack([vn, hn]))
        return edges, None

    def _generic_edges(self):
        tol = self.tol
        recs = []
        for ci, poly in enumerate(self.cells):
            k = len(poly)
            for i in range(k):
                p, q = poly[i], poly[(i + 1) % k]
                d = q - p
                ln = math.hypot(d[0], d[1])
                if ln <= tol:
                    continue
                n_out = np.array([d[1], -d[0]]) / ln
                ang = math.atan2(n_out[1], n_out[0])
                if ang < 0:
                    ang += math.pi
                    n_can, side = -n_out, 1
                else:
                    n_can, side = n_out, -1
                if ang >= math.pi - 1e-9:
                    ang -= math.pi
                    n_can, side = -n_can, -side
                recs.append((ang, float(n_can @ p), ci, side, p, q, n_can))
        recs.sort(key=lambda r: r[0])
        groups, cur = [], []
        for r in recs:
            if cur and r[0] - cur[-1][0] > 1e-9:
                groups.append(cur)
                cur = []
            cur.append(r)
        if cur:
            groups.append(cur)
        A, B, P0, P1, N = [], [], [], [], []
        boundary = []
        for grp in groups:
            grp.sort(key=lambda r: r[1])
            lines, cur = [], [grp[0]]
            for r in grp[1:]:
                if r[1] - cur[-1][1] > tol:
                    lines.append(cur)
                    cur = []
                cur.append(r)
            lines.append(cur)
            for line in lines:
                self._sweep_line(line, tol, A, B, P0, P1, N, boundary)
        if A:
            edges = EdgeSet(np.array(A, int), np.array(B, int), np.array(P0), np.array(P1),
                            np.array(N))
        else:
            edges = EdgeSet.empty()
        return edges, boundary

    @staticmethod
    def _sweep_line(line, tol, A, B, P0, P1, N, boundary):
        n_can = line[0][6]
        tang = np.array([-n_can[1], n_can[0]])
        off = float(np.mean([r[1] for r in line]))
        items = []
        for r in line:
            s0, s1 = float(tang @ r[4]), float(tang @ r[5])
            items.append((min(s0, s1), max(s0, s1), r[2], r[3]))
        pts = sorted({v for it in items for v in it[:2]})
        merged = [pts[0]]
        for v in pts[1:]:
            if v - merged[-1] > tol:
                merged.append(v)
        run = None  # (pair, start)

        def flush(pair, s_start, s_end):
            if s_end - s_start <= tol:
                return
            p0 = off * n_can + s_start * tang
            p1 = off * n_can + s_end * tang
            minus, plus = pair
            if minus is not None and plus is not None:
                A.append(minus)
                B.append(plus)
                P0.append(p0)
                P1.append(p1)
                N.append(n_can.copy())
            else:
                boundary.append((minus if minus is not None else plus, p0, p1))

        for lo, hi in zip(merged[:-1], merged[1:]):
            mid = 0.5 * (lo + hi)
            minus = [it[2] for it in items if it[3] < 0 and it[0] - tol <= mid <= it[1] + tol]
            plus = [it[2] for it in items if it[3] > 0 and it[0] - tol <= mid <= it[1] + tol]
            if len(minus) > 1 or len(plus) > 1:
                raise GeometryError("overlapping cells along a shared line")
            pair = (minus[0] if minus else None, plus[0] if plus else None)
            if pair == (None, None):
                if run is not None:
                    flush(run[0], run[1], lo)
                run = None
                continue
            if run is None:
                run = (pair, lo)
            elif run[0] != pair:
                flush(run[0], run[1], lo)
                run = (pair, lo)
        if run is not None:
            flush(run[0], run[1], merged[-1])

    # -- evaluation ------------------------------------------------------------
    def _locate(self, pts, tol=None):
        out = np.full(len(pts), -1, dtype=int)
        tol = self.tol if tol is None else tol
        if self._lattice is not None:
            xs, ys, vals = self._lattice
            i = np.searchsorted(xs, pts[:, 0]) - 1
            j = np.searchsorted(ys, pts[:, 1]) - 1
            ok = (i >= 0) & (i < xs.size - 1) & (j >= 0) & (j < ys.size - 1)
            ic, jc = np.clip(i, 0, xs.size - 2), np.clip(j, 0, ys.size - 2)
            near = (np.minimum(pts[:, 0] - xs[ic], xs[ic + 1] - pts[:, 0]) <= tol) | (
                np.minimum(pts[:, 1] - ys[jc], ys[jc + 1] - pts[:, 1]) <= tol)
            good = ok & ~near
            out[good] = (ic * (ys.size - 1) + jc)[good]
            return out
        for ci, poly in enumerate(self.cells):
            lo = poly.min(axis=0) - tol
            hi = poly.max(axis=0) + tol
            cand = np.flatnonzero((pts[:, 0] >= lo[0]) & (pts[:, 0] <= hi[0]) &
                                  (pts[:, 1] >= lo[1]) & (pts[:, 1] <= hi[1]) & (out < 0))
            if cand.size == 0:
                continue
            inside, _ = geo.point_in_convex(pts[cand], poly, tol)
            out[cand[inside]] = ci
        return out

    def evaluate(self, points, return_shifted=False):
        """Cell values at ``points``.

        Points within 1e-9 * size of an edge are moved by the deterministic
        micro-shift 1e-9 * size * (0.8, 0.6) before lookup; a point that is
        still ambiguous, or lies outside the domain, raises GeometryError.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        cell = self._locate(pts)
        bad = np.flatnonzero(cell < 0)
        shifted = 0
        if bad.size:
            moved = pts[bad] + MICRO_SHIFT * self.size * SHIFT_DIRECTION
            again = self._locate(moved, 0.1 * self.tol)
            if np.any(again < 0):
                k = bad[np.flatnonzero(again < 0)[0]]
                raise GeometryError(f"point {pts[k].tolist()} is on an edge or outside the domain")
            cell[bad] = again
            shifted = bad.size
        vals = self.values[cell]
        return (vals, shifted) if return_shifted else vals

    # -- checks -------------------------------------------------------------------
    def validate(self):
        """Full tiling check: area, pairwise overlap, edge sharing and normals."""
        x0, y0, x1, y1 = self.domain
        tol_a = 1e-12 * self.area
        total = sum(geo.polygon_area(c) for c in self.cells)
        problems = []
        if abs(total - self.area) > tol_a * max(1, len(self.cells)) ** 0.5:
            problems.append(f"area mismatch {total - self.area:.3e}")
        boxes = [(c.min(axis=0), c.max(axis=0)) for c in self.cells]
        for i in range(len(self.cells)):
            for j in range(i + 1, len(self.cells)):
                if np.any(boxes[i][0] >= boxes[j][1]) or np.any(boxes[j][0] >= boxes[i][1]):
                    continue
                ov = geo.clip_convex(self.cells[i], self.cells[j])
                if len(ov) and geo.polygon_area(ov) > tol_a:
                    problems.append(f"cells {i} and {j} overlap")
        e = self.edges
        if len(e) and np.any(np.abs(np.linalg.norm(e.normal, axis=1) - 1.0) > 1e-12):
            problems.append("edge normal not unit")
        for ci, p0, p1 in self.boundary_edges or []:
            on_side = any(
                (abs(p0[k] - v) <= self.tol and abs(p1[k] - v) <= self.tol)
                for k, v in ((0, x0), (0, x1), (1, y0), (1, y1)))
            if not on_side:
                problems.append(f"cell {ci} has an unshared edge inside the domain")
        return problems

    # -- io -----------------------------------------------------------------------
    def to_json(self):
        x0, y0, x1, y1 = self.domain
        out = {"domain": [x0, y0, x1, y1],
               "cells": [{"vertices": c.tolist(), "value": float(v)}
                         for c, v in zip(self.cells, self.values)]}
        if self.core != self.domain:
            out["core"] = list(self.core)
        return out

    @classmethod
    def from_json(cls, data):
        cells = [c["vertices"] for c in data["cells"]]
        vals = [c["value"] for c in data["cells"]]
        return cls(data["domain"], cells, vals, data.get("core"))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)


def extend_constant(u, margin):
    """Extend ``u`` by ``margin`` on every side, constant along the outward normal.

    Each boundary edge is extruded into a strip carrying its cell value; the
    four corner squares take the value of the lowest-index cell touching the
    corner.  The returned function has ``core`` equal to the original domain.
    """
    m = float(margin)
    if m <= 0:
        raise DomainError("margin must be positive")
    x0, y0, x1, y1 = u.domain
    tol = u.tol
    cells = list(u.cells)
    vals = list(u.values)
    if u._lattice is not None:
        _, bnd = u._generic_edges()
    else:
        bnd = u.boundary_edges
    for ci, p0, p1 in bnd:
        if abs(p0[0] - x0) <= tol and abs(p1[0] - x0) <= tol:
            lo, hi = sorted((p0[1], p1[1]))
            cells.append(geo.rect_polygon(x0 - m, lo, x0, hi))
        elif abs(p0[0] - x1) <= tol and abs(p1[0] - x1) <= tol:
            lo, hi = sorted((p0[1], p1[1]))
            cells.append(geo.rect_polygon(x1, lo, x1 + m, hi))
        elif abs(p0[1] - y0) <= tol and abs(p1[1] - y0) <= tol:
            lo, hi = sorted((p0[0], p1[0]))
            cells.append(geo.rect_polygon(lo, y0 - m, hi, y0))
        elif abs(p0[1] - y1) <= tol and abs(p1[1] - y1) <= tol:
            lo, hi = sorted((p0[0], p1[0]))
            cells.append(geo.rect_polygon(lo, y1, hi, y1 + m))
        else:
            raise GeometryError("boundary edge not on the domain rectangle")
        vals.append(u.values[ci])
    for cx, cy, rect in ((x0, y0, (x0 - m, y0 - m, x0, y0)), (x1, y0, (x1, y0 - m, x1 + m, y0)),
                         (x1, y1, (x1, y1, x1 + m, y1 + m)), (x0, y1, (x0 - m, y1, x0, y1 + m))):
        owner = None
        for ci, poly in enumerate(u.cells):
            if np.min(np.hypot(poly[:, 0] - cx, poly[:, 1] - cy)) <= tol:
                owner = ci
                break
        if owner is None:
            raise GeometryError("no cell has the domain corner as a vertex")
        cells.append(geo.rect_polygon(*rect))
        vals.append(u.values[owner])
    return PiecewisePolyFunction((x0 - m, y0 - m, x1 + m, y1 + m), cells, vals, core=u.domain)
