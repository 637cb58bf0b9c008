"""Standard piecewise-constant test functions on rectangles."""
from __future__ import annotations

import numpy as np

from . import geometry as geo
from .partition import PiecewisePolyFunction

UNIT = (0.0, 0.0, 1.0, 1.0)


def constant(value=0.0, domain=UNIT):
    return PiecewisePolyFunction.constant(domain, value)


def axis_jump(s=1.0, at=0.5, domain=UNIT):
    """s * 1_{x1 > at}: a single vertical interface."""
    x0, y0, x1, y1 = domain
    return PiecewisePolyFunction(domain, [geo.rect_polygon(x0, y0, at, y1),
                                          geo.rect_polygon(at, y0, x1, y1)], [0.0, s])


def axis_cross(values=(0.0, 1.0, 2.0, 4.0), at=(0.5, 0.5), domain=UNIT):
    """Four rectangles meeting at ``at``; all jumps axis aligned."""
    x0, y0, x1, y1 = domain
    cx, cy = at
    cells = [geo.rect_polygon(x0, y0, cx, cy), geo.rect_polygon(cx, y0, x1, cy),
             geo.rect_polygon(cx, cy, x1, y1), geo.rect_polygon(x0, cy, cx, y1)]
    return PiecewisePolyFunction(domain, cells, list(values))


def diagonal_jump(s=1.0):
    """s above the diagonal x2 = x1 of the unit square."""
    lower = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    upper = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return PiecewisePolyFunction(UNIT, [lower, upper], [0.0, s])


def t_junction(values=(0.0, 1.0, 3.0)):
    """Three cells meeting in a T on [0, 1.5] x [0, 1].

    Edge lengths: 0.5 between the first two values, 0.5 between the last two
    and 1 between the first and the last.
    """
    dom = (0.0, 0.0, 1.5, 1.0)
    cells = [geo.rect_polygon(0.0, 0.0, 1.5, 0.5), geo.rect_polygon(0.0, 0.5, 0.5, 1.0),
             geo.rect_polygon(0.5, 0.5, 1.5, 1.0)]
    return PiecewisePolyFunction(dom, cells, list(values))


def random_partition(ncells=6, seed=0, domain=UNIT, values=None):
    """Convex partition made by cutting the largest cell with random lines."""
    rng = np.random.default_rng(seed)
    cells = [geo.rect_polygon(*domain)]
    while len(cells) < ncells:
        k = int(np.argmax([geo.polygon_area(c) for c in cells]))
        poly = cells[k]
        c = geo.polygon_centroid(poly)
        for _ in range(100):
            ang = rng.uniform(0.0, np.pi)
            n = np.array([np.cos(ang), np.sin(ang)])
            off = float(n @ (c + rng.uniform(-0.15, 0.15, 2) * np.sqrt(geo.polygon_area(poly))))
            a = geo.clip_halfplane(poly, n, off)
            b = geo.clip_halfplane(poly, -n, -off)
            if len(a) and len(b) and min(geo.polygon_area(a), geo.polygon_area(b)) > 0.05 * geo.polygon_area(poly):
                break
        cells[k:k + 1] = [a, b]
    if values is None:
        values = np.round(rng.uniform(0.0, 3.0, ncells), 3)
    return PiecewisePolyFunction(domain, cells, list(values))


def fixture_catalog(seed=0):
    return {
        "axis": axis_jump(1.0),
        "diagonal": diagonal_jump(1.0),
        "t-junction": t_junction(),
        "random6": random_partition(6, seed),
        "constant": constant(1.0),
    }
