"""Planar geometry on convex polygons, segments and lines.

Polygons are (k, 2) float arrays of counterclockwise vertices without the
closing repeat.
"""
from __future__ import annotations

import math

import numpy as np


def polygon_area(poly):
    """Signed shoelace area (positive for counterclockwise order)."""
    p = np.asarray(poly, dtype=float)
    if len(p) < 3:
        return 0.0
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_centroid(poly):
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    a = 0.5 * cr.sum()
    if abs(a) < 1e-300:
        return p.mean(axis=0)
    return np.array([((x + xn) * cr).sum(), ((y + yn) * cr).sum()]) / (6.0 * a)


def clip_halfplane(poly, normal, offset):
    """Part of ``poly`` with normal . x <= offset."""
    p = np.asarray(poly, dtype=float)
    if len(p) == 0:
        return p
    d = p @ np.asarray(normal, dtype=float) - offset
    out = []
    k = len(p)
    for i in range(k):
        j = (i + 1) % k
        if d[i] <= 0:
            out.append(p[i])
        if (d[i] < 0 < d[j]) or (d[j] < 0 < d[i]):
            t = d[i] / (d[i] - d[j])
            out.append(p[i] + t * (p[j] - p[i]))
    if len(out) < 3:
        return np.zeros((0, 2))
    return np.array(out)


def clip_convex(subject, clipper):
    """Sutherland-Hodgman intersection of a polygon with a convex clipper."""
    out = np.asarray(subject, dtype=float)
    c = np.asarray(clipper, dtype=float)
    k = len(c)
    for i in range(k):
        a, b = c[i], c[(i + 1) % k]
        e = b - a
        n = np.array([e[1], -e[0]])
        out = clip_halfplane(out, n, float(n @ a))
        if len(out) == 0:
            break
    return out


def rect_polygon(x0, y0, x1, y1):
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)


def clip_to_rect(poly, rect):
    x0, y0, x1, y1 = rect
    out = np.asarray(poly, dtype=float)
    for n, c in (((-1.0, 0.0), -x0), ((1.0, 0.0), x1), ((0.0, -1.0), -y0), ((0.0, 1.0), y1)):
        out = clip_halfplane(out, n, c)
        if len(out) == 0:
            break
    return out


def segment_clip_rect(p0, p1, rect):
    """Liang-Barsky: parameter range [t0, t1] of p0 + t (p1 - p0) inside rect, or None."""
    x0, y0, x1, y1 = rect
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0
    t0, t1 = 0.0, 1.0
    for pk, qk in ((-d[0], p0[0] - x0), (d[0], x1 - p0[0]),
                   (-d[1], p0[1] - y0), (d[1], y1 - p0[1])):
        if pk == 0.0:
            if qk < 0.0:
                return None
            continue
        r = qk / pk
        if pk < 0:
            t0 = max(t0, r)
        else:
            t1 = min(t1, r)
        if t0 > t1:
            return None
    return t0, t1


def line_convex_interval(origin, direction, poly):
    """Cyrus-Beck: range of t with origin + t direction inside the convex poly, or None."""
    p = np.asarray(poly, dtype=float)
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    lo, hi = -math.inf, math.inf
    k = len(p)
    for i in range(k):
        a, b = p[i], p[(i + 1) % k]
        e = b - a
        n = np.array([e[1], -e[0]])  # outward for CCW
        num = float(n @ (a - o))
        den = float(n @ d)
        if den == 0.0:
            if num < 0.0:
                return None
            continue
        t = num / den
        if den > 0:
            hi = min(hi, t)
        else:
            lo = max(lo, t)
        if lo > hi:
            return None
    return lo, hi


def point_segment_distance(points, a, b):
    p = np.asarray(points, dtype=float)
    a = np.asarray(a, dtype=float)
    e = np.asarray(b, dtype=float) - a
    ee = float(e @ e)
    if ee == 0.0:
        return np.linalg.norm(p - a, axis=-1)
    t = np.clip(((p - a) @ e) / ee, 0.0, 1.0)
    return np.linalg.norm(p - (a + t[..., None] * e), axis=-1)


def convex_sides(poly):
    """Outward unit normals and offsets (n . x <= c inside) of a convex CCW polygon."""
    p = np.asarray(poly, dtype=float)
    e = np.roll(p, -1, axis=0) - p
    n = np.column_stack([e[:, 1], -e[:, 0]])
    ln = np.linalg.norm(n, axis=1)
    n = n / ln[:, None]
    return n, np.einsum("ij,ij->i", n, p)


def point_in_convex(points, poly, tol=0.0):
    """Masks (inside, near) of points strictly inside / within tol of the boundary."""
    n, c = convex_sides(poly)
    s = np.asarray(points, dtype=float) @ n.T - c
    worst = s.max(axis=-1)
    return worst < -tol, np.abs(worst) <= tol


def halfplane_signed_distance(x, y, normal, offset):
    """Positive where normal . (x, y) > offset."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return n[0] * x + n[1] * y - offset


def disk_signed_distance(x, y, center, radius):
    """Positive inside the disk."""
    return radius - np.hypot(x - center[0], y - center[1])


def polygon_signed_distance(x, y, poly):
    """Positive inside a simple polygon (even-odd rule), exact Euclidean distance."""
    p = np.asarray(poly, dtype=float)
    pts = np.stack([np.asarray(x, float), np.asarray(y, float)], axis=-1)
    d = np.full(pts.shape[:-1], np.inf)
    inside = np.zeros(pts.shape[:-1], dtype=bool)
    k = len(p)
    for i in range(k):
        a, b = p[i], p[(i + 1) % k]
        d = np.minimum(d, point_segment_distance(pts, a, b))
        cond = (a[1] > pts[..., 1]) != (b[1] > pts[..., 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = a[0] + (pts[..., 1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
        inside ^= cond & (pts[..., 0] < xint)
    return np.where(inside, d, -d)


def rect_distance(points, rect):
    x0, y0, x1, y1 = rect
    p = np.asarray(points, dtype=float)
    dx = np.maximum(np.maximum(x0 - p[..., 0], p[..., 0] - x1), 0.0)
    dy = np.maximum(np.maximum(y0 - p[..., 1], p[..., 1] - y1), 0.0)
    return np.hypot(dx, dy)


def segment_clip_dilated_rect(p0, p1, rect, radius):
    """Parameter range of the segment inside {dist(x, rect) < radius}, or None.

    The dilated rectangle is convex, so the distance along the segment is a
    convex function of the parameter; its sublevel set is found by a golden
    search for the minimum followed by bisection on both sides.
    """
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0
    if radius <= 0:
        return segment_clip_rect(p0, p0 + d, rect)

    def f(t):
        return float(rect_distance(p0 + t * d, rect)) - radius

    x0, y0, x1, y1 = rect
    big = (x0 - radius, y0 - radius, x1 + radius, y1 + radius)
    box = segment_clip_rect(p0, p0 + d, big)
    if box is None:
        return None
    lo, hi = box
    a, b = lo, hi
    g = (math.sqrt(5.0) - 1.0) / 2.0
    for _ in range(200):
        if b - a <= 1e-15:
            break
        c, e = b - g * (b - a), a + g * (b - a)
        if f(c) < f(e):
            b = e
        else:
            a = c
    tm = 0.5 * (a + b)
    if f(tm) >= 0:
        return None

    def root(inside, outside):
        if f(outside) < 0:
            return outside
        for _ in range(200):
            mid = 0.5 * (inside + outside)
            if mid in (inside, outside):
                break
            if f(mid) < 0:
                inside = mid
            else:
                outside = mid
        return 0.5 * (inside + outside)

    return root(tm, lo), root(tm, hi)
