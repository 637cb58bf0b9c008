"""Growth functions phi, jump costs theta and the small matrix helpers.

Everything here is immutable and vectorised over numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DivergenceError, DomainError

PERONA_MALIK = "perona-malik"
POWER = "power"
CUSTOM = "custom"
SQRT = "sqrt"

SPECTRAL_RADIUS = "spectral-radius"
MAX_EIGEN = "max-eigen"

DEFAULT_SMOOTHING = 1e-8


def _table_array(table, what):
    arr = np.asarray(table, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise DomainError(f"{what} table must be a list of at least two [x, value] pairs")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} table contains non-finite entries")
    if arr[0, 0] != 0.0 or arr[0, 1] != 0.0:
        raise DomainError(f"{what} table must start at [0, 0]")
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise DomainError(f"{what} table abscissae must be strictly increasing")
    if np.any(np.diff(arr[:, 1]) < 0):
        raise DomainError(f"{what} table must be nondecreasing")
    return arr


def _pl_eval(arr, x):
    """Piecewise-linear interpolation of |x| with linear extrapolation past the end."""
    x = np.abs(np.asarray(x, dtype=float))
    xs, vs = arr[:, 0], arr[:, 1]
    out = np.interp(x, xs, vs)
    slope = (vs[-1] - vs[-2]) / (xs[-1] - xs[-2])
    beyond = x > xs[-1]
    if np.any(beyond):
        out = np.where(beyond, vs[-1] + slope * (x - xs[-1]), out)
    return out


def _pl_slope(arr, x):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    xs, vs = arr[:, 0], arr[:, 1]
    slopes = np.diff(vs) / np.diff(xs)
    idx = np.clip(np.searchsorted(xs, ax, side="right") - 1, 0, len(slopes) - 1)
    return np.sign(x) * slopes[idx]


@dataclass(frozen=True)
class GrowthFunction:
    """The function phi of the perturbed energy.

    ``kind`` is one of ``"perona-malik"`` (phi(p) = log(1 + p^2), a = 0),
    ``"power"`` or ``"custom"`` (piecewise-linear table in |p|, linearly
    extrapolated).  For ``"power"`` with a > 0 the smoothed form
    (p^2 + s^2)^(a/2) - s^a is used; for a = 0 the power |p|^0 is read as the
    indicator of p != 0 and smoothed to p^2 / (p^2 + s^2).
    """

    kind: str = PERONA_MALIK
    a: float = 0.0
    smoothing: float = DEFAULT_SMOOTHING
    table: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in (PERONA_MALIK, POWER, CUSTOM):
            raise DomainError(f"unknown growth function kind {self.kind!r}")
        if self.kind == PERONA_MALIK and self.a != 0.0:
            raise DomainError("the Perona-Malik function has growth exponent a = 0")
        if not (0.0 <= self.a < 1.0):
            raise DomainError(f"growth exponent a must lie in [0,1), got {self.a}")
        if self.smoothing < 0 or not math.isfinite(self.smoothing):
            raise DomainError("smoothing must be a finite nonnegative number")
        if self.kind == CUSTOM:
            if self.table is None:
                raise DomainError("custom growth function needs a table")
            arr = _table_array(self.table, "growth function")
            object.__setattr__(self, "table", tuple(map(tuple, arr.tolist())))
            object.__setattr__(self, "_arr", arr)

    @classmethod
    def perona_malik(cls):
        return cls(PERONA_MALIK)

    @classmethod
    def power(cls, a, smoothing=DEFAULT_SMOOTHING):
        return cls(POWER, float(a), float(smoothing))

    @classmethod
    def custom(cls, table, a=0.0):
        return cls(CUSTOM, float(a), 0.0, tuple(map(tuple, table)))

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind == PERONA_MALIK:
            return np.log1p(p * p)
        if self.kind == POWER:
            s = self.smoothing
            if self.a == 0.0:
                if s == 0.0:
                    return (p != 0).astype(float)
                return p * p / (p * p + s * s)
            if s == 0.0:
                return np.abs(p) ** self.a
            return (p * p + s * s) ** (0.5 * self.a) - s ** self.a
        return _pl_eval(self._arr, p)

    def derivative(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind == PERONA_MALIK:
            return 2.0 * p / (1.0 + p * p)
        if self.kind == POWER:
            s = self.smoothing
            if self.a == 0.0:
                if s == 0.0:
                    return np.zeros_like(p)
                return 2.0 * p * s * s / (p * p + s * s) ** 2
            if s == 0.0:
                with np.errstate(divide="ignore", invalid="ignore"):
                    out = self.a * np.sign(p) * np.abs(p) ** (self.a - 1.0)
                return np.where(p == 0, 0.0, out)
            return self.a * p * (p * p + s * s) ** (0.5 * self.a - 1.0)
        return _pl_slope(self._arr, p)

    def second_derivative(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind == PERONA_MALIK:
            q = 1.0 + p * p
            return 2.0 * (1.0 - p * p) / (q * q)
        if self.kind == POWER:
            s = self.smoothing
            if self.a == 0.0:
                if s == 0.0:
                    return np.zeros_like(p)
                r = p * p + s * s
                return 2.0 * s * s * (s * s - 3.0 * p * p) / r ** 3
            r = p * p + s * s
            with np.errstate(divide="ignore", invalid="ignore"):
                out = self.a * r ** (0.5 * self.a - 2.0) * ((self.a - 1.0) * p * p + s * s)
            return np.where(r == 0, 0.0, out)
        return np.zeros_like(p)

    def to_json(self):
        out = {"kind": self.kind, "a": self.a, "smoothing": self.smoothing}
        if self.kind == CUSTOM:
            out["table"] = [list(r) for r in self.table]
        return out

    @classmethod
    def from_json(cls, data):
        kind = data.get("kind", PERONA_MALIK)
        a = float(data.get("a", 0.0))
        smoothing = float(data.get("smoothing", DEFAULT_SMOOTHING))
        if kind == CUSTOM:
            return cls(CUSTOM, a, smoothing, tuple(map(tuple, data["table"])))
        return cls(kind, a, smoothing)


def phi_eval(phi, p):
    """Evaluate phi(|p|)."""
    return phi(p)


@dataclass(frozen=True)
class GrowthEstimate:
    estimate: float
    raw_tail: float
    sequence: np.ndarray
    admissible: bool


def growth_exponent_estimate(phi, lam, p_grid, tol=1e-3):
    """Estimate the exponent a with phi(lam p)/phi(p) -> lam^a.

    The raw ratio exponent log(phi(lam p)/phi(p))/log(lam) is formed on
    ``p_grid``.  For logarithmic growth such as Perona-Malik the raw values
    approach the limit like 1/log p, far too slowly for double precision, so
    the returned ``estimate`` extrapolates the tail in the variable 1/log p
    (quadratic least-squares fit).  ``raw_tail`` is the unextrapolated value
    at the largest p.
    """
    lam = float(lam)
    if lam <= 0 or lam == 1.0:
        raise DomainError("lambda must be positive and different from 1")
    p = np.asarray(p_grid, dtype=float)
    if p.ndim != 1 or p.size < 4 or np.any(np.diff(p) <= 0) or p[0] <= 1.0:
        raise DomainError("p_grid must be an increasing sample of at least 4 points above 1")
    with np.errstate(divide="ignore"):
        seq = (np.log(phi(lam * p)) - np.log(phi(p))) / math.log(lam)
    if not np.all(np.isfinite(seq)):
        raise DivergenceError("phi vanishes or overflows on the sample")

    def extrapolate(lo, hi):
        x = 1.0 / np.log(p[lo:hi])
        A = np.vander(x, 3, increasing=True)
        coef, *_ = np.linalg.lstsq(A, seq[lo:hi], rcond=None)
        return float(coef[0])

    m = max(3, p.size // 2)
    if p.size - m < 1:
        m = p.size - 1
    last = extrapolate(p.size - m, p.size)
    prev = extrapolate(p.size - m - 1, p.size - 1)
    if abs(last - prev) > tol:
        raise DivergenceError(
            f"exponent estimates not Cauchy at the tail: {prev:.6g} vs {last:.6g}")
    if abs(last - round(last, 12)) < 1e-12:
        last = round(last, 12)
    admissible = last < 1.0 - tol
    return GrowthEstimate(last, float(seq[-1]), seq, bool(admissible))


def jump_exponent(a):
    """The exponent (2+a)/(4-a) of the limit jump energy."""
    a = float(a)
    if not (0.0 <= a < 1.0):
        raise DomainError(f"growth exponent a must lie in [0,1), got {a}")
    return (2.0 + a) / (4.0 - a)


@dataclass(frozen=True)
class JumpCost:
    """Even jump cost theta(t) = scale * c(|t|).

    ``kind`` is ``"power"`` (|t|^exponent), ``"sqrt"`` or ``"custom"``
    (piecewise-linear table, linearly extrapolated).
    """

    kind: str = SQRT
    exponent: float = 0.5
    scale: float = 1.0
    table: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in (POWER, SQRT, CUSTOM):
            raise DomainError(f"unknown jump cost kind {self.kind!r}")
        if self.kind == SQRT:
            object.__setattr__(self, "exponent", 0.5)
        if not (0.0 < self.exponent <= 1.0):
            raise DomainError(f"jump cost exponent must lie in (0,1], got {self.exponent}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError("jump cost scale must be positive")
        if self.kind == CUSTOM:
            if self.table is None:
                raise DomainError("custom jump cost needs a table")
            arr = _table_array(self.table, "jump cost")
            object.__setattr__(self, "table", tuple(map(tuple, arr.tolist())))
            object.__setattr__(self, "_arr", arr)

    @classmethod
    def sqrt(cls, scale=1.0):
        return cls(SQRT, 0.5, scale)

    @classmethod
    def power(cls, exponent, scale=1.0):
        return cls(POWER, float(exponent), float(scale))

    @classmethod
    def custom(cls, table, scale=1.0):
        return cls(CUSTOM, 1.0, scale, tuple(map(tuple, table)))

    @classmethod
    def for_growth(cls, a, sigma=1.0):
        """sigma * |t|^((2+a)/(4-a)), the integrand of the limit energy."""
        return cls(POWER, jump_exponent(a), float(sigma))

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        if self.kind == CUSTOM:
            return self.scale * _pl_eval(self._arr, t)
        return self.scale * t ** self.exponent

    def describe(self):
        if self.kind == CUSTOM:
            return f"custom[{len(self.table)}]x{self.scale:g}"
        return f"{self.kind}({self.exponent:g})x{self.scale:g}"

    def to_json(self):
        out = {"kind": self.kind, "exponent": self.exponent, "scale": self.scale}
        if self.kind == CUSTOM:
            out["table"] = [list(r) for r in self.table]
        return out

    @classmethod
    def from_spec(cls, spec):
        """Parse ``"sqrt"``, ``"power:0.7"``, ``"growth:0.5"`` or a JSON dict."""
        if isinstance(spec, JumpCost):
            return spec
        if isinstance(spec, dict):
            kind = spec.get("kind", SQRT)
            scale = float(spec.get("scale", 1.0))
            if kind == CUSTOM:
                return cls.custom(spec["table"], scale)
            return cls(kind, float(spec.get("exponent", 0.5)), scale)
        text = str(spec).strip().lower()
        if text == SQRT:
            return cls.sqrt()
        name, _, arg = text.partition(":")
        if name == POWER and arg:
            return cls.power(float(arg))
        if name == "growth" and arg:
            return cls.for_growth(float(arg))
        raise DomainError(f"cannot parse jump cost {spec!r}")

    def admissibility(self, tmax=10.0, n=100):
        """Sampled checks of the structural assumptions on theta.

        Returns a dict of booleans: zero at the origin, monotone, subadditive
        on an n x n grid of [0, tmax]^2, and infinite slope at zero (the ratio
        theta(t)/t grows strictly at every step of t = 10^-k, k = 1..12).
        """
        t = np.linspace(0.0, tmax, n)
        th = self(t)
        S, T = np.meshgrid(t, t)
        sub = bool(np.all(self(S + T) <= self(S) + self(T) + 1e-12))
        ks = 10.0 ** -np.arange(1, 13)
        ratio = self(ks) / ks
        blowup = bool(np.all(ratio[1:] > ratio[:-1] * (1.0 + 1e-6)))
        return {
            "zero": float(self(0.0)) == 0.0,
            "monotone": bool(np.all(np.diff(th) >= -1e-15)),
            "subadditive": sub,
            "infinite_slope": blowup,
        }


def jump_cost_catalog():
    """The jump costs shipped with the library, keyed by name."""
    return {
        "sqrt": JumpCost.sqrt(),
        "growth-0": JumpCost.for_growth(0.0),
        "growth-0.5": JumpCost.for_growth(0.5),
        "growth-0.9": JumpCost.for_growth(0.9),
        "power-0.3": JumpCost.power(0.3),
        "custom-concave": JumpCost.custom([[0, 0], [0.01, 0.2], [0.1, 0.5], [1, 1], [4, 1.6]]),
    }


@dataclass(frozen=True)
class SymmetricMatrix2:
    m11: float
    m12: float
    m22: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.m11, self.m12, self.m22)):
            raise DomainError("matrix entries must be finite")

    def eigenvalues(self):
        mean = 0.5 * (self.m11 + self.m22)
        rad = math.hypot(0.5 * (self.m11 - self.m22), self.m12)
        return mean - rad, mean + rad


def hessian_norm_array(m11, m12, m22, mode=SPECTRAL_RADIUS):
    """Vectorised matrix 'norm' of 2x2 symmetric fields."""
    mean = 0.5 * (np.asarray(m11) + np.asarray(m22))
    rad = np.hypot(0.5 * (np.asarray(m11) - np.asarray(m22)), np.asarray(m12))
    if mode == SPECTRAL_RADIUS:
        return np.abs(mean) + rad
    if mode == MAX_EIGEN:
        return np.maximum(mean + rad, 0.0)
    raise DomainError(f"unknown hessian norm mode {mode!r}")


def hessian_norm(M, mode=SPECTRAL_RADIUS):
    """Spectral radius (default) or max(lambda_max, 0) of a symmetric 2x2 matrix."""
    return float(hessian_norm_array(M.m11, M.m12, M.m22, mode))
