"""Uniform 1D/2D grid samples and their file formats."""
from __future__ import annotations

from dataclasses import dataclass
import json
import os

import numpy as np

from .errors import DomainError

INLINE_LIMIT = 4096


@dataclass(frozen=True)
class GridFunction:
    """Samples of a scalar field on a uniform node grid.

    ``values`` has shape ``shape`` with axis 0 along x.  Nodes include both
    endpoints of each axis, so the spacing is length/(n-1); a periodic grid
    omits the right endpoint and has spacing length/n.
    """

    extent: tuple
    values: np.ndarray
    periodic: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        ext = tuple(float(e) for e in self.extent)
        if vals.ndim not in (1, 2):
            raise DomainError("grid functions are 1D or 2D")
        if len(ext) != 2 * vals.ndim:
            raise DomainError("extent must hold two bounds per axis")
        for k in range(vals.ndim):
            if not ext[2 * k + 1] > ext[2 * k]:
                raise DomainError("extent bounds must be increasing")
            if vals.shape[k] < 2:
                raise DomainError("each axis needs at least two samples")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "extent", ext)

    @property
    def dim(self):
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def length(self, axis=0):
        return self.extent[2 * axis + 1] - self.extent[2 * axis]

    @property
    def spacing(self):
        out = []
        for k, n in enumerate(self.shape):
            out.append(self.length(k) / (n if self.periodic else n - 1))
        return tuple(out)

    def coords(self, axis=0):
        n = self.shape[axis]
        h = self.spacing[axis]
        return self.extent[2 * axis] + h * np.arange(n)

    def mesh(self):
        if self.dim == 1:
            return (self.coords(0),)
        return tuple(np.meshgrid(self.coords(0), self.coords(1), indexing="ij"))

    def with_values(self, values):
        return GridFunction(self.extent, values, self.periodic)

    @classmethod
    def sample(cls, f, extent, shape, periodic=False):
        """Grid with values f(x) (1D) or f(X, Y) (2D, ij indexing)."""
        shape = tuple(int(n) for n in np.atleast_1d(shape))
        probe = cls(extent, np.zeros(shape), periodic)
        vals = f(*probe.mesh())
        return cls(extent, np.broadcast_to(vals, shape), periodic)

    def header(self):
        return {"dim": self.dim, "extent": list(self.extent), "shape": list(self.shape),
                "periodic": self.periodic}

    def to_json(self):
        out = self.header()
        out["values"] = self.values.ravel().tolist()
        return out

    @classmethod
    def from_json(cls, data, values=None):
        shape = tuple(int(n) for n in data["shape"])
        if len(shape) != int(data.get("dim", len(shape))):
            raise DomainError("dim does not match shape")
        vals = np.asarray(data["values"] if values is None else values, dtype=float)
        if vals.size != int(np.prod(shape)):
            raise DomainError("values length does not match shape")
        return cls(tuple(data["extent"]), vals.reshape(shape), bool(data.get("periodic", False)))

    def save(self, path):
        """Write ``path`` as JSON; large grids put values in a sibling CSV."""
        if self.values.size <= INLINE_LIMIT:
            with open(path, "w") as fh:
                json.dump(self.to_json(), fh)
            return
        csv_path = os.path.splitext(path)[0] + ".values.csv"
        head = self.header()
        head["values_file"] = os.path.basename(csv_path)
        with open(path, "w") as fh:
            json.dump(head, fh)
        np.savetxt(csv_path, self.values.ravel(), fmt="%.17g")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            data = json.load(fh)
        if "values" in data:
            return cls.from_json(data)
        csv_path = os.path.join(os.path.dirname(path), data["values_file"])
        return cls.from_json(data, np.loadtxt(csv_path, ndmin=1))
