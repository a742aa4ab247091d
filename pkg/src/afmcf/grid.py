"""Periodic rectangular grids, second-order finite differences and quadrature.

Fields are stored as ``(ny, nx)`` arrays so that ``values[j, i]`` sits at
``x = i * hx, y = j * hy`` and the C-order flattening is ``j * nx + i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FieldFormatError

FIELD_MAGIC = "AFMCF-FIELD"
FIELD_VERSION = "v1"


@dataclass(frozen=True)
class PeriodicGrid:
    nx: int
    ny: int
    Lx: float = 1.0
    Ly: float = 1.0

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise ValueError(f"grid needs nx, ny >= 8, got {self.nx}x{self.ny}")
        if not (self.Lx > 0 and self.Ly > 0):
            raise ValueError(f"domain lengths must be positive, got {self.Lx}, {self.Ly}")

    @property
    def hx(self) -> float:
        return self.Lx / self.nx

    @property
    def hy(self) -> float:
        return self.Ly / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def h_min(self) -> float:
        return min(self.hx, self.hy)

    @property
    def h_max(self) -> float:
        return max(self.hx, self.hy)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` coordinate arrays of shape ``(ny, nx)``."""
        x = np.arange(self.nx) * self.hx
        y = np.arange(self.ny) * self.hy
        return np.meshgrid(x, y)

    def wrap(self, i: int, j: int) -> tuple[int, int]:
        return ((i % self.nx) + self.nx) % self.nx, ((j % self.ny) + self.ny) % self.ny

    # Array-level stencils; the ScalarField wrappers below delegate here.

    def dx(self, a: np.ndarray) -> np.ndarray:
        return (np.roll(a, -1, axis=1) - np.roll(a, 1, axis=1)) / (2.0 * self.hx)

    def dy(self, a: np.ndarray) -> np.ndarray:
        return (np.roll(a, -1, axis=0) - np.roll(a, 1, axis=0)) / (2.0 * self.hy)

    def dxx(self, a: np.ndarray) -> np.ndarray:
        return (np.roll(a, -1, axis=1) - 2.0 * a + np.roll(a, 1, axis=1)) / self.hx**2

    def dyy(self, a: np.ndarray) -> np.ndarray:
        return (np.roll(a, -1, axis=0) - 2.0 * a + np.roll(a, 1, axis=0)) / self.hy**2

    def dxy(self, a: np.ndarray) -> np.ndarray:
        return self.dx(self.dy(a))

    def laplacian(self, a: np.ndarray) -> np.ndarray:
        return self.dxx(a) + self.dyy(a)

    def integrate(self, a: np.ndarray) -> float:
        # fsum is correctly rounded, so the result ignores summation order
        # (bit-exact under cyclic shifts and reproducible across runs).
        return self.hx * self.hy * math.fsum(np.ravel(a).tolist())

    def field(self, values) -> "ScalarField":
        return ScalarField(self, np.broadcast_to(np.asarray(values, dtype=float), self.shape).copy())

    def constant(self, c: float) -> "ScalarField":
        return ScalarField(self, np.full(self.shape, float(c)))


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"field shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.grid, values)

    def max(self) -> tuple[float, tuple[int, int]]:
        """Grid maximum and its ``(i, j)`` index; first index wins ties."""
        k = int(np.argmax(self.values))
        j, i = divmod(k, self.grid.nx)
        return float(self.values[j, i]), (i, j)

    def min(self) -> tuple[float, tuple[int, int]]:
        k = int(np.argmin(self.values))
        j, i = divmod(k, self.grid.nx)
        return float(self.values[j, i]), (i, j)


@dataclass(frozen=True, eq=False)
class SymTensorField:
    """Symmetric 2x2 tensor per grid point, stored as three components."""

    grid: PeriodicGrid
    t11: np.ndarray
    t12: np.ndarray
    t22: np.ndarray

    def __post_init__(self):
        for name in ("t11", "t12", "t22"):
            vals = np.asarray(getattr(self, name), dtype=float)
            if vals.shape != self.grid.shape:
                raise ValueError(f"{name} shape {vals.shape} does not match grid {self.grid.shape}")
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"{name} contains non-finite values")
            vals.setflags(write=False)
            object.__setattr__(self, name, vals)

    def matrix(self) -> np.ndarray:
        """Components as a ``(ny, nx, 2, 2)`` array."""
        m = np.empty(self.grid.shape + (2, 2))
        m[..., 0, 0] = self.t11
        m[..., 0, 1] = m[..., 1, 0] = self.t12
        m[..., 1, 1] = self.t22
        return m


def _check(f: ScalarField) -> ScalarField:
    if not isinstance(f, ScalarField):
        raise TypeError(f"expected ScalarField, got {type(f).__name__}")
    return f


def diff_x(f: ScalarField) -> ScalarField:
    f = _check(f)
    return ScalarField(f.grid, f.grid.dx(f.values))


def diff_y(f: ScalarField) -> ScalarField:
    f = _check(f)
    return ScalarField(f.grid, f.grid.dy(f.values))


def diff_xx(f: ScalarField) -> ScalarField:
    f = _check(f)
    return ScalarField(f.grid, f.grid.dxx(f.values))


def diff_yy(f: ScalarField) -> ScalarField:
    f = _check(f)
    return ScalarField(f.grid, f.grid.dyy(f.values))


def diff_xy(f: ScalarField) -> ScalarField:
    f = _check(f)
    return ScalarField(f.grid, f.grid.dxy(f.values))


def diff_yx(f: ScalarField) -> ScalarField:
    f = _check(f)
    return ScalarField(f.grid, f.grid.dy(f.grid.dx(f.values)))


def integrate(f: ScalarField, weight: ScalarField | None = None) -> float:
    """Periodic trapezoid rule ``hx * hy * sum(f * weight)``."""
    f = _check(f)
    if weight is None:
        return f.grid.integrate(f.values)
    weight = _check(weight)
    if weight.grid != f.grid:
        raise ValueError("integrand and weight live on different grids")
    return f.grid.integrate(f.values * weight.values)


def write_field(path, f: ScalarField) -> None:
    g = f.grid
    header = f"{FIELD_MAGIC} {FIELD_VERSION} {g.nx} {g.ny} {g.Lx!r} {g.Ly!r}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path) -> ScalarField:
    data = Path(path).read_bytes()
    nl = data.find(b"\n")
    if nl < 0:
        raise FieldFormatError(f"{path}: missing header line")
    parts = data[:nl].decode("ascii", errors="replace").split()
    if len(parts) != 6 or parts[0] != FIELD_MAGIC or parts[1] != FIELD_VERSION:
        raise FieldFormatError(f"{path}: bad header {data[:nl]!r}")
    try:
        nx, ny = int(parts[2]), int(parts[3])
        Lx, Ly = float(parts[4]), float(parts[5])
    except ValueError as exc:
        raise FieldFormatError(f"{path}: bad header {data[:nl]!r}") from exc
    payload = data[nl + 1:]
    if len(payload) != 8 * nx * ny:
        raise FieldFormatError(f"{path}: expected {8 * nx * ny} payload bytes, got {len(payload)}")
    values = np.frombuffer(payload, dtype="<f8").reshape(ny, nx).astype(float)
    return ScalarField(PeriodicGrid(nx, ny, Lx, Ly), values)
