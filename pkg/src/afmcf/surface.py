"""Reference-surface data: conformal factor, second fundamental form, principal curvatures.

The induced metric on the reference surface is ``exp(2 v) * delta_ij`` and the
second fundamental form ``A`` is stored as a symmetric tensor field. In the
minimal normal form ``t22 = -t11`` so the principal curvatures are ``-lam`` and
``+lam`` with ``lam = exp(-2 v) * sqrt(t11**2 + t12**2)``. Passing an
independent ``t22`` gives general (non-minimal) reference data.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import AdmissibilityError, SolverError
from .grid import PeriodicGrid, ScalarField, SymTensorField, read_field, write_field

log = logging.getLogger(__name__)


def _values(grid: PeriodicGrid, f) -> np.ndarray:
    if isinstance(f, ScalarField):
        if f.grid != grid:
            raise ValueError("field lives on a different grid")
        return f.values
    return np.broadcast_to(np.asarray(f, dtype=float), grid.shape)


@dataclass(frozen=True, eq=False)
class ReferenceSurfaceData:
    grid: PeriodicGrid
    v: ScalarField
    A: SymTensorField

    def __post_init__(self):
        lam0 = self.lambda0
        if not lam0 < 1.0:
            loc = self.lambda0_location
            raise AdmissibilityError(
                f"max |principal curvature| = {lam0!r} at grid index {loc}; need < 1",
                lambda0=lam0, location=loc)

    @property
    def normal_form(self) -> bool:
        return bool(np.array_equal(self.A.t22, -self.A.t11))

    def principal_curvatures(self) -> tuple[np.ndarray, np.ndarray]:
        """Pointwise eigenvalues ``(lo, hi)`` of the shape operator ``exp(-2v) A``."""
        e = np.exp(-2.0 * self.v.values)
        if self.normal_form:
            lam = e * np.hypot(self.A.t11, self.A.t12)
            return -lam, lam
        mean = 0.5 * (self.A.t11 + self.A.t22)
        rad = np.hypot(0.5 * (self.A.t11 - self.A.t22), self.A.t12)
        return e * (mean - rad), e * (mean + rad)

    @property
    def lam(self) -> ScalarField:
        """Pointwise max |principal curvature| (equals lambda in the normal form)."""
        lo, hi = self.principal_curvatures()
        return ScalarField(self.grid, np.maximum(np.abs(lo), np.abs(hi)))

    @property
    def lambda0(self) -> float:
        lo, hi = self.principal_curvatures()
        return float(max(np.max(np.abs(lo)), np.max(np.abs(hi))))

    @property
    def lambda0_location(self) -> tuple[int, int]:
        k = int(np.argmax(self.lam.values))
        j, i = divmod(k, self.grid.nx)
        return (i, j)

    def scaled(self, s: float) -> "ReferenceSurfaceData":
        """Same conformal factor, second fundamental form multiplied by ``s``."""
        A = self.A
        return ReferenceSurfaceData(self.grid, self.v,
                                    SymTensorField(self.grid, s * A.t11, s * A.t12, s * A.t22))


@dataclass(frozen=True)
class SurfaceAreas:
    area: float
    a_hyp_eff: float
    a_hyp_nominal: float | None = None


def make_fuchsian(grid: PeriodicGrid, v_const: float = 0.0) -> ReferenceSurfaceData:
    zero = np.zeros(grid.shape)
    return ReferenceSurfaceData(grid, grid.constant(v_const), SymTensorField(grid, zero, zero, -zero))


def make_synthetic(grid: PeriodicGrid, v, a11, a12, a22=None) -> ReferenceSurfaceData:
    """Assemble arbitrary reference data; raises AdmissibilityError if max |lambda| >= 1.

    With ``a22=None`` the tensor is trace-free (``t22 = -a11``).
    """
    t11 = np.array(_values(grid, a11))
    t12 = np.array(_values(grid, a12))
    t22 = -t11 if a22 is None else np.array(_values(grid, a22))
    return ReferenceSurfaceData(grid, ScalarField(grid, np.array(_values(grid, v))),
                                SymTensorField(grid, t11, t12, t22))


def synthetic_example(grid: PeriodicGrid, lambda0: float = 0.5, v_amp: float = 0.1,
                      ratio: float = 0.6) -> ReferenceSurfaceData:
    """Smooth trace-free test data with ``max lambda = lambda0`` attained on the row y = 0.

    ``v = v_amp cos(2 pi x / Lx)`` and
    ``lambda = lambda0 * sqrt(cos^2(2 pi y / Ly) + ratio^2 sin^2(2 pi y / Ly))``.
    """
    X, Y = grid.coords()
    v = v_amp * np.cos(2 * np.pi * X / grid.Lx)
    ty = 2 * np.pi * Y / grid.Ly
    e2v = np.exp(2 * v)
    return make_synthetic(grid, v, lambda0 * e2v * np.cos(ty), ratio * lambda0 * e2v * np.sin(ty))


def _periodic_laplacian(grid: PeriodicGrid) -> sp.csr_matrix:
    def lap1d(n, h):
        main = -2.0 * np.ones(n)
        off = np.ones(n - 1)
        m = sp.diags([off, main, off], [-1, 0, 1], shape=(n, n), format="lil")
        m[0, n - 1] = 1.0
        m[n - 1, 0] = 1.0
        return m.tocsr() / h**2

    # Flattened index j * nx + i: x varies fastest.
    Ix, Iy = sp.identity(grid.nx), sp.identity(grid.ny)
    return (sp.kron(Iy, lap1d(grid.nx, grid.hx)) + sp.kron(lap1d(grid.ny, grid.hy), Ix)).tocsr()


def gauss_equation_residual(grid: PeriodicGrid, v: np.ndarray, alpha_abs: float) -> np.ndarray:
    """Residual of ``lap v = exp(2v) - |alpha|^2 exp(-2v)`` on the grid."""
    return grid.laplacian(v) - np.exp(2 * v) + alpha_abs**2 * np.exp(-2 * v)


def solve_gauss_equation(grid: PeriodicGrid, alpha_re: float, alpha_im: float, tol: float = 1e-10,
                         v0=None, max_iter: int = 50) -> ReferenceSurfaceData:
    """Damped Newton solve for the conformal factor of constant trace-free data.

    The second fundamental form is the constant ``t11 = alpha_re, t12 = -alpha_im``.
    On the periodic cell the maximum principle pins the solution to the constant
    ``v = log|alpha| / 2``, for which ``lambda == 1``; that case is reported as
    AdmissibilityError rather than returned.
    """
    alpha = math.hypot(alpha_re, alpha_im)
    if not alpha > 0:
        raise ValueError("solve_gauss_equation needs |alpha| > 0")
    if not tol > 0:
        raise ValueError("tol must be positive")
    v = np.zeros(grid.shape) if v0 is None else np.array(_values(grid, v0), dtype=float)
    L = _periodic_laplacian(grid)
    res = gauss_equation_residual(grid, v, alpha)
    history = [float(np.max(np.abs(res)))]
    it = 0
    while history[-1] > tol:
        if it >= max_iter:
            raise SolverError(f"Newton did not reach tol={tol} in {max_iter} iterations", history)
        it += 1
        diag = 2 * np.exp(2 * v) + 2 * alpha**2 * np.exp(-2 * v)
        J = (L - sp.diags(diag.ravel())).tocsc()
        delta = spla.spsolve(J, -res.ravel()).reshape(grid.shape)
        step = 1.0
        while True:
            trial = v + step * delta
            trial_res = gauss_equation_residual(grid, trial, alpha)
            norm = float(np.max(np.abs(trial_res)))
            if np.isfinite(norm) and norm < history[-1]:
                break
            step *= 0.5
            if step < 1e-12:
                raise SolverError("damped Newton step failed to reduce the residual", history)
        v, res = trial, trial_res
        history.append(norm)
        log.debug("gauss newton it=%d step=%g residual=%.3e", it, step, norm)

    t11 = np.full(grid.shape, float(alpha_re))
    t12 = np.full(grid.shape, float(-alpha_im))
    lam = np.exp(-2 * v) * alpha
    lam0 = float(np.max(lam))
    # Newton resolves v to ~tol/|alpha|; anything that close to 1 is the boundary solution.
    if lam0 >= 1.0 - tol / alpha:
        k = int(np.argmax(lam))
        j, i = divmod(k, grid.nx)
        raise AdmissibilityError(
            f"Gauss-equation solution has lambda0 = {lam0!r} (boundary of admissibility)",
            lambda0=lam0, location=(i, j))
    return ReferenceSurfaceData(grid, ScalarField(grid, v), SymTensorField(grid, t11, t12, -t11))


def check_gauss_residual(s: ReferenceSurfaceData) -> float:
    """Sup norm of ``K + 1 - det(shape operator)`` with ``K = -exp(-2v) lap v``.

    In the normal form ``det = -lambda^2``; the flat Fuchsian cell gives 1.
    """
    v = s.v.values
    K = -np.exp(-2 * v) * s.grid.laplacian(v)
    lo, hi = s.principal_curvatures()
    return float(np.max(np.abs(K + 1.0 - lo * hi)))


def areas(s: ReferenceSurfaceData, genus: int | None = None) -> SurfaceAreas:
    """Area of the reference surface and the effective hyperbolic area.

    ``a_hyp_eff = area - integral(lam_lo * lam_hi dmu)``, i.e.
    ``area + integral(lam^2 dmu)`` in the normal form.
    """
    dmu = np.exp(2 * s.v.values)
    lo, hi = s.principal_curvatures()
    area = s.grid.integrate(dmu)
    a_eff = area + s.grid.integrate(-lo * hi * dmu)
    nominal = None
    if genus is not None:
        if genus < 2:
            raise ValueError(f"nominal hyperbolic area needs genus >= 2, got {genus}")
        nominal = 2 * math.pi * (2 * genus - 2)
    return SurfaceAreas(area, a_eff, nominal)


def save_surface(directory, s: ReferenceSurfaceData, genus: int | None = None) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_field(d / "v.f64", s.v)
    write_field(d / "a11.f64", ScalarField(s.grid, s.A.t11))
    write_field(d / "a12.f64", ScalarField(s.grid, s.A.t12))
    if not s.normal_form:
        write_field(d / "a22.f64", ScalarField(s.grid, s.A.t22))
    elif (d / "a22.f64").exists():
        (d / "a22.f64").unlink()
    lines = [f"lambda0={s.lambda0!r}"]
    if genus is not None:
        lines.append(f"genus={genus}")
    (d / "meta").write_text("\n".join(lines) + "\n")


def load_surface(directory) -> tuple[ReferenceSurfaceData, dict]:
    """Read a surface directory; returns the data and the parsed ``meta`` pairs."""
    d = Path(directory)
    v = read_field(d / "v.f64")
    a11 = read_field(d / "a11.f64")
    a12 = read_field(d / "a12.f64")
    a22 = read_field(d / "a22.f64") if (d / "a22.f64").exists() else None
    for f in (a11, a12) + ((a22,) if a22 else ()):
        if f.grid != v.grid:
            raise ValueError(f"{d}: field grids disagree")
    meta = {}
    meta_path = d / "meta"
    if meta_path.exists():
        for line in meta_path.read_text().splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                key, _, val = line.partition("=")
                meta[key.strip()] = val.strip()
    s = make_synthetic(v.grid, v, a11, a12, a22)
    return s, meta
