"""Ambient geometry of the equidistant foliation ``{S(r)}`` of a reference surface.

In the chart ``(x, y, r)`` the ambient metric is ``g_ij(x, r) dx^i dx^j + dr^2`` with

    g(x, r) = exp(2v) (cosh(r) I + sinh(r) B)^2,   B = exp(-2v) A.

Expanding the square, ``g = cosh^2 r P + sinh 2r Q + sinh^2 r R`` with
``P = exp(2v) I``, ``Q = A`` and ``R = A exp(-2v) A``. The r-dependence is therefore
analytic and every spatial derivative of ``g`` at any ``r`` is the same linear
combination of finite differences of the fixed fields ``P, Q, R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import AdmissibilityError
from .grid import ScalarField
from .surface import ReferenceSurfaceData, areas


def inv2(m: np.ndarray) -> np.ndarray:
    """Inverse of a stack of 2x2 matrices (trailing axes)."""
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1] / det
    out[..., 1, 1] = m[..., 0, 0] / det
    out[..., 0, 1] = -m[..., 0, 1] / det
    out[..., 1, 0] = -m[..., 1, 0] / det
    return out


def det2(m: np.ndarray) -> np.ndarray:
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


@dataclass(frozen=True)
class MetricJet:
    """Slice metric at one point with its analytic r-derivative and spatial derivatives.

    ``dx[a, b, k]`` is the derivative of ``g_ab`` along coordinate ``k``.
    """

    g: np.ndarray
    dr: np.ndarray
    dx: np.ndarray


@dataclass(frozen=True, eq=False)
class SliceGeometry:
    r: float
    area: float
    mu1: ScalarField
    mu2: ScalarField
    H: ScalarField


class AmbientFoliation:
    """Closed-form evaluator of the foliated metric and slice curvatures."""

    def __init__(self, surface: ReferenceSurfaceData):
        self.surface = surface
        self.grid = grid = surface.grid
        v = surface.v.values
        A = surface.A
        e2v, em2v = np.exp(2 * v), np.exp(-2 * v)
        # Components stored first: (11, 12, 22, ny, nx).
        P = np.stack([e2v, np.zeros_like(e2v), e2v])
        Q = np.stack([A.t11, A.t12, A.t22])
        R = em2v * np.stack([A.t11**2 + A.t12**2,
                             A.t12 * (A.t11 + A.t22),
                             A.t12**2 + A.t22**2])
        self._comp = (P, Q, R)
        self._lam_lo, self._lam_hi = surface.principal_curvatures()

        def d1(M):
            return np.stack([np.stack([grid.dx(c), grid.dy(c)]) for c in M])

        def d2(M):
            return np.stack([np.stack([np.stack([grid.dxx(c), grid.dxy(c)]),
                                       np.stack([grid.dxy(c), grid.dyy(c)])]) for c in M])

        self._dcomp = tuple(d1(M) for M in self._comp)
        self._ddcomp = tuple(d2(M) for M in self._comp)

    # -- metric and derivatives --------------------------------------------

    @property
    def lambda_lo(self) -> np.ndarray:
        return self._lam_lo

    @property
    def lambda_hi(self) -> np.ndarray:
        return self._lam_hi

    @property
    def lambda0(self) -> float:
        return self.surface.lambda0

    @staticmethod
    def _coeffs(r, order: int):
        r = np.asarray(r, dtype=float)
        if order == 0:
            return np.cosh(r) ** 2, np.sinh(2 * r), np.sinh(r) ** 2
        sh, ch = np.sinh(2 * r), np.cosh(2 * r)
        if order == 1:
            return sh, 2 * ch, sh
        return 2 * ch, 4 * sh, 2 * ch

    def _combine(self, stacks, r, order):
        a, b, c = self._coeffs(r, order)
        return a * stacks[0] + b * stacks[1] + c * stacks[2]

    def metric_components(self, r, order: int = 0) -> np.ndarray:
        """``(g11, g12, g22)`` stacked as ``(3, ny, nx)``; ``order`` counts r-derivatives."""
        return self._combine(self._comp, r, order)

    def metric_components_dx(self, r, order: int = 0) -> np.ndarray:
        """Spatial derivatives at fixed r, ``(3, 2, ny, nx)`` (second axis = direction)."""
        return self._combine(self._dcomp, r, order)

    def metric_components_dxdx(self, r) -> np.ndarray:
        return self._combine(self._ddcomp, r, 0)

    def metric(self, r) -> np.ndarray:
        """``g(x, r)`` as ``(ny, nx, 2, 2)``; ``r`` is a scalar or a ``(ny, nx)`` field."""
        return _to_matrix(self.metric_components(r, 0))

    def metric_dr(self, r) -> np.ndarray:
        return _to_matrix(self.metric_components(r, 1))

    def metric_drr(self, r) -> np.ndarray:
        return _to_matrix(self.metric_components(r, 2))

    def metric_dx(self, r) -> np.ndarray:
        """Spatial derivatives at fixed r, ``(ny, nx, 2, 2, 2)`` (last axis = direction)."""
        return np.moveaxis(_to_matrix(self.metric_components_dx(r, 0)), 0, -1)

    def metric_dxdr(self, r) -> np.ndarray:
        return np.moveaxis(_to_matrix(self.metric_components_dx(r, 1)), 0, -1)

    def metric_dxdx(self, r) -> np.ndarray:
        return np.moveaxis(_to_matrix(self.metric_components_dxdx(r)), (0, 1), (-2, -1))

    def metric_at(self, i: int, j: int, r: float, derivatives: bool = False):
        i, j = self.grid.wrap(i, j)
        g = _to_matrix(self.metric_components(r, 0)[..., j, i])
        if not derivatives:
            return g
        dr = _to_matrix(self.metric_components(r, 1)[..., j, i])
        dx = np.moveaxis(_to_matrix(self.metric_components_dx(r, 0)[..., j, i]), 0, -1)
        return MetricJet(g=g, dr=dr, dx=dx)

    def slice_shape_operator(self, r) -> np.ndarray:
        """``(1/2) g^{-1} d_r g``: shape operator of the slice S(r) (independent oracle)."""
        return 0.5 * np.einsum("...ij,...jk->...ik", inv2(self.metric(r)), self.metric_dr(r))

    # -- ambient 3-metric --------------------------------------------------

    def ambient_jet(self, r):
        """Ambient metric in coordinates ``(x, y, r)`` at the points ``(x, r(x))``.

        Returns ``G[..., a, b]``, ``dG[..., a, b, c] = d_c G_ab`` and
        ``ddG[..., a, b, c, d] = d_c d_d G_ab``.
        """
        r = np.broadcast_to(np.asarray(r, dtype=float), self.grid.shape)
        shp = self.grid.shape
        G = np.zeros(shp + (3, 3))
        G[..., :2, :2] = self.metric(r)
        G[..., 2, 2] = 1.0
        dG = np.zeros(shp + (3, 3, 3))
        dG[..., :2, :2, :2] = self.metric_dx(r)
        dG[..., :2, :2, 2] = self.metric_dr(r)
        ddG = np.zeros(shp + (3, 3, 3, 3))
        ddG[..., :2, :2, :2, :2] = self.metric_dxdx(r)
        dxdr = self.metric_dxdr(r)
        ddG[..., :2, :2, :2, 2] = dxdr
        ddG[..., :2, :2, 2, :2] = dxdr
        ddG[..., :2, :2, 2, 2] = self.metric_drr(r)
        return G, dG, ddG

    def ambient_christoffel(self, r) -> np.ndarray:
        """``Gamma[..., c, a, b]`` of the ambient metric at ``(x, r(x))``."""
        G, dG, _ = self.ambient_jet(r)
        gam1 = 0.5 * (np.einsum("...dba->...dab", dG) + dG - np.einsum("...abd->...dab", dG))
        return np.einsum("...cd,...dab->...cab", np.linalg.inv(G), gam1)

    def ambient_ricci(self, r) -> np.ndarray:
        """Ricci tensor ``Ric[..., a, b]`` of the ambient metric at ``(x, r(x))``."""
        G, dG, ddG = self.ambient_jet(r)
        Ginv = np.linalg.inv(G)
        gam1 = 0.5 * (np.einsum("...dba->...dab", dG) + dG - np.einsum("...abd->...dab", dG))
        dgam1 = 0.5 * (np.einsum("...dbae->...dabe", ddG) + ddG
                       - np.einsum("...abde->...dabe", ddG))
        dGinv = -np.einsum("...cp,...pqe,...qd->...cde", Ginv, dG, Ginv)
        gam = np.einsum("...cd,...dab->...cab", Ginv, gam1)
        dgam = (np.einsum("...cde,...dab->...cabe", dGinv, gam1)
                + np.einsum("...cd,...dabe->...cabe", Ginv, dgam1))
        return (np.einsum("...abda->...bd", dgam)
                - np.einsum("...aabd->...bd", dgam)
                + np.einsum("...aae,...ebd->...bd", gam, gam)
                - np.einsum("...ade,...eab->...bd", gam, gam))

    # -- slice curvatures, areas, volumes -----------------------------------

    def slice_principal_curvatures(self, r: float) -> tuple[ScalarField, ScalarField]:
        t = math.tanh(r)
        lo, hi = self._lam_lo, self._lam_hi
        mu1 = (t + lo) / (1 + lo * t)
        mu2 = (t + hi) / (1 + hi * t)
        return ScalarField(self.grid, mu1), ScalarField(self.grid, mu2)

    def slice_mean_curvature(self, r: float) -> ScalarField:
        t = math.tanh(r)
        s = self._lam_lo + self._lam_hi
        p = self._lam_lo * self._lam_hi
        H = (2 * (1 + p) * t + s * (1 + t * t)) / (1 + s * t + p * t * t)
        return ScalarField(self.grid, H)

    def area_element(self, r: float) -> np.ndarray:
        """``sqrt(det g(x, r))`` from the eigenvalue factorization."""
        c, s = math.cosh(r), math.sinh(r)
        e2v = np.exp(2 * self.surface.v.values)
        return e2v * np.abs((c + s * self._lam_lo) * (c + s * self._lam_hi))

    def slice_area(self, r: float) -> float:
        return self.grid.integrate(self.area_element(r))

    def slice_area_closed_form(self, r: float) -> float:
        """``|S| + sinh^2 r (2|S| - A_eff)``; valid for minimal (trace-free) reference data."""
        if not self.surface.normal_form:
            raise ValueError("closed-form slice area needs trace-free reference data")
        a = areas(self.surface)
        return a.area + math.sinh(r) ** 2 * (2 * a.area - a.a_hyp_eff)

    def slice_geometry(self, r: float) -> SliceGeometry:
        mu1, mu2 = self.slice_principal_curvatures(r)
        return SliceGeometry(r=r, area=self.slice_area(r), mu1=mu1, mu2=mu2,
                             H=self.slice_mean_curvature(r))

    def convexity_radius(self) -> float:
        return convexity_radius(self.lambda0)

    def volume_between(self, r_lo: float, r_hi: float, n_quad: int = 512) -> float:
        """Composite Simpson quadrature of the slice area over ``[r_lo, r_hi]``."""
        if r_hi < r_lo:
            raise ValueError(f"need r_lo <= r_hi, got {r_lo} > {r_hi}")
        if r_hi == r_lo:
            return 0.0
        if n_quad < 16:
            raise ValueError("n_quad must be at least 16")
        n_quad += n_quad % 2
        rs = np.linspace(r_lo, r_hi, n_quad + 1)
        vals = np.array([self.slice_area(r) for r in rs])
        return float(simpson(vals, x=rs))

    def volume_symmetric_closed_form(self, a: float) -> float:
        """Volume between ``S(-a)`` and ``S(a)`` for trace-free data."""
        ar = areas(self.surface)
        return 2 * a * ar.area + (2 * ar.area - ar.a_hyp_eff) * (0.5 * math.sinh(2 * a) - a)


def convexity_radius(lambda0: float) -> float:
    """Least r beyond which every slice is convex: ``(1/2) log((1 + l0) / (1 - l0))``."""
    if not 0.0 <= lambda0 < 1.0:
        raise AdmissibilityError(f"convexity radius needs 0 <= lambda0 < 1, got {lambda0!r}",
                                 lambda0=lambda0)
    # atanh keeps full relative precision for tiny lambda0
    return math.atanh(lambda0)


def _to_matrix(c: np.ndarray) -> np.ndarray:
    """``(3, *lead, ny, nx)`` components -> ``(*lead, ny, nx, 2, 2)`` matrices."""
    m = np.empty(c.shape[1:] + (2, 2))
    m[..., 0, 0] = c[0]
    m[..., 0, 1] = m[..., 1, 0] = c[1]
    m[..., 1, 1] = c[2]
    return m
