"""Mean curvature flow of graphs ``r = u(x)`` over the reference surface.

The graph is parametrized over the fixed chart point ``x``. Its upward unit normal
``nu`` satisfies ``Theta = <nu, d_r> = 1 / W`` with ``W^2 = 1 + g^{ij} u_i u_j``.
Moving by normal speed ``-H`` then means

    du/dt = -H W = -H / Theta.

Along normal trajectories the same flow gives ``d/dt u(F) = -H Theta``. The two
differ only by a tangential reparametrization.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import BlowupError
from .foliation import AmbientFoliation
from .grid import ScalarField

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("t", "area", "h", "u_min", "u_max", "theta_min",
                 "H_min", "H_max", "A2_max", "darea_residual")


@dataclass(frozen=True, eq=False)
class GraphSurfaceGeometry:
    """Per-point geometry of a graph. Symmetric tensors are ``(11, 12, 22)`` stacks."""

    u: np.ndarray
    theta: np.ndarray
    W: np.ndarray
    H: np.ndarray
    A2: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    metric: np.ndarray            # induced metric ghat
    metric_det: np.ndarray
    grad_u: np.ndarray            # (2, ny, nx)
    slice_metric_inv: np.ndarray  # g^{-1}(x, u)
    shape_components: tuple       # (S11, S12, S21, S22) of ghat^{-1} h

    @property
    def area_element(self) -> np.ndarray:
        return np.sqrt(self.metric_det)

    @property
    def normal_vector(self) -> np.ndarray:
        """Upward unit normal in chart components ``(x, y, r)``, shape ``(3, ny, nx)``."""
        i11, i12, i22 = self.slice_metric_inv
        ux, uy = self.grad_u
        return np.stack([-(i11 * ux + i12 * uy), -(i12 * ux + i22 * uy), np.ones_like(ux)]) / self.W

    def shape_operator(self) -> np.ndarray:
        """Mixed-index shape operator ``ghat^{-1} h`` as ``(ny, nx, 2, 2)``."""
        S11, S12, S21, S22 = self.shape_components
        return np.stack([np.stack([S11, S12], -1), np.stack([S21, S22], -1)], -2)


@dataclass
class FlowConfig:
    dt_safety: float = 0.5
    t_end: float = 1.0
    output_every: int = 10
    scheme: str = "explicit-rk2"
    dt_max: float = math.inf
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not 0 < self.dt_safety <= 1:
            raise ValueError(f"dt_safety must lie in (0, 1], got {self.dt_safety}")
        if self.scheme != "explicit-rk2":
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.output_every < 1:
            raise ValueError("output_every must be >= 1")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")


class TraceRow(NamedTuple):
    t: float
    area: float
    h: float
    u_min: float
    u_max: float
    theta_min: float
    H_min: float
    H_max: float
    A2_max: float
    darea_residual: float


@dataclass
class FlowTrace:
    rows: list[TraceRow] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def __len__(self):
        return len(self.rows)

    def tail(self, fraction: float = 1 / 3) -> list[TraceRow]:
        k = max(2, int(round(fraction * len(self.rows))))
        return self.rows[-k:]

    def tail_slope(self, fraction: float = 1 / 3) -> float:
        """Least-squares slope of ``log h(t)`` over the last ``fraction`` of rows."""
        rows = self.tail(fraction)
        t = np.array([r.t for r in rows])
        logh = np.log([r.h for r in rows])
        return float(np.polyfit(t, logh, 1)[0])

    def tail_delta(self, fraction: float = 1 / 3) -> float:
        """``2 - max |A|^2`` over the tail rows."""
        return 2.0 - max(r.A2_max for r in self.tail(fraction))


@dataclass
class FlowResult:
    trace: FlowTrace
    u: ScalarField
    steps: int


def _as_array(fol: AmbientFoliation, u) -> np.ndarray:
    if isinstance(u, ScalarField):
        if u.grid != fol.grid:
            raise ValueError("height field lives on a different grid")
        return u.values
    u = np.asarray(u, dtype=float)
    if u.shape != fol.grid.shape:
        raise ValueError(f"height field shape {u.shape} does not match grid {fol.grid.shape}")
    return u


def graph_geometry(fol: AmbientFoliation, u) -> GraphSurfaceGeometry:
    """Induced metric, gradient function and curvatures of the graph ``r = u(x)``.

    The second fundamental form is ``h_ij = <D_{X_i} nu, X_j>`` for the tangent
    frame ``X_i = d_i + u_i d_r``:

        W h_ij = -u_ij + (1/2) d_r g_ij + p^l Gamma_{l,ij}
                 + (1/2) (q_i u_j + u_i q_j),     p = g^{-1} du,  q_i = p^l d_r g_li

    with ``Gamma_{l,ij}`` the first-kind Christoffel symbols of ``g(., r)`` at
    fixed r, taken at r = u.
    """
    gr = fol.grid
    u = _as_array(fol, u)
    ux, uy = gr.dx(u), gr.dy(u)
    uxx, uxy, uyy = gr.dxx(u), gr.dxy(u), gr.dyy(u)

    g11, g12, g22 = fol.metric_components(u, 0)
    r11, r12, r22 = fol.metric_components(u, 1)
    D = fol.metric_components_dx(u, 0)      # D[c, k]: d_k of component c
    det = g11 * g22 - g12 * g12
    i11, i12, i22 = g22 / det, -g12 / det, g11 / det

    p0 = i11 * ux + i12 * uy
    p1 = i12 * ux + i22 * uy
    W = np.sqrt(1.0 + p0 * ux + p1 * uy)

    # Gamma_{l,ij} = (d_i g_lj + d_j g_li - d_l g_ij) / 2, components c(0,0)=0, c(0,1)=1, c(1,1)=2.
    G0_11 = 0.5 * D[0, 0]
    G0_12 = 0.5 * D[0, 1]
    G0_22 = D[1, 1] - 0.5 * D[2, 0]
    G1_11 = D[1, 0] - 0.5 * D[0, 1]
    G1_12 = 0.5 * D[2, 0]
    G1_22 = 0.5 * D[2, 1]

    q0 = p0 * r11 + p1 * r12
    q1 = p0 * r12 + p1 * r22
    h11 = (-uxx + 0.5 * r11 + p0 * G0_11 + p1 * G1_11 + q0 * ux) / W
    h12 = (-uxy + 0.5 * r12 + p0 * G0_12 + p1 * G1_12 + 0.5 * (q0 * uy + q1 * ux)) / W
    h22 = (-uyy + 0.5 * r22 + p0 * G0_22 + p1 * G1_22 + q1 * uy) / W

    G11, G12, G22 = g11 + ux * ux, g12 + ux * uy, g22 + uy * uy
    gdet = G11 * G22 - G12 * G12
    j11, j12, j22 = G22 / gdet, -G12 / gdet, G11 / gdet
    S11 = j11 * h11 + j12 * h12
    S12 = j11 * h12 + j12 * h22
    S21 = j12 * h11 + j22 * h12
    S22 = j12 * h12 + j22 * h22
    H = S11 + S22
    A2 = S11 * S11 + 2.0 * S12 * S21 + S22 * S22
    disc = np.sqrt(np.maximum(2.0 * A2 - H * H, 0.0))
    return GraphSurfaceGeometry(
        u=u, theta=1.0 / W, W=W, H=H, A2=A2,
        mu1=0.5 * (H - disc), mu2=0.5 * (H + disc),
        metric=np.stack([G11, G12, G22]), metric_det=gdet,
        grad_u=np.stack([ux, uy]), slice_metric_inv=np.stack([i11, i12, i22]),
        shape_components=(S11, S12, S21, S22))


def rhs(fol: AmbientFoliation, u) -> np.ndarray:
    """Velocity ``du/dt = -H W`` of the graph at fixed chart points."""
    geo = graph_geometry(fol, u)
    return -geo.H * geo.W


def stable_dt(fol: AmbientFoliation, u, cfg: FlowConfig) -> float:
    """Parabolic step bound ``dt_safety * h_min^2 / (4 Lambda)``.

    ``Lambda`` is the largest eigenvalue of ``g^{-1}(x, u)`` over the grid. It
    bounds the diffusion coefficients ``ghat^{ij}`` of the graph operator.
    """
    g11, g12, g22 = fol.metric_components(_as_array(fol, u), 0)
    # Largest eigenvalue of g^{-1} is 1 / smallest eigenvalue of g.
    g_min = 0.5 * (g11 + g22) - np.hypot(0.5 * (g11 - g22), g12)
    lam_max = float(np.max(1.0 / g_min))
    return min(cfg.dt_max, cfg.dt_safety * fol.grid.h_min**2 / (4.0 * lam_max))


def step(fol: AmbientFoliation, u, cfg: FlowConfig, t: float = 0.0,
         dt_limit: float | None = None) -> tuple[np.ndarray, float]:
    """One explicit midpoint (RK2) step; returns ``(u_next, dt_used)``."""
    u = _as_array(fol, u)
    dt = stable_dt(fol, u, cfg)
    if dt_limit is not None:
        dt = min(dt, dt_limit)
    with np.errstate(all="ignore"):
        k1 = rhs(fol, u)
        k2 = rhs(fol, u + 0.5 * dt * k1)
        u_next = u + dt * k2
    if not np.all(np.isfinite(u_next)):
        raise BlowupError(f"non-finite height after step at t={t + dt:.6g}", t=t + dt)
    return u_next, dt


def diagnostics(fol: AmbientFoliation, u, t: float) -> tuple[TraceRow, GraphSurfaceGeometry]:
    geo = graph_geometry(fol, u)
    gr = fol.grid
    dmu = geo.area_element
    row = TraceRow(
        t=t,
        area=gr.integrate(dmu),
        h=gr.integrate(geo.H**2 * dmu),
        u_min=float(np.min(geo.u)), u_max=float(np.max(geo.u)),
        theta_min=float(np.min(geo.theta)),
        H_min=float(np.min(geo.H)), H_max=float(np.max(geo.H)),
        A2_max=float(np.max(geo.A2)),
        darea_residual=math.nan)
    return row, geo


def run(fol: AmbientFoliation, u0, cfg: FlowConfig) -> FlowResult:
    """Integrate to ``cfg.t_end`` sampling diagnostics every ``output_every`` steps.

    ``darea_residual`` compares the sampled ``dArea/dt`` with the trapezoid
    average of ``-h`` over the sampling interval.
    """
    u = np.array(_as_array(fol, u0), dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("initial height contains non-finite values")
    if np.min(u) < 0 < np.max(u):
        log.warning("initial graph crosses the reference surface; the chart normal "
                    "(Theta > 0) is used on both sides")
    trace = FlowTrace()
    t, n = 0.0, 0

    def record():
        row, _ = diagnostics(fol, u, t)
        if trace.rows:
            prev = trace.rows[-1]
            dA = (row.area - prev.area) / (row.t - prev.t)
            row = row._replace(darea_residual=abs(dA + 0.5 * (row.h + prev.h)))
        trace.rows.append(row)
        log.debug("t=%.6g area=%.12g h=%.3e u=[%.6g, %.6g]", t, row.area, row.h,
                  row.u_min, row.u_max)

    record()
    while t < cfg.t_end * (1 - 1e-14):
        if n >= cfg.max_steps:
            raise BlowupError(f"step budget {cfg.max_steps} exhausted at t={t:.6g}", t=t,
                              trace=trace)
        try:
            u, dt = step(fol, u, cfg, t=t, dt_limit=cfg.t_end - t)
        except BlowupError as exc:
            exc.trace = trace
            raise
        t += dt
        n += 1
        if n % cfg.output_every == 0 or t >= cfg.t_end * (1 - 1e-14):
            record()
    if trace.rows[-1].t != t:
        record()
    return FlowResult(trace=trace, u=ScalarField(fol.grid, u), steps=n)


def normal_ricci(fol: AmbientFoliation, geo: GraphSurfaceGeometry) -> np.ndarray:
    """Ambient ``Ric(nu, nu)`` at the graph points (-2 when the ambient is hyperbolic)."""
    ric = fol.ambient_ricci(geo.u)
    nu = np.moveaxis(geo.normal_vector, 0, -1)
    return np.einsum("...a,...ab,...b->...", nu, ric, nu)


def laplace_beltrami(fol: AmbientFoliation, geo: GraphSurfaceGeometry, f: np.ndarray) -> np.ndarray:
    """Divergence-form Laplacian of ``f`` in the induced metric."""
    gr = fol.grid
    G11, G12, G22 = geo.metric
    sq = np.sqrt(geo.metric_det)
    fx, fy = gr.dx(f), gr.dy(f)
    # sqrt(det) * ghat^{-1} = adj(ghat) / sqrt(det)
    flux_x = (G22 * fx - G12 * fy) / sq
    flux_y = (-G12 * fx + G11 * fy) / sq
    return (gr.dx(flux_x) + gr.dy(flux_y)) / sq


def mean_curvature_evolution_terms(fol: AmbientFoliation, u, dt: float,
                                   ricci: str = "ambient") -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the evolution law for ``H`` at fixed chart points.

    Left: ``(H(u + dt * rhs) - H(u)) / dt`` after one forward-Euler step.
    Right: ``lap H + H (|A|^2 + Ric(nu, nu)) + tau^i d_i H``. The last term is the
    tangential transport of ``H`` caused by the vertical parametrization, with
    ``tau = -H g^{-1} du / W``. ``ricci="hyperbolic"`` substitutes ``Ric(nu, nu) = -2``.
    """
    u = _as_array(fol, u)
    geo = graph_geometry(fol, u)
    u1 = u - dt * geo.H * geo.W
    lhs = (graph_geometry(fol, u1).H - geo.H) / dt

    if ricci == "ambient":
        ric = normal_ricci(fol, geo)
    elif ricci == "hyperbolic":
        ric = -2.0
    else:
        raise ValueError(f"unknown ricci mode {ricci!r}")
    gr = fol.grid
    H = geo.H
    i11, i12, i22 = geo.slice_metric_inv
    ux, uy = geo.grad_u
    Hx, Hy = gr.dx(H), gr.dy(H)
    transport = -(H / geo.W) * ((i11 * ux + i12 * uy) * Hx + (i12 * ux + i22 * uy) * Hy)
    rhs_ = laplace_beltrami(fol, geo, H) + H * (geo.A2 + ric) + transport
    return lhs, rhs_


def verify_mean_curvature_evolution(fol: AmbientFoliation, u, dt: float,
                                    ricci: str = "ambient") -> float:
    """Sup-norm residual of the ``H`` evolution law; ``O(dt) + O(h^2)``."""
    lhs, rhs_ = mean_curvature_evolution_terms(fol, u, dt, ricci=ricci)
    return float(np.max(np.abs(lhs - rhs_)))
