import logging
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import afmcf.flow as flow
from afmcf.errors import BlowupError
from afmcf.flow import (TRACE_COLUMNS, FlowConfig, graph_geometry, laplace_beltrami,
                        mean_curvature_evolution_terms, normal_ricci, rhs, run, stable_dt, step,
                        verify_mean_curvature_evolution)
from afmcf.foliation import AmbientFoliation
from afmcf.grid import PeriodicGrid
from afmcf.surface import make_fuchsian, make_synthetic, synthetic_example

import oracles

TWO_PI = 2 * math.pi
G32 = PeriodicGrid(32, 32, TWO_PI, TWO_PI)
FUCHS = AmbientFoliation(make_fuchsian(G32))
SYN = AmbientFoliation(synthetic_example(G32, lambda0=0.5))
X32, Y32 = G32.coords()


def _general():
    s = make_synthetic(G32, 0.1 * np.sin(X32 + Y32), 0.2 * np.cos(Y32), 0.15 * np.sin(X32),
                       0.1 + 0.1 * np.cos(X32))
    return AmbientFoliation(s)


GEN = _general()


def _smooth_u(seed, amp=0.3):
    r = np.random.default_rng(seed)
    u = r.uniform(-1, 1)
    for kx, ky in [(1, 0), (0, 1), (1, 1), (2, -1)]:
        a, b = amp * r.standard_normal(2) / (1 + kx * kx + ky * ky)
        u = u + a * np.cos(kx * X32 + ky * Y32) + b * np.sin(kx * X32 + ky * Y32)
    return u


# -- geometry ----------------------------------------------------------------


@pytest.mark.parametrize("c", [-1.2, 0.0, 0.35, 2.0])
def test_fuchsian_constant_graph_exact(c):
    geo = graph_geometry(FUCHS, np.full(G32.shape, c))
    assert np.all(geo.theta == 1.0)
    np.testing.assert_allclose(geo.H, 2 * math.tanh(c), rtol=1e-15, atol=1e-15)
    np.testing.assert_allclose(geo.A2, 2 * math.tanh(c) ** 2, rtol=1e-14, atol=1e-15)


@pytest.mark.parametrize("fol", [SYN, GEN], ids=["minimal", "general"])
@pytest.mark.parametrize("c", [-0.8, 0.0, 0.5493, 1.4])
def test_constant_graph_matches_slice(fol, c):
    geo = graph_geometry(fol, np.full(G32.shape, c))
    mu1, mu2 = fol.slice_principal_curvatures(c)
    H = fol.slice_mean_curvature(c).values
    np.testing.assert_allclose(geo.H, H, atol=1e-13)
    np.testing.assert_allclose(geo.mu1, mu1.values, atol=1e-7)
    np.testing.assert_allclose(geo.mu2, mu2.values, atol=1e-7)
    np.testing.assert_allclose(geo.area_element, fol.area_element(c), rtol=1e-13)


@pytest.fixture(scope="module")
def level_set_oracle():
    v, a11, a12, a22 = oracles.synthetic_exprs()
    x, y = oracles.x, oracles.y
    u = 0.4 + 0.2 * oracles.sp.sin(x) + 0.1 * oracles.sp.cos(2 * y)
    return oracles.level_set_H(v, a11, a12, a22, u)


def test_graph_mean_curvature_second_order_vs_level_set(level_set_oracle):
    errs = []
    for n in (32, 64, 128):
        g = PeriodicGrid(n, n, TWO_PI, TWO_PI)
        X, Y = g.coords()
        fol = AmbientFoliation(synthetic_example(g, lambda0=0.5))
        geo = graph_geometry(fol, 0.4 + 0.2 * np.sin(X) + 0.1 * np.cos(2 * Y))
        errs.append(np.max(np.abs(geo.H - level_set_oracle(X, Y))))
    assert errs[-1] < 1e-3
    for a, b in zip(errs, errs[1:]):
        assert 3.5 < a / b < 4.5


@pytest.mark.parametrize("fol", [FUCHS, SYN, GEN], ids=["fuchsian", "minimal", "general"])
@given(seed=st.integers(0, 10_000))
def test_pointwise_geometry_invariants(fol, seed):
    geo = graph_geometry(fol, _smooth_u(seed))
    assert np.all(geo.theta > 0) and np.all(geo.theta <= 1)
    np.testing.assert_allclose(geo.W * geo.theta, 1.0, rtol=1e-15)
    assert np.all(geo.A2 >= 0.5 * geo.H**2 - 1e-12)
    assert np.all(geo.metric_det > 0)
    S = geo.shape_operator()
    np.testing.assert_allclose(np.trace(S, axis1=-2, axis2=-1), geo.H, atol=1e-12)
    np.testing.assert_allclose(np.einsum("...ij,...ji->...", S, S), geo.A2, atol=1e-11)


def test_shape_operator_self_adjoint_in_induced_metric():
    geo = graph_geometry(SYN, _smooth_u(7))
    G11, G12, G22 = geo.metric
    Gm = np.stack([np.stack([G11, G12], -1), np.stack([G12, G22], -1)], -2)
    h = Gm @ geo.shape_operator()
    np.testing.assert_allclose(h[..., 0, 1], h[..., 1, 0], atol=1e-12)


def test_normal_vector_unit_and_orthogonal():
    fol = SYN
    geo = graph_geometry(fol, _smooth_u(3))
    G, _, _ = fol.ambient_jet(geo.u)
    nu = np.moveaxis(geo.normal_vector, 0, -1)
    np.testing.assert_allclose(np.einsum("...a,...ab,...b->...", nu, G, nu), 1.0, rtol=1e-12)
    ux, uy = geo.grad_u
    for t in (np.stack([np.ones_like(ux), 0 * ux, ux], -1), np.stack([0 * ux, np.ones_like(ux), uy], -1)):
        np.testing.assert_allclose(np.einsum("...a,...ab,...b->...", nu, G, t), 0.0, atol=1e-12)
    # Theta = <nu, d_r>
    np.testing.assert_allclose(nu[..., 2], geo.theta, rtol=1e-14)


def test_normal_ricci_fuchsian_closed_form():
    u = 0.5 + 0.4 * np.sin(X32) * np.cos(Y32)
    geo = graph_geometry(FUCHS, u)
    expect = -2 + (1 - geo.theta**2) / np.cosh(u) ** 2
    np.testing.assert_allclose(normal_ricci(FUCHS, geo), expect, atol=1e-12)


def test_laplace_beltrami_on_slice():
    c = 0.7
    geo = graph_geometry(FUCHS, np.full(G32.shape, c))
    errs = []
    for n in (32, 64):
        g = PeriodicGrid(n, n, TWO_PI, TWO_PI)
        fol = AmbientFoliation(make_fuchsian(g))
        X, Y = g.coords()
        geo = graph_geometry(fol, np.full(g.shape, c))
        f = np.sin(X) * np.cos(2 * Y)
        errs.append(np.max(np.abs(laplace_beltrami(fol, geo, f) + 5 * f / math.cosh(c) ** 2)))
    assert errs[1] < 5e-2 and 3.5 < errs[0] / errs[1] < 4.5
    assert np.max(np.abs(laplace_beltrami(fol, geo, np.ones(g.shape)))) == 0.0


# -- velocity and stepping -----------------------------------------------


def test_rhs_examples():
    assert np.all(rhs(FUCHS, np.zeros(G32.shape)) == 0.0)
    np.testing.assert_allclose(rhs(FUCHS, np.full(G32.shape, 0.8)), -2 * math.tanh(0.8), rtol=1e-15)


@pytest.mark.parametrize("fol", [FUCHS, SYN, GEN], ids=["fuchsian", "minimal", "general"])
@given(seed=st.integers(0, 10_000))
def test_rhs_opposes_mean_curvature(fol, seed):
    u = _smooth_u(seed)
    geo = graph_geometry(fol, u)
    v = rhs(fol, u)
    assert np.all(v[geo.H > 0] < 0) and np.all(v[geo.H < 0] > 0)


@given(seed=st.integers(0, 10_000), safety=st.floats(0.05, 1.0))
def test_stable_dt_contract(seed, safety):
    u = _smooth_u(seed)
    cfg = FlowConfig(dt_safety=safety)
    dt = stable_dt(SYN, u, cfg)
    g = SYN.metric(u)
    lam_max = np.max(np.linalg.eigvalsh(np.linalg.inv(g))[..., -1])
    theta_max = np.max(graph_geometry(SYN, u).theta)
    assert dt <= safety * G32.h_min**2 / (4 * lam_max) * (1 + 1e-12)
    assert dt <= safety * G32.h_min**2 / (4 * theta_max**2 * lam_max) * (1 + 1e-12)
    assert stable_dt(SYN, u, FlowConfig(dt_safety=safety, dt_max=1e-9)) == 1e-9


def test_reference_surface_is_stationary():
    u, dt = step(FUCHS, np.zeros(G32.shape), FlowConfig())
    assert dt > 0 and np.all(u == 0.0)


def test_step_respects_limit_and_shape():
    u0 = np.full(G32.shape, 0.3)
    u, dt = step(FUCHS, u0, FlowConfig(), dt_limit=1e-6)
    assert dt == 1e-6 and u.shape == G32.shape and np.all(u < u0)


def test_blowup_is_reported(monkeypatch):
    monkeypatch.setattr(flow, "rhs", lambda fol, u: np.full(u.shape, np.inf))
    with pytest.raises(BlowupError) as ei:
        step(FUCHS, np.full(G32.shape, 0.3), FlowConfig(), t=1.5)
    assert ei.value.t > 1.5
    with pytest.raises(BlowupError) as ei:
        run(FUCHS, np.full(G32.shape, 0.3), FlowConfig(t_end=0.1))
    assert len(ei.value.trace) == 1


def test_step_budget_raises():
    with pytest.raises(BlowupError):
        run(FUCHS, np.full(G32.shape, 0.3), FlowConfig(t_end=1.0, max_steps=3))


def test_config_validation():
    for kw in ({"dt_safety": 0.0}, {"dt_safety": 1.5}, {"scheme": "implicit"},
               {"output_every": 0}, {"dt_max": 0.0}):
        with pytest.raises(ValueError):
            FlowConfig(**kw)
    with pytest.raises(ValueError):
        step(FUCHS, np.zeros((8, 8)), FlowConfig())


@pytest.mark.parametrize("c", [0.3, 1.0, -0.7])
def test_exact_ode_reduction(c):
    # du/dt = -2 tanh u  =>  sinh u(t) = sinh(c) e^{-2t}
    g = PeriodicGrid(16, 16, TWO_PI, TWO_PI)
    fol = AmbientFoliation(make_fuchsian(g))
    res = run(fol, np.full(g.shape, c), FlowConfig(dt_safety=0.2, t_end=1.0))
    exact = math.asinh(math.sinh(c) * math.exp(-2.0))
    assert res.trace.rows[-1].t == pytest.approx(1.0, abs=1e-15)
    assert np.max(np.abs(res.u.values - exact)) <= 1e-4


def test_run_trace_structure(caplog):
    u0 = 0.3 + 0.1 * np.sin(X32)
    res = run(SYN, u0, FlowConfig(t_end=0.05, output_every=5))
    tr = res.trace
    assert TRACE_COLUMNS == tr.rows[0]._fields
    assert math.isnan(tr.rows[0].darea_residual)
    assert all(np.isfinite(r.darea_residual) for r in tr.rows[1:])
    assert tr.rows[-1].t == 0.05
    assert np.all(np.diff(tr.column("t")) > 0)
    assert np.all(np.diff(tr.column("area")) <= 0)
    assert res.steps >= len(tr) - 1
    with caplog.at_level(logging.WARNING, logger="afmcf.flow"):
        run(FUCHS, 0.2 * np.sin(X32), FlowConfig(t_end=0.01))
    assert any("crosses" in m for m in caplog.messages)


def test_run_is_deterministic():
    u0 = 0.4 + 0.1 * np.cos(Y32)
    a = run(SYN, u0, FlowConfig(t_end=0.02))
    b = run(SYN, u0, FlowConfig(t_end=0.02))
    assert np.array_equal(np.array(a.trace.rows), np.array(b.trace.rows), equal_nan=True)
    assert np.array_equal(a.u.values, b.u.values)


# -- evolution identity -----------------------------------------------------


def test_evolution_identity_stationary():
    assert verify_mean_curvature_evolution(FUCHS, np.zeros(G32.shape), 1e-3) == 0.0


def test_evolution_identity_constant_graph_first_order():
    u = np.full(G32.shape, 0.6)
    r1 = verify_mean_curvature_evolution(FUCHS, u, 1e-3)
    r2 = verify_mean_curvature_evolution(FUCHS, u, 5e-4)
    assert r1 < 1e-2 and 1.9 < r1 / r2 < 2.1
    lhs, rhs_ = mean_curvature_evolution_terms(FUCHS, u, 1e-8)
    np.testing.assert_allclose(rhs_, -4 * math.tanh(0.6) / math.cosh(0.6) ** 2, rtol=1e-14)


def test_evolution_identity_general_data():
    u = 0.4 + 0.15 * np.sin(X32) + 0.1 * np.cos(Y32)
    r1 = verify_mean_curvature_evolution(SYN, u, 4e-3)
    r2 = verify_mean_curvature_evolution(SYN, u, 2e-3)
    assert r2 < r1
    with pytest.raises(ValueError):
        mean_curvature_evolution_terms(SYN, u, 1e-3, ricci="flat")
