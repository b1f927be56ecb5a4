"""Tests for the Einstein action functionals on inner-derivation frames.

The centerpiece is an exact symbolic re-derivation (rational arithmetic,
no floats) showing that the curvature pipeline and the closed-form
expression agree identically, which pins the global normalization
CLOSED_FORM_SCALE = 1/2.
"""

import numpy as np
import pytest

from ncgeo import action, engine, liealg
from ncgeo.errors import DegenerateMetricError, InvalidDimensionError


def _random_spd(rng, d, shift=None):
    a = rng.normal(size=(d, d))
    return a @ a.T + (d if shift is None else shift) * np.eye(d)


def test_inverse_metric_examples():
    out = action.inverse_metric(np.diag([2.0, 0.5]))
    assert np.allclose(out, np.diag([0.5, 2.0]), rtol=0, atol=1e-15)
    assert np.allclose(action.inverse_metric(np.eye(3)), np.eye(3),
                       rtol=0, atol=0)


def test_inverse_metric_random_spd():
    rng = np.random.default_rng(7)
    for d in (2, 3, 5):
        for _ in range(5):
            g = _random_spd(rng, d)
            ginv = action.inverse_metric(g)
            assert np.abs(g @ ginv - np.eye(d)).max() < 1e-12


def test_inverse_metric_rejections():
    with pytest.raises(InvalidDimensionError):
        action.inverse_metric(np.ones((2, 3)))
    with pytest.raises(InvalidDimensionError):
        action.inverse_metric(np.ones(4))
    asym = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(InvalidDimensionError):
        action.inverse_metric(asym)
    with pytest.raises(DegenerateMetricError):
        action.inverse_metric(np.zeros((3, 3)))
    singular = np.outer([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(DegenerateMetricError):
        action.inverse_metric(singular)
    ill = np.diag([1.0, 1e-14])
    with pytest.raises(DegenerateMetricError):
        action.inverse_metric(ill)


def test_abelian_structure_gives_zero_action():
    """Vanishing brackets kill both the Killing term and the quadratic
    term, and the Levi-Civita connection of any constant metric is zero."""
    d = 3
    c = np.zeros((d, d, d))
    frame = engine.Frame(c, engine.RealCoefficients(algebra_dim=2))
    rng = np.random.default_rng(11)
    g = _random_spd(rng, d)
    kill = liealg.killing_form(c)
    assert action.action_closed_form(g, c, kill) == 0.0
    assert action.levi_civita_action(g, frame) == 0.0


def test_closed_form_matches_pipeline_random_metrics():
    rng = np.random.default_rng(23)
    for n in (2, 3):
        frame = engine.sl_frame(n)
        c = frame.structure
        kill = liealg.killing_form(c)
        for _ in range(20):
            g = _random_spd(rng, frame.size)
            closed = action.action_closed_form(g, c, kill)
            pipeline = action.levi_civita_action(g, frame)
            assert abs(closed - pipeline) < 1e-12 * max(1.0, abs(closed))


def test_action_pipeline_rejects_field_coefficients():
    ring = engine.LatticeCoefficients((8,), 2 * np.pi / 8, 1, 4, 2)
    frame = engine.Frame(np.zeros((4, 4, 4)), ring)
    gamma = np.zeros((4, 4, 4) + ring.elem_shape)
    with pytest.raises(InvalidDimensionError):
        action.action_pipeline(np.eye(4), gamma, frame)


def test_action_invariant_under_unimodular_basis_change():
    """Relabeling the frame E~_i = M_ij E_j transports the structure
    tensor, the metric and the Killing matrix; the action only depends on
    the geometry, so its value is unchanged whenever |det M| = 1."""
    rng = np.random.default_rng(31)
    for n in (2, 3):
        frame = engine.sl_frame(n)
        c = frame.structure
        d = frame.size
        kill = liealg.killing_form(c)
        for _ in range(5):
            g = _random_spd(rng, d)
            m = rng.normal(size=(d, d))
            while abs(np.linalg.det(m)) < 0.5:
                m = rng.normal(size=(d, d))
            m /= abs(np.linalg.det(m)) ** (1.0 / d)
            minv = np.linalg.inv(m)
            c_t = np.einsum('rs,la,pb,rab->slp', minv, m, m, c)
            g_t = m @ g @ m.T
            kill_t = liealg.killing_form(c_t)
            # the Killing matrix is a bilinear form on the frame
            assert np.abs(kill_t - m @ kill @ m.T).max() < 1e-9 * max(
                1.0, np.abs(kill).max())
            base = action.action_closed_form(g, c, kill)
            moved = action.action_closed_form(g_t, c_t, kill_t)
            assert abs(base - moved) < 1e-8 * max(1.0, abs(base))
            frame_t = engine.Frame(c_t, engine.RealCoefficients(algebra_dim=n))
            piped = action.levi_civita_action(g_t, frame_t)
            assert abs(base - piped) < 1e-8 * max(1.0, abs(base))


def test_tau_normalizer_scales_action():
    rng = np.random.default_rng(41)
    for n in (2, 3):
        frame = engine.sl_frame(n)
        g = _random_spd(rng, frame.size)
        base = action.levi_civita_action(g, frame)
        assert abs(base) > 1e-6
        full = action.levi_civita_action(g, frame, tau_normalizer=1.0)
        quarter = action.levi_civita_action(g, frame, tau_normalizer=0.25)
        assert abs(full - n * base) < 1e-12 * abs(n * base)
        assert abs(quarter - 0.25 * n * base) < 1e-12 * abs(n * base)


def _exact_sl2_structure(sp):
    c = liealg.structure_constants(liealg.sl_basis(2))
    assert np.abs(c - np.round(c)).max() == 0.0
    d = c.shape[0]
    exact = [[[sp.Integer(int(round(c[r, l, p]))) for p in range(d)]
              for l in range(d)] for r in range(d)]
    return c, exact, d


def _random_rational_spd(sp, rng, d):
    ints = rng.integers(-2, 3, size=(d, d))
    a = sp.Matrix(d, d, [sp.Integer(int(v)) for v in ints.ravel()])
    den = int(rng.integers(1, 4))
    return a.T * a + sp.eye(d) * sp.Rational(3, den)


def test_symbolic_rederivation_of_closed_form():
    """Re-derive the pipeline/closed-form identity in exact rational
    arithmetic on sl(2): both routes, divided by the common sqrt|det g|
    volume factor, are identical rational numbers for rational metrics.
    """
    sp = pytest.importorskip("sympy")
    c_np, c, d = _exact_sl2_structure(sp)
    rng = np.random.default_rng(53)
    frame = engine.sl_frame(2)
    half = sp.Rational(1, 2)
    for _ in range(3):
        g = _random_rational_spd(sp, rng, d)
        ginv = g.inv()
        # lowered bracket C[a][b][e] = g_{ar} c^r_{be}
        low = [[[sum(g[a, r] * c[r][b][e] for r in range(d))
                 for e in range(d)] for b in range(d)] for a in range(d)]
        # unique torsion-free metric-compatible connection of a constant
        # metric: g(nabla_{X_i} X_j, X_k) = 1/2 (C_kij + C_jki - C_ijk)
        gamma = [[[half * sum(ginv[m, k] * (low[k][i][j] + low[j][k][i]
                                            - low[i][j][k])
                              for k in range(d))
                   for i in range(d)] for j in range(d)] for m in range(d)]
        # cross-check the symbolic connection against the float engine
        g_np = np.array(g.tolist(), dtype=float)
        gam_np = engine.koszul_levi_civita(g_np, frame)
        gam_sym = np.array(
            [[[float(gamma[m][j][i]) for i in range(d)]
              for j in range(d)] for m in range(d)])
        assert np.abs(gam_np - gam_sym).max() < 1e-12 * max(
            1.0, np.abs(gam_np).max())
        # curvature, Ricci and contraction, all exact
        ric = [[sum(sum(gamma[i][n][i_] * gamma[n][k][j]
                        - gamma[i][n][j] * gamma[n][k][i_]
                        for n in range(d))
                    - sum(c[n][i_][j] * gamma[i][k][n] for n in range(d))
                    for i, i_ in ((t, t) for t in range(d)))
                for j in range(d)] for k in range(d)]
        pre_pipeline = -sum(ginv[j, k] * ric[k][j]
                            for j in range(d) for k in range(d))
        kill = [[sum(c[r][j][s] * c[s][p][r]
                     for r in range(d) for s in range(d))
                 for p in range(d)] for j in range(d)]
        linear = sum(ginv[j, p] * kill[j][p]
                     for j in range(d) for p in range(d))
        quadratic = half * sum(
            ginv[j, p] * ginv[i, l] * g[r, k] * c[r][l][p] * c[k][i][j]
            for j in range(d) for p in range(d) for i in range(d)
            for l in range(d) for r in range(d) for k in range(d))
        pre_closed = half * (linear + quadratic)
        diff = sp.simplify(pre_pipeline - pre_closed)
        assert diff == 0
        # and the float implementation reproduces the exact prevolume
        kill_np = liealg.killing_form(c_np)
        closed_np = action.action_closed_form(g_np, c_np, kill_np)
        det = float(sp.det(g))
        assert abs(closed_np / np.sqrt(abs(det)) - float(pre_closed)) \
            < 1e-12 * max(1.0, abs(float(pre_closed)))
