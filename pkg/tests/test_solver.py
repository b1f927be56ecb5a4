"""Tests for the damped Gauss-Newton search over block metrics and
connections on M_4(R)."""

import numpy as np
import pytest

from ncgeo import palatini, solver
from ncgeo.errors import InvalidDimensionError


def test_config_validation():
    cfg = solver.SolverConfig()
    assert cfg.max_iterations == 200 and cfg.tolerance == 1e-10
    with pytest.raises(InvalidDimensionError):
        solver.SolverConfig(max_iterations=0)
    with pytest.raises(InvalidDimensionError):
        solver.SolverConfig(tolerance=0.0)
    with pytest.raises(InvalidDimensionError):
        solver.SolverConfig(damping=-1.0)
    with pytest.raises(InvalidDimensionError):
        solver.SolverConfig(fd_step=1e-9)
    with pytest.raises(InvalidDimensionError):
        solver.SolverConfig(fd_step=1e-2)


def test_pack_unpack_roundtrip():
    rng = np.random.default_rng(3)
    g = palatini.random_spd_block_metric(rng)
    conn = rng.normal(size=(2, 2, 2, 4, 4))
    x = solver.pack(g, conn)
    assert x.shape == (solver.N_PARAMS,)
    assert solver.N_PARAMS == solver.N_METRIC + solver.N_CONN == 176
    g2, conn2 = solver.unpack(x)
    assert np.array_equal(g2.matrix, g.matrix)
    assert np.array_equal(conn2, conn)
    with pytest.raises(InvalidDimensionError):
        solver.unpack(np.zeros(175))


def test_residual_anchors():
    ident = palatini.BlockMetric(np.eye(4), np.zeros((4, 4)), np.eye(4))
    assert solver.residual_norm(ident, palatini.zero_connection()) == 0.0
    g0, conn0 = palatini.noncritical_pair()
    assert solver.residual_norm(g0, conn0) > 1e-2
    rng = np.random.default_rng(7)
    g = palatini.random_spd_block_metric(rng)
    assert solver.residual_norm(g, palatini.critical_connection(g)) < 1e-12
    # the stacked vector is field equation (64) then eight symbols (128)
    vec = solver.residual_vector(g0, conn0)
    assert vec.shape == (192,)
    field = palatini.field_residual(g0, conn0)
    assert np.array_equal(vec[:64], field.ravel())


def test_solve_already_converged():
    rng = np.random.default_rng(11)
    g = palatini.random_spd_block_metric(rng)
    conn = palatini.critical_connection(g)
    _, _, report = solver.solve(g, conn)
    assert report.converged
    assert report.iterations == 0
    assert report.message == "converged at start"
    assert report.history[0] == report.residual_norm


def test_solve_recovers_from_perturbed_start():
    for seed in (0, 1):
        rng = np.random.default_rng(100 + seed)
        g = palatini.random_spd_block_metric(rng)
        conn = palatini.critical_connection(g)
        conn = conn + 0.1 * rng.normal(size=conn.shape)
        gout, cout, report = solver.solve(g, conn)
        assert report.converged
        assert 0 < report.iterations < 50
        assert report.residual_norm < 1e-8
        assert report.field_residual_norm < 1e-8
        assert len(report.connection_residual_norms) == 8
        assert max(report.connection_residual_norms) < 1e-8
        assert abs(report.action_value) < 1e-6
        assert abs(report.trace_residual) < 1e-6
        assert report.stationarity_certificate < 1e-4
        assert report.certificate_directions == solver.CERTIFICATE_DIRECTIONS
        # the end point solves the same equations the report quotes
        assert abs(solver.residual_norm(gout, cout) - report.residual_norm) \
            < 1e-14
        assert report.wall_seconds >= 0.0
        assert len(report.history) == report.iterations + 1


def test_solver_is_deterministic():
    rng = np.random.default_rng(13)
    g = palatini.random_spd_block_metric(rng)
    conn = palatini.critical_connection(g) + 0.05 * rng.normal(
        size=(2, 2, 2, 4, 4))
    out1 = solver.solve(g, conn)
    out2 = solver.solve(g, conn)
    assert np.array_equal(out1[0].matrix, out2[0].matrix)
    assert np.array_equal(out1[1], out2[1])
    # reports compare equal; wall time is excluded from the comparison
    assert out1[2] == out2[2]


def test_solve_from_reference_pair_finds_other_branch():
    """The closed-form non-critical pair flows to a genuine critical
    point that is far from the distinguished connection of its metric."""
    g0, conn0 = palatini.noncritical_pair()
    _, _, report = solver.solve(g0, conn0)
    assert report.converged
    assert report.residual_norm < 1e-10
    assert abs(report.action_value) < 1e-6
    assert report.distance_to_critical_connection > 1.0


def test_stationarity_check():
    g0, conn0 = palatini.noncritical_pair()
    assert solver.stationarity_check(g0, conn0, num_dirs=0) == 0.0
    assert solver.stationarity_check(g0, conn0, num_dirs=10) > 1e-2
    rng = np.random.default_rng(17)
    g = palatini.random_spd_block_metric(rng)
    cc = palatini.critical_connection(g)
    assert solver.stationarity_check(g, cc, num_dirs=10) < 1e-8
    # same seed, same certificate
    a = solver.stationarity_check(g, cc, num_dirs=5, seed=4)
    b = solver.stationarity_check(g, cc, num_dirs=5, seed=4)
    assert a == b
