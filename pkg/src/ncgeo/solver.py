"""Gauss-Newton search for critical points of the four-dimensional matrix
model action.

Unknowns are the metric blocks (g11, g22, g12; g21 = g12 is shared by
construction, 48 parameters) and the eight Christoffel blocks (128
parameters).  The residual stacks the metric field equation (64
components) on top of the eight connection equations (128 components);
critical points are exactly its zeros.  Steps are damped Tikhonov
Gauss-Newton solves with a central finite-difference Jacobian,
backtracking whenever the trial metric leaves the well-conditioned
region.  All arithmetic is deterministic: identical config and start
point reproduce the report bitwise.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import palatini
from .errors import InvalidDimensionError

STEP_CONDITION_LIMIT = 1e8
CERTIFICATE_DIRECTIONS = 40

N_METRIC = 48
N_CONN = 128
N_PARAMS = N_METRIC + N_CONN


@dataclass
class SolverConfig:
    max_iterations: int = 200
    tolerance: float = 1e-10
    damping: float = 1e-6
    fd_step: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidDimensionError("max_iterations must be positive")
        if self.tolerance <= 0.0:
            raise InvalidDimensionError("tolerance must be positive")
        if self.damping < 0.0:
            raise InvalidDimensionError("damping must be nonnegative")
        if not 1e-8 <= self.fd_step <= 1e-3:
            raise InvalidDimensionError("fd_step must lie in [1e-8, 1e-3]")


@dataclass
class SolverReport:
    converged: bool
    iterations: int
    residual_norm: float
    field_residual_norm: float
    connection_residual_norms: tuple
    action_value: float
    trace_residual: float
    stationarity_certificate: float
    certificate_directions: int
    distance_to_critical_connection: float
    wall_seconds: float = field(compare=False)
    message: str = ""
    history: tuple = field(default_factory=tuple)


def pack(g, conn):
    """Flatten (BlockMetric, connection) into a 176-vector."""
    return np.concatenate([g.g11.ravel(), g.g22.ravel(), g.g12.ravel(),
                           np.asarray(conn, dtype=float).ravel()])


def unpack(x):
    """Inverse of pack; rebuilds the BlockMetric (validates conditioning)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (N_PARAMS,):
        raise InvalidDimensionError("parameter vector must have length %d" % N_PARAMS)
    g = palatini.BlockMetric(x[:16].reshape(4, 4), x[32:48].reshape(4, 4),
                             x[16:32].reshape(4, 4))
    conn = x[48:].reshape(2, 2, 2, 4, 4)
    return g, conn


def _metric_matrix(x):
    m = np.zeros((8, 8))
    m[:4, :4] = x[:16].reshape(4, 4)
    m[4:, 4:] = x[16:32].reshape(4, 4)
    m[:4, 4:] = x[32:48].reshape(4, 4)
    m[4:, :4] = m[:4, 4:]
    return m


def _residual_from_x(x):
    """Residual vector without BlockMetric construction overhead."""
    m = _metric_matrix(x)
    gi = np.linalg.inv(m)

    class _G:
        matrix = m
        inverse_matrix = gi

        @staticmethod
        def inverse_blocks():
            return gi[:4, :4], gi[:4, 4:], gi[4:, :4], gi[4:, 4:]

    conn = x[48:].reshape(2, 2, 2, 4, 4)
    f = palatini.field_residual(_G, conn)
    c = palatini.connection_residuals(_G, conn)
    return np.concatenate([f.ravel(), c.ravel()])


def residual_vector(g, conn):
    """Stacked residual: field equation (64) then (c1)..(c8) (128)."""
    f = palatini.field_residual(g, conn)
    c = palatini.connection_residuals(g, conn)
    return np.concatenate([f.ravel(), c.ravel()])


def residual_norm(g, conn):
    """Euclidean norm of the stacked residual vector."""
    return float(np.linalg.norm(residual_vector(g, conn)))


def _fd_jacobian(x, step):
    r0 = _residual_from_x(x)
    jac = np.empty((r0.size, x.size))
    for i in range(x.size):
        xp = x.copy()
        xp[i] += step
        xm = x.copy()
        xm[i] -= step
        jac[:, i] = (_residual_from_x(xp) - _residual_from_x(xm)) / (2.0 * step)
    return jac


def stationarity_check(g, conn, num_dirs=CERTIFICATE_DIRECTIONS,
                       step=1e-5, seed=0, plain_trace=False):
    """Max |dE/ds| over random unit directions in (metric, connection) space.

    Metric components of each direction keep the block symmetry h12 = h21.
    num_dirs = 0 returns 0.0 by convention (a degenerate certificate).
    """
    if num_dirs == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_dirs):
        v = rng.standard_normal(N_PARAMS)
        v /= np.linalg.norm(v)
        h = np.zeros((8, 8))
        h[:4, :4] = v[:16].reshape(4, 4)
        h[4:, 4:] = v[16:32].reshape(4, 4)
        h[:4, 4:] = v[32:48].reshape(4, 4)
        h[4:, :4] = h[:4, 4:]
        a = v[48:].reshape(2, 2, 2, 4, 4)
        ep = palatini.action_m4(palatini.BlockMetric.from_matrix(g.matrix + step * h),
                                conn + step * a, plain_trace=plain_trace)
        em = palatini.action_m4(palatini.BlockMetric.from_matrix(g.matrix - step * h),
                                conn - step * a, plain_trace=plain_trace)
        worst = max(worst, abs((ep - em) / (2.0 * step)))
    return worst


def solve(init_g, init_conn, config=None):
    """Damped Gauss-Newton search from (init_g, init_conn).

    Returns (g, conn, SolverReport).  Non-convergence is reported, not
    raised.  A start point that already satisfies the tolerance returns
    with zero iterations.
    """
    if config is None:
        config = SolverConfig()
    t0 = time.perf_counter()
    x = pack(init_g, np.asarray(init_conn, dtype=float))
    lam = config.damping
    r = _residual_from_x(x)
    rn = float(np.linalg.norm(r))
    history = [rn]
    iterations = 0
    converged = rn < config.tolerance
    message = "converged at start" if converged else ""

    while not converged and iterations < config.max_iterations:
        iterations += 1
        try:
            jac = _fd_jacobian(x, config.fd_step)
        except np.linalg.LinAlgError as exc:
            message = "linear algebra failure during Jacobian: %s" % exc
            history.append(rn)
            break
        jtj = jac.T @ jac
        jtr = jac.T @ r
        accepted = False
        for _ in range(12):
            try:
                delta = np.linalg.solve(jtj + lam * np.eye(N_PARAMS), -jtr)
            except np.linalg.LinAlgError:
                lam = max(lam, 1e-12) * 10.0
                continue
            # backtrack while the trial metric is ill conditioned
            trial = x + delta
            shrink = 0
            while shrink < 30:
                m = _metric_matrix(trial)
                cond = np.linalg.cond(m)
                if np.isfinite(cond) and cond < STEP_CONDITION_LIMIT:
                    break
                delta *= 0.5
                trial = x + delta
                shrink += 1
            if shrink == 30:
                lam = max(lam, 1e-12) * 10.0
                continue
            r_trial = _residual_from_x(trial)
            rn_trial = float(np.linalg.norm(r_trial))
            if np.isfinite(rn_trial) and rn_trial < rn:
                x, r, rn = trial, r_trial, rn_trial
                lam = max(lam * 0.25, 1e-12)
                accepted = True
                break
            lam = max(lam, 1e-12) * 10.0
        history.append(rn)
        if not accepted:
            message = "no acceptable step found (damping exhausted)"
            break
        if rn < config.tolerance:
            converged = True

    g, conn = unpack(x)
    f = palatini.field_residual(g, conn)
    cres = palatini.connection_residuals(g, conn)
    cert = stationarity_check(g, conn, CERTIFICATE_DIRECTIONS, seed=config.seed)
    report = SolverReport(
        converged=converged,
        iterations=iterations,
        residual_norm=rn,
        field_residual_norm=float(np.linalg.norm(f)),
        connection_residual_norms=tuple(float(np.linalg.norm(cres[k]))
                                        for k in range(8)),
        action_value=palatini.action_m4(g, conn),
        trace_residual=palatini.ricci_trace(g, conn),
        stationarity_certificate=cert,
        certificate_directions=CERTIFICATE_DIRECTIONS,
        distance_to_critical_connection=float(
            np.linalg.norm(conn - palatini.critical_connection(g))),
        wall_seconds=time.perf_counter() - t0,
        message=message or ("converged" if converged else "iteration limit reached"),
        history=tuple(history),
    )
    return g, conn, report
