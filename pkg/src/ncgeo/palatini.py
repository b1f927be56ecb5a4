"""The four-dimensional matrix toy model: A = M_4(R) with the two-element
frame of inner derivations ad(F_1), ad(F_2), where F_1, F_2 are commuting
rotation generators sitting in the two diagonal 2x2 blocks.

Metrics are 2x2 arrays of 4x4 blocks g_{ij} with the block-symmetry
g_12 = g_21, assembled into GL_8(R).  The action is

    E(g, conn) = -1/4 sqrt(|det g|) tr_8(g^{-1} r),
    r = [[R_11, R_12], [R_21, R_22]],  R_{kj} = Ricci coefficients,

with a plain-trace variant E = -tr_8(g^{-1} r) that drops both the 1/4
and the volume factor.  Stationarity of E in the metric is equivalent to

    g^{-1} r g^{-1} + (g^{-1} r g^{-1})^T = 0      (field equation)

where T is the block transpose (swap of the off-diagonal 4x4 blocks,
blocks not individually transposed), and stationarity in the connection
is equivalent to the eight equations returned by connection_residuals.
For every metric the distinguished connection critical_connection(g)
solves all of them, and its Ricci coefficients vanish identically.
"""

import numpy as np

from . import engine
from .errors import DegenerateMetricError, InvalidDimensionError

_F = np.array([[0.0, 1.0], [-1.0, 0.0]])
F1 = np.zeros((4, 4))
F1[:2, :2] = _F
F2 = np.zeros((4, 4))
F2[2:, 2:] = _F

BLOCK_CONDITION_LIMIT = 1e12


def m4_frame():
    """Frame of the two commuting inner derivations ad(F_1), ad(F_2)."""
    return engine.Frame(np.zeros((2, 2, 2)), engine.MatrixCoefficients([F1, F2]))


_FRAME = None


def _frame():
    global _FRAME
    if _FRAME is None:
        _FRAME = m4_frame()
    return _FRAME


def block_transpose(m):
    """Swap the off-diagonal 4x4 blocks of an 8x8 matrix.

    This is the transpose in the algebra of 2x2 matrices over M_4(R);
    the blocks themselves are not transposed.
    """
    m = np.asarray(m, dtype=float)
    out = m.copy()
    out[:4, 4:] = m[4:, :4]
    out[4:, :4] = m[:4, 4:]
    return out


class BlockMetric:
    """Metric g given by 4x4 blocks g11, g12, g22 with g21 = g12.

    The 8x8 assembly must be invertible (condition below 1e12).  The
    blocks need not be individually symmetric and the 8x8 matrix need
    not be positive; only the block equality g12 = g21 is structural.
    """

    def __init__(self, g11, g12, g22):
        g11 = np.asarray(g11, dtype=float)
        g12 = np.asarray(g12, dtype=float)
        g22 = np.asarray(g22, dtype=float)
        for name, blk in (("g11", g11), ("g12", g12), ("g22", g22)):
            if blk.shape != (4, 4):
                raise InvalidDimensionError("%s must be 4x4" % name)
            if not np.all(np.isfinite(blk)):
                raise InvalidDimensionError("%s has non-finite entries" % name)
        self.g11 = g11
        self.g12 = g12
        self.g22 = g22
        m = np.zeros((8, 8))
        m[:4, :4] = g11
        m[:4, 4:] = g12
        m[4:, :4] = g12
        m[4:, 4:] = g22
        self.matrix = m
        det = np.linalg.det(m)
        cond = np.linalg.cond(m)
        if abs(det) < 1e-10 or not np.isfinite(cond) or cond > BLOCK_CONDITION_LIMIT:
            raise DegenerateMetricError(
                "8x8 metric is degenerate (det %.3g, condition %.3g)" % (det, cond))
        self.det = det
        self.inverse_matrix = np.linalg.inv(m)

    @classmethod
    def from_matrix(cls, m):
        """Build from an 8x8 array; the off-diagonal blocks must agree."""
        m = np.asarray(m, dtype=float)
        if m.shape != (8, 8):
            raise InvalidDimensionError("expected an 8x8 matrix")
        scale = max(1.0, np.abs(m).max())
        if np.abs(m[:4, 4:] - m[4:, :4]).max() > 1e-12 * scale:
            raise InvalidDimensionError(
                "off-diagonal blocks differ; the metric needs g12 = g21")
        return cls(m[:4, :4], m[:4, 4:], m[4:, 4:])

    @property
    def sqrt_abs_det(self):
        return float(np.sqrt(abs(self.det)))

    def inverse_blocks(self):
        """Blocks (g^11, g^12, g^21, g^22) of the 8x8 inverse.

        In general g^12 != g^21 even though g12 = g21: block symmetry of
        a GL_2(M_4(R)) element does not survive inversion.
        """
        inv = self.inverse_matrix
        return inv[:4, :4], inv[:4, 4:], inv[4:, :4], inv[4:, 4:]

    def __repr__(self):
        return "BlockMetric(det=%.6g)" % self.det


def zero_connection():
    return np.zeros((2, 2, 2, 4, 4))


def critical_connection(g):
    """The distinguished solution conn^g of the eight connection equations.

    With (b11, b12, b21, b22) the inverse blocks:

        Gamma^1_22 = Gamma^1_21 = -b11        Gamma^2_12 = Gamma^2_11 = b22
        Gamma^2_22 = -F2 - b12                Gamma^2_21 = -F1 - b12
        Gamma^1_12 = -F2 + b21                Gamma^1_11 = -F1 + b21

    It is generally neither torsion free nor metric compatible, and it
    is not claimed to be the unique solution.
    """
    b11, b12, b21, b22 = g.inverse_blocks()
    conn = zero_connection()
    conn[0, 1, 1] = -b11
    conn[0, 1, 0] = -b11
    conn[1, 0, 1] = b22
    conn[1, 0, 0] = b22
    conn[1, 1, 1] = -F2 - b12
    conn[1, 1, 0] = -F1 - b12
    conn[0, 0, 1] = -F2 + b21
    conn[0, 0, 0] = -F1 + b21
    return conn


def noncritical_pair():
    """Closed-form reference pair (g0, conn0) with E(g0, conn0) = -1 exactly.

    g0 has zero diagonal blocks and off-diagonal block P = diag-block
    (I_2, swap); conn0 has a single nonzero symbol Gamma^1_11 =
    diag-block(0, diag(1, -1)).  Useful as a certified action value and
    as a non-critical solver start.
    """
    p = np.zeros((4, 4))
    p[0, 0] = p[1, 1] = 1.0
    p[2, 3] = p[3, 2] = 1.0
    g = BlockMetric(np.zeros((4, 4)), p, np.zeros((4, 4)))
    conn = zero_connection()
    conn[0, 0, 0] = np.diag([0.0, 0.0, 1.0, -1.0])
    return g, conn


def asymmetric_inverse_example():
    """Block metric whose inverse has unequal off-diagonal blocks.

    In 2x2 sub-blocks of the 8x8 form:
        [[2I, 0, I, I], [0, I, I, 0], [I, I, I, 0], [I, 0, 0, I]].
    """
    i2 = np.eye(2)
    z = np.zeros((2, 2))
    m = np.block([
        [2 * i2, z, i2, i2],
        [z, i2, i2, z],
        [i2, i2, i2, z],
        [i2, z, z, i2],
    ])
    return BlockMetric.from_matrix(m)


def ricci_blocks(conn):
    """Ricci coefficients R_{kj} as a (2, 2, 4, 4) array."""
    return engine.ricci(engine.curvature_tensor(conn, _frame()))


def ricci_matrix(conn):
    """Ricci coefficients assembled as the 8x8 matrix r = [[R11, R12], [R21, R22]]."""
    ric = ricci_blocks(conn)
    return np.block([[ric[0, 0], ric[0, 1]], [ric[1, 0], ric[1, 1]]])


def action_m4(g, conn, plain_trace=False):
    """Einstein action E(g, conn).

    Standard trace: -1/4 sqrt(|det g|) tr_8(g^{-1} r).  With
    plain_trace=True the unnormalized variant -tr_8(g^{-1} r).
    """
    t = float(np.trace(g.inverse_matrix @ ricci_matrix(conn)))
    if plain_trace:
        return -t
    return -0.25 * g.sqrt_abs_det * t


def ricci_trace(g, conn):
    """tr_8(g^{-1} r); vanishes at every critical point of the action."""
    return float(np.trace(g.inverse_matrix @ ricci_matrix(conn)))


def field_residual(g, conn):
    """Metric field equation residual g^{-1} r g^{-1} + (g^{-1} r g^{-1})^T.

    T is the block transpose.  Zero exactly when the action is stationary
    under all metric perturbations with h12 = h21.
    """
    gi = g.inverse_matrix
    m = gi @ ricci_matrix(conn) @ gi
    return m + block_transpose(m)


def connection_residuals(g, conn):
    """The eight connection stationarity equations, as a (8, 4, 4) array.

    Entry order matches the equation numbering (c1)..(c8); each must
    vanish for the action to be stationary under all connection
    perturbations.  conn[k, j, i] holds Gamma^(k+1)_{(j+1)(i+1)}.
    """
    b11, b12, b21, b22 = g.inverse_blocks()
    c = conn

    def comm(a, b):
        return a @ b - b @ a

    r1 = b11 @ c[1, 0, 1] + c[0, 1, 1] @ b22 + comm(c[0, 0, 1] + F2, b21)
    r2 = b11 @ c[1, 0, 0] + c[0, 1, 0] @ b22 + comm(c[0, 0, 0] + F1, b21)
    r3 = b22 @ c[0, 1, 1] + c[1, 0, 1] @ b11 + comm(c[1, 1, 1] + F2, b12)
    r4 = b22 @ c[0, 1, 0] + c[1, 0, 0] @ b11 + comm(c[1, 1, 0] + F1, b12)
    r5 = b22 @ c[0, 0, 1] - c[1, 1, 1] @ b22 - b12 @ c[1, 0, 1] \
        - c[1, 0, 1] @ b21 - comm(F2, b22)
    r6 = b11 @ c[1, 1, 1] - c[0, 0, 1] @ b11 - b21 @ c[0, 1, 1] \
        - c[0, 1, 1] @ b12 - comm(F2, b11)
    r7 = b22 @ c[0, 0, 0] - c[1, 1, 0] @ b22 - b12 @ c[1, 0, 0] \
        - c[1, 0, 0] @ b21 - comm(F1, b22)
    r8 = b11 @ c[1, 1, 0] - c[0, 0, 0] @ b11 - b21 @ c[0, 1, 0] \
        - c[0, 1, 0] @ b12 - comm(F1, b11)
    return np.array([r1, r2, r3, r4, r5, r6, r7, r8])


def _check_metric_perturbation(h):
    h = np.asarray(h, dtype=float)
    if h.shape != (8, 8):
        raise InvalidDimensionError("metric perturbation must be 8x8")
    scale = max(1.0, np.abs(h).max())
    if np.abs(h[:4, 4:] - h[4:, :4]).max() > 1e-12 * scale:
        raise InvalidDimensionError(
            "metric perturbation must keep the block symmetry h12 = h21")
    return h


def metric_variation_derivative(g, conn, h, plain_trace=False, step=1e-5):
    """dE/ds at s = 0 along g + s*h, connection held fixed.

    Returns (analytic, finite_difference).  Analytic values:
      standard:  -1/4 sqrt(|det g|) [ 1/2 tr(g^{-1} r) tr(h g^{-1})
                                      - tr(h g^{-1} r g^{-1}) ]
      plain:     tr(h g^{-1} r g^{-1})
    """
    h = _check_metric_perturbation(h)
    gi = g.inverse_matrix
    r = ricci_matrix(conn)
    if plain_trace:
        analytic = float(np.trace(h @ gi @ r @ gi))
    else:
        analytic = -0.25 * g.sqrt_abs_det * float(
            0.5 * np.trace(gi @ r) * np.trace(h @ gi) - np.trace(h @ gi @ r @ gi))

    def value(s):
        return action_m4(BlockMetric.from_matrix(g.matrix + s * h), conn,
                         plain_trace=plain_trace)

    fd = (value(step) - value(-step)) / (2.0 * step)
    return analytic, fd


# Pairing of connection-perturbation symbols A^p_{qs} (array index
# [p-1, q-1, s-1]) against the (c1)..(c8) residuals: the derivative of
# tr_8(g^{-1} r) along conn + s*A is sum Tr(sign * c_k @ A_symbol).
_VARIATION_PAIRING = (
    ((0, 0, 0), 0, +1.0),
    ((0, 0, 1), 1, -1.0),
    ((0, 1, 0), 4, -1.0),
    ((0, 1, 1), 6, +1.0),
    ((1, 0, 0), 5, +1.0),
    ((1, 0, 1), 7, -1.0),
    ((1, 1, 0), 2, -1.0),
    ((1, 1, 1), 3, +1.0),
)


def connection_variation_derivative(g, conn, direction, plain_trace=False,
                                    step=1e-5):
    """dE/ds at s = 0 along conn + s*direction, metric held fixed.

    Returns (analytic, finite_difference).  The analytic value pairs the
    perturbation symbols against the eight connection residuals with the
    sign table _VARIATION_PAIRING, scaled by -1/4 sqrt(|det g|) (or -1
    for the plain trace), so it vanishes exactly when all eight
    equations hold.
    """
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (2, 2, 2, 4, 4):
        raise InvalidDimensionError("connection perturbation must be (2,2,2,4,4)")
    res = connection_residuals(g, conn)
    dtrace = 0.0
    for (p, q, s), k, sign in _VARIATION_PAIRING:
        dtrace += sign * float(np.trace(res[k] @ direction[p, q, s]))
    prefactor = -1.0 if plain_trace else -0.25 * g.sqrt_abs_det
    analytic = prefactor * dtrace

    def value(s):
        return action_m4(g, conn + s * direction, plain_trace=plain_trace)

    fd = (value(step) - value(-step)) / (2.0 * step)
    return analytic, fd


def compat_residual_direct(g, conn):
    """Max entry of [F_i, g_{jk}] - Gamma^l_{ji} g_{lk} - g_{jl} Gamma^l_{ki}."""
    gblocks = np.array([[g.g11, g.g12], [g.g12, g.g22]])
    return engine.metric_compat_residual(gblocks, conn, _frame())


def compat_residual_inverse(g, conn):
    """Max entry of g^{pj} Gamma^n_{ji} + Gamma^p_{ji} g^{jn} + [F_i, g^{pn}]."""
    b11, b12, b21, b22 = g.inverse_blocks()
    gib = np.array([[b11, b12], [b21, b22]])
    return engine.metric_compat_residual_inverse(gib, conn, _frame())


def torsion_m4(conn):
    """Torsion coefficients T^k_{ij} of a connection on this frame."""
    return engine.torsion(conn, _frame())


def random_block_metric(rng, max_condition=100.0):
    """Random BlockMetric with entries uniform in [-1, 1], resampled until
    the 8x8 condition number is below max_condition.

    The default gate keeps float64 roundoff in the identity checks a few
    orders below the acceptance tolerances; pass a larger gate (the
    structural limit is 1e6) to stress-test conditioning.
    """
    while True:
        g11 = rng.uniform(-1.0, 1.0, (4, 4))
        g12 = rng.uniform(-1.0, 1.0, (4, 4))
        g22 = rng.uniform(-1.0, 1.0, (4, 4))
        m = np.zeros((8, 8))
        m[:4, :4] = g11
        m[:4, 4:] = g12
        m[4:, :4] = g12
        m[4:, 4:] = g22
        if np.linalg.cond(m) < max_condition:
            return BlockMetric(g11, g12, g22)


def random_spd_block_metric(rng, off_scale=0.2):
    """Random symmetric positive definite BlockMetric.

    Diagonal blocks are Gram matrices plus a ridge; the shared
    off-diagonal block is a small symmetric matrix so g12 = g21 holds
    and the 8x8 assembly stays positive.
    """
    a = rng.standard_normal((4, 4))
    b = rng.standard_normal((4, 4))
    g11 = a @ a.T + 4.0 * np.eye(4)
    g22 = b @ b.T + 4.0 * np.eye(4)
    s = rng.standard_normal((4, 4))
    g12 = off_scale * (s + s.T)
    return BlockMetric(g11, g12, g22)
