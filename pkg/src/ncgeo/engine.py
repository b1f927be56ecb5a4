"""Connection, curvature and torsion calculus over a frame of derivations.

A frame is a finite family X_1..X_D of derivations of an algebra, closed
under brackets, together with a coefficient ring that stores how elements
multiply and how each frame direction acts on them.  Inner derivations
(commutators with fixed generators) and coordinate derivations (lattice
finite differences) then share one code path.

Index conventions, fixed package-wide:

    structure   c[r, l, p]     [X_l, X_p] = c^r_{lp} X_r
    Christoffel gamma[k, j, i]  nabla_{X_i} X_j = X_k (x) Gamma^k_{ji}
                               (axis 0 upper, axis 1 differentiated frame
                                element, axis 2 direction of derivation)
    curvature   R[m, k, i, j]   R^m_{kij}
    Ricci       ric[k, j] = sum_i R[i, k, i, j]
    torsion     T[k, i, j] = gamma[k, j, i] - gamma[k, i, j] - c[k, i, j] * 1

Coefficient tensors are numpy arrays whose leading axes are the frame
indices and whose trailing axes (ring.elem_shape) hold one ring element.
"""

import numpy as np

from . import liealg
from .errors import DegenerateMetricError, InvalidDimensionError

METRIC_CONDITION_LIMIT = 1e12


class RealCoefficients:
    """Centre-valued coefficients: plain real scalars lambda ~ lambda * 1.

    All derivations act trivially on the centre, so derive() is zero.
    algebra_dim records the size n of the underlying M_n(R); the algebra
    trace of a central element lambda*1 is n*lambda.
    """

    elem_shape = ()
    commutative = True

    def __init__(self, algebra_dim=1):
        self.algebra_dim = algebra_dim

    def mul(self, a, b):
        return a * b

    def derive(self, i, a):
        return np.zeros_like(a)

    def one(self):
        return 1.0


class MatrixCoefficients:
    """Full-matrix coefficients acted on by inner derivations a -> [F_i, a]."""

    commutative = False

    def __init__(self, generators):
        gens = [np.asarray(f, dtype=float) for f in generators]
        shape = gens[0].shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise InvalidDimensionError("generators must be square matrices")
        if any(f.shape != shape for f in gens):
            raise InvalidDimensionError("generators must share one shape")
        self.generators = gens
        self.elem_shape = shape
        self.algebra_dim = shape[0]

    def mul(self, a, b):
        return a @ b

    def derive(self, i, a):
        f = self.generators[i]
        return f @ a - a @ f

    def one(self):
        return np.eye(self.algebra_dim)


class LatticeCoefficients:
    """Scalar fields on a periodic grid, representing centre-valued
    functions on a torus times M_n(R).

    The first num_coordinates frame directions act by central finite
    differences along the matching grid axis; the remaining (inner)
    directions act by zero.  fd_order selects the 2nd- or 4th-order
    periodic central stencil.
    """

    commutative = True

    def __init__(self, grid_shape, spacing, num_coordinates, total_size,
                 algebra_dim, fd_order=2):
        if len(grid_shape) != num_coordinates:
            raise InvalidDimensionError(
                "grid rank %d != number of coordinate directions %d"
                % (len(grid_shape), num_coordinates))
        if fd_order not in (2, 4):
            raise InvalidDimensionError("fd_order must be 2 or 4")
        self.elem_shape = tuple(grid_shape)
        self.spacing = float(spacing)
        self.num_coordinates = num_coordinates
        self.total_size = total_size
        self.algebra_dim = algebra_dim
        self.fd_order = fd_order

    def mul(self, a, b):
        return a * b

    def derive(self, i, a):
        if i >= self.num_coordinates:
            return np.zeros_like(a)
        return central_difference(a, i, self.spacing, self.fd_order)

    def one(self):
        return np.ones(self.elem_shape)


def central_difference(f, axis, spacing, order=2):
    """Periodic central difference of a grid function along one axis."""
    if order == 2:
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) / (2.0 * spacing)
    if order == 4:
        return (-np.roll(f, -2, axis=axis) + 8.0 * np.roll(f, -1, axis=axis)
                - 8.0 * np.roll(f, 1, axis=axis) + np.roll(f, 2, axis=axis)) / (12.0 * spacing)
    raise InvalidDimensionError("order must be 2 or 4")


class Frame:
    """Bracket-closed family of derivations with coefficient ring.

    structure is the real (D, D, D) tensor c[r, l, p]; ring supplies the
    coefficient arithmetic.  Antisymmetry and the Jacobi identity of the
    structure tensor are checked on construction.
    """

    def __init__(self, structure, ring):
        structure = np.asarray(structure, dtype=float)
        if structure.ndim != 3 or len(set(structure.shape)) != 1:
            raise InvalidDimensionError(
                "structure tensor must have shape (D, D, D)")
        cmax = np.abs(structure).max()
        if liealg.antisymmetry_residual(structure) > 1e-12 * max(1.0, cmax):
            raise InvalidDimensionError(
                "structure tensor is not antisymmetric in its lower indices")
        if liealg.jacobi_residual(structure) > 1e-12 * max(1.0, cmax) ** 2:
            raise InvalidDimensionError("structure tensor violates Jacobi")
        self.structure = structure
        self.ring = ring
        self.size = structure.shape[0]

    def __repr__(self):
        return "Frame(size=%d, ring=%s)" % (self.size, type(self.ring).__name__)


def sl_frame(n):
    """Inner-derivation frame of M_n(R) spanned by the sl(n) basis, with
    centre-valued (real scalar) coefficients."""
    c = liealg.structure_constants(liealg.sl_basis(n))
    return Frame(c, RealCoefficients(algebra_dim=n))


def _check_coefficients(arr, frame, index_rank, what):
    arr = np.asarray(arr, dtype=float)
    d = frame.size
    expected = (d,) * index_rank + tuple(frame.ring.elem_shape)
    if arr.shape != expected:
        raise InvalidDimensionError(
            "%s has shape %s, expected %s for this frame/ring"
            % (what, arr.shape, expected))
    return arr


def curvature_tensor(gamma, frame):
    """Curvature R[m, k, i, j] of a connection with coefficients gamma.

    R^m_{kij} = Gamma^m_{ni} Gamma^n_{kj} - Gamma^m_{nj} Gamma^n_{ki}
                + X_i . Gamma^m_{kj} - X_j . Gamma^m_{ki}
                - c^n_{ij} Gamma^m_{kn}

    Antisymmetry in (i, j) holds by construction: entries are computed for
    i < j and mirrored.
    """
    gamma = _check_coefficients(gamma, frame, 3, "connection")
    ring = frame.ring
    c = frame.structure
    d = frame.size
    out = np.zeros((d, d, d, d) + tuple(ring.elem_shape))
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(d):
                for m in range(d):
                    acc = ring.derive(i, gamma[m, k, j]) - ring.derive(j, gamma[m, k, i])
                    for n in range(d):
                        acc = acc + ring.mul(gamma[m, n, i], gamma[n, k, j])
                        acc = acc - ring.mul(gamma[m, n, j], gamma[n, k, i])
                        if c[n, i, j] != 0.0:
                            acc = acc - c[n, i, j] * gamma[m, k, n]
                    out[m, k, i, j] = acc
                    out[m, k, j, i] = -acc
    return out


def ricci(curvature):
    """Ricci coefficients ric[k, j] = sum_i R[i, k, i, j]."""
    return np.einsum('ikij...->kj...', np.asarray(curvature, dtype=float))


def torsion(gamma, frame):
    """Torsion T[k, i, j] = gamma[k, j, i] - gamma[k, i, j] - c[k, i, j] * 1."""
    gamma = _check_coefficients(gamma, frame, 3, "connection")
    c = frame.structure
    one = frame.ring.one()
    elem_axes = tuple(range(3, gamma.ndim))
    swapped = np.transpose(gamma, (0, 2, 1) + elem_axes)
    central = np.multiply.outer(c, one) if np.ndim(one) else c * one
    return swapped - gamma - central


def invert_centre_metric(g, frame):
    """Pointwise inverse of a centre-valued metric g[i, j] (+ element axes).

    Raises DegenerateMetricError when any pointwise condition number
    exceeds METRIC_CONDITION_LIMIT.
    """
    g = _check_coefficients(g, frame, 2, "metric")
    e = g.ndim - 2
    if e == 0:
        cond = np.linalg.cond(g)
        if not np.isfinite(cond) or cond > METRIC_CONDITION_LIMIT:
            raise DegenerateMetricError(
                "metric condition number %.3g exceeds %.1g" % (cond, METRIC_CONDITION_LIMIT))
        return np.linalg.inv(g)
    stacked = np.moveaxis(g, (0, 1), (-2, -1))
    cond = np.linalg.cond(stacked)
    worst = np.max(cond)
    if not np.isfinite(worst) or worst > METRIC_CONDITION_LIMIT:
        idx = np.unravel_index(int(np.nanargmax(np.where(np.isfinite(cond), cond, np.inf))),
                               cond.shape)
        raise DegenerateMetricError(
            "metric is degenerate at grid point %s (condition %.3g)" % (idx, worst))
    return np.moveaxis(np.linalg.inv(stacked), (-2, -1), (0, 1))


def koszul_levi_civita(g, frame):
    """Levi-Civita connection of a centre-valued metric via the Koszul formula.

    2 g_{kl} Gamma^l_{ji} = X_i.g_{jk} + X_j.g_{ik} - X_k.g_{ij}
                            + c^l_{ij} g_{lk} + c^l_{ki} g_{lj} + c^l_{kj} g_{li}

    Returns gamma[k, j, i] in the package layout.  The output is metric
    compatible and torsion free by construction of the formula, which the
    residual helpers below verify numerically.
    """
    if not frame.ring.commutative:
        raise InvalidDimensionError(
            "Koszul formula needs centre-valued (commutative) coefficients")
    g = _check_coefficients(g, frame, 2, "metric")
    ring = frame.ring
    c = frame.structure
    d = frame.size
    ginv = invert_centre_metric(g, frame)
    rhs = np.zeros((d, d, d) + g.shape[2:])
    for k in range(d):
        for j in range(d):
            for i in range(d):
                acc = ring.derive(i, g[j, k]) + ring.derive(j, g[i, k]) - ring.derive(k, g[i, j])
                for l in range(d):
                    if c[l, i, j] != 0.0:
                        acc = acc + c[l, i, j] * g[l, k]
                    if c[l, k, i] != 0.0:
                        acc = acc + c[l, k, i] * g[l, j]
                    if c[l, k, j] != 0.0:
                        acc = acc + c[l, k, j] * g[l, i]
                rhs[k, j, i] = acc
    gamma = 0.5 * np.einsum('mk...,kji...->mji...', ginv, rhs)
    return gamma


def torsion_part_connection(g, c):
    """Closed-form Levi-Civita coefficients for a constant real metric on an
    inner-derivation frame:

    Gamma^i_{jk} = 1/2 (c^i_{kj} + g^{il} g_{jn} c^n_{lk} + g^{il} g_{kn} c^n_{lj})

    where the symbol with lower pair (j, k) multiplies the frame element
    differentiated j in direction k, i.e. the result is gamma[i, j, k] in
    the package layout.
    """
    g = np.asarray(g, dtype=float)
    c = np.asarray(c, dtype=float)
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > METRIC_CONDITION_LIMIT:
        raise DegenerateMetricError("metric condition number %.3g too large" % cond)
    ginv = np.linalg.inv(g)
    term1 = np.transpose(c, (0, 2, 1))
    term2 = np.einsum('il,jn,nlk->ijk', ginv, g, c)
    term3 = np.einsum('il,kn,nlj->ijk', ginv, g, c)
    return 0.5 * (term1 + term2 + term3)


def swap_lower_indices(gamma):
    """Exchange the differentiated-element and direction axes.

    Converts between the package convention nabla_{X_i} X_j = X_k Gamma^k_{ji}
    (gamma[k, j, i]) and the convention that writes nabla_{X_j} X_k with
    symbol indices in (j, k) order.
    """
    gamma = np.asarray(gamma, dtype=float)
    elem_axes = tuple(range(3, gamma.ndim))
    return np.transpose(gamma, (0, 2, 1) + elem_axes)


def metric_compat_residual(g, gamma, frame):
    """Max-magnitude entry of X_i.g_{jk} - Gamma^l_{ji} g_{lk} - g_{jl} Gamma^l_{ki}.

    Ring products keep the stated operand order, so the residual is
    meaningful for matrix-valued metrics as well.
    """
    g = _check_coefficients(g, frame, 2, "metric")
    gamma = _check_coefficients(gamma, frame, 3, "connection")
    ring = frame.ring
    d = frame.size
    worst = 0.0
    for i in range(d):
        for j in range(d):
            for k in range(d):
                acc = ring.derive(i, g[j, k])
                for l in range(d):
                    acc = acc - ring.mul(gamma[l, j, i], g[l, k])
                    acc = acc - ring.mul(g[j, l], gamma[l, k, i])
                worst = max(worst, float(np.abs(acc).max()))
    return worst


def metric_compat_residual_inverse(ginv, gamma, frame):
    """Max-magnitude entry of g^{pj} Gamma^n_{ji} + Gamma^p_{ji} g^{jn} + X_i.g^{pn},

    the compatibility condition written against the inverse-metric
    coefficients (for inner-derivation frames X_i.a = [F_i, a]).
    """
    ginv = _check_coefficients(ginv, frame, 2, "inverse metric")
    gamma = _check_coefficients(gamma, frame, 3, "connection")
    ring = frame.ring
    d = frame.size
    worst = 0.0
    for p in range(d):
        for n in range(d):
            for i in range(d):
                acc = ring.derive(i, ginv[p, n])
                for j in range(d):
                    acc = acc + ring.mul(ginv[p, j], gamma[n, j, i])
                    acc = acc + ring.mul(gamma[p, j, i], ginv[j, n])
                worst = max(worst, float(np.abs(acc).max()))
    return worst


def torsion_residual(gamma, frame):
    """Max-magnitude torsion entry; zero for a torsion-free connection."""
    return float(np.abs(torsion(gamma, frame)).max())


def leibniz_residual(frame, pairs):
    """Max over supplied element pairs and directions of
    |X_i.(ab) - (X_i.a) b - a (X_i.b)|.

    Exact rings (scalars, matrices) satisfy this to rounding; lattice
    rings satisfy it to the order of the difference stencil.
    """
    ring = frame.ring
    worst = 0.0
    for a, b in pairs:
        ab = ring.mul(a, b)
        for i in range(frame.size):
            resid = ring.derive(i, ab) - ring.mul(ring.derive(i, a), b) \
                - ring.mul(a, ring.derive(i, b))
            worst = max(worst, float(np.abs(resid).max()))
    return worst
