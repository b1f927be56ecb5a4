"""Matrix-valued function algebras on a periodic torus grid.

The algebra is C(T^m) (x) M_n(R), carrying a frame of m + n^2 - 1
derivations: m coordinate derivations (periodic central differences on
the grid, zero brackets) followed by the n^2 - 1 inner derivations of
M_n(R) (zero action on centre-valued fields, sl(n) structure constants).
Metrics are block diagonal in that frame: a classical m x m block g_c
and a quantum (n^2 - 1) x (n^2 - 1) block g_q, both fields of symmetric
matrices over the grid.

The total Einstein action is the quadrature of -sqrt(|det g|) g^{jk}R_{kj}
over the grid.  When g_q is constant the mixed curvature terms cancel
identically (already at the discrete level), and the action splits as

    total = sqrt(|det g_q|) * E(g_c)  +  E(g_q) * vol(T^m, g_c),

which split_action_constant_gq computes from the two factors
independently.  classical_eh_oracle re-derives the classical term with
textbook coordinate Christoffel symbols, coded separately from the
generic engine, as a cross-check.
"""

from dataclasses import dataclass

import numpy as np

from . import action, engine, liealg
from .errors import DegenerateMetricError, InvalidDimensionError

BLOCK_CONDITION_LIMIT = 1e12


class TorusGrid:
    """Uniform periodic grid on the m-torus [0, 2*pi)^m.

    points is the per-axis resolution N (at least 8); spacing is 2*pi/N.
    Quadrature is the periodic rectangle rule sum * spacing^m, which is
    the trapezoid rule on a periodic grid.
    """

    def __init__(self, m, points):
        if not 1 <= int(m) <= 3:
            raise InvalidDimensionError("torus dimension m must be 1, 2 or 3")
        if int(points) < 8:
            raise InvalidDimensionError("grid needs at least 8 points per axis")
        self.m = int(m)
        self.points = int(points)
        self.spacing = 2.0 * np.pi / self.points
        self.shape = (self.points,) * self.m

    def axis_coordinates(self):
        """The 1-d coordinate array (shared by every axis)."""
        return self.spacing * np.arange(self.points)

    def coordinate_fields(self):
        """List of m grid-shaped fields x_1, ..., x_m ('ij' indexing)."""
        axes = [self.axis_coordinates() for _ in range(self.m)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def integrate(self, field):
        """Quadrature of a grid scalar field over the torus."""
        field = np.asarray(field, dtype=float)
        if field.shape != self.shape:
            raise InvalidDimensionError(
                "field shape %s does not match grid %s" % (field.shape, self.shape))
        return float(field.sum() * self.spacing ** self.m)

    def __repr__(self):
        return "TorusGrid(m=%d, points=%d)" % (self.m, self.points)


def fourier_scaled(base, amplitude=0.5, axis=0, mode=1):
    """Metric spec (1 + amplitude*sin(mode*x_axis)) * base.

    base must be symmetric; |amplitude| < 1 keeps the field invertible
    whenever base is.
    """
    base = np.asarray(base, dtype=float)
    if abs(amplitude) >= 1.0:
        raise InvalidDimensionError("amplitude must satisfy |a| < 1")

    def spec(coords):
        scale = 1.0 + amplitude * np.sin(mode * coords[axis])
        return np.multiply.outer(base, scale)

    return spec


def conformally_flat(dim, epsilon=0.3, axis=0, mode=1):
    """Metric spec exp(2*phi) * I_dim with phi = epsilon*sin(mode*x_axis)."""

    def spec(coords):
        phi = epsilon * np.sin(mode * coords[axis])
        return np.multiply.outer(np.eye(dim), np.exp(2.0 * phi))

    return spec


def _materialize_block(spec, size, grid, name):
    """Evaluate a metric-block spec to a (size, size, *grid.shape) field.

    Accepts a constant (size, size) array or a callable taking the list
    of coordinate fields.  Validates symmetry and finiteness.
    """
    if callable(spec):
        block = np.asarray(spec(grid.coordinate_fields()), dtype=float)
    else:
        block = np.asarray(spec, dtype=float)
    if block.shape == (size, size):
        block = np.multiply.outer(block, np.ones(grid.shape))
    expected = (size, size) + grid.shape
    if block.shape != expected:
        raise InvalidDimensionError(
            "%s block has shape %s, expected %s or (%d, %d)"
            % (name, block.shape, expected, size, size))
    if not np.all(np.isfinite(block)):
        raise InvalidDimensionError("%s block has non-finite entries" % name)
    scale = max(1.0, np.abs(block).max())
    if np.abs(block - np.swapaxes(block, 0, 1)).max() > 1e-12 * scale:
        raise InvalidDimensionError("%s block must be symmetric" % name)
    return block


def _check_block_invertible(block, name):
    """Pointwise conditioning check; reports the first failing grid point."""
    stacked = np.moveaxis(block, (0, 1), (-2, -1))
    cond = np.linalg.cond(stacked)
    worst = np.max(cond) if cond.ndim else float(cond)
    if not np.isfinite(worst) or worst > BLOCK_CONDITION_LIMIT:
        bad = np.where(np.isfinite(cond), cond, np.inf)
        idx = np.unravel_index(int(np.argmax(bad)), cond.shape) if cond.ndim else ()
        raise DegenerateMetricError(
            "%s block is degenerate at grid point %s (condition %.3g)"
            % (name, idx, worst))


class TorusModel:
    """Grid, frame and block-diagonal metric field, ready for the pipeline.

    metric_field has shape (D, D, *grid.shape) with D = m + n^2 - 1 and
    must vanish identically on the classical-quantum cross blocks; the
    diagonal blocks must be pointwise well conditioned.  gc_spec/gq_spec,
    when given, let grid_convergence re-evaluate the model at other
    resolutions; models built from tabulated data leave them None.
    """

    def __init__(self, grid, n, metric_field, gc_spec=None, gq_spec=None,
                 fd_order=2):
        if n < 2:
            raise InvalidDimensionError("matrix size n must be at least 2")
        self.grid = grid
        self.n = int(n)
        self.d = self.n * self.n - 1
        self.D = grid.m + self.d
        metric_field = np.asarray(metric_field, dtype=float)
        expected = (self.D, self.D) + grid.shape
        if metric_field.shape != expected:
            raise InvalidDimensionError(
                "metric field has shape %s, expected %s"
                % (metric_field.shape, expected))
        m = grid.m
        cross = max(np.abs(metric_field[:m, m:]).max(),
                    np.abs(metric_field[m:, :m]).max())
        if cross > 0.0:
            raise InvalidDimensionError(
                "metric must be block diagonal: classical-quantum cross "
                "entries are not zero (max %.3g)" % cross)
        _check_block_invertible(metric_field[:m, :m], "classical")
        _check_block_invertible(metric_field[m:, m:], "quantum")
        self.metric = metric_field
        self.gc = metric_field[:m, :m]
        self.gq = metric_field[m:, m:]
        self.gc_spec = gc_spec
        self.gq_spec = gq_spec
        self.fd_order = fd_order
        self.quantum_structure = liealg.structure_constants(liealg.sl_basis(self.n))
        structure = np.zeros((self.D, self.D, self.D))
        structure[m:, m:, m:] = self.quantum_structure
        ring = engine.LatticeCoefficients(grid.shape, grid.spacing, m, self.D,
                                          self.n, fd_order=fd_order)
        self.frame = engine.Frame(structure, ring)

    def constant_gq(self):
        """The constant quantum block as a (d, d) matrix, or None if g_q varies."""
        flat = self.gq.reshape(self.d, self.d, -1)
        first = flat[:, :, 0]
        scale = max(1.0, np.abs(first).max())
        if np.abs(flat - first[:, :, None]).max() > 1e-13 * scale:
            return None
        return first.copy()

    def __repr__(self):
        return "TorusModel(m=%d, n=%d, points=%d)" % (
            self.grid.m, self.n, self.grid.points)


def build_model(m, n, points, gc_spec, gq_spec, fd_order=2):
    """Assemble a TorusModel from metric-block specs.

    Specs are constant symmetric matrices or callables mapping the list
    of coordinate fields to a block field; see fourier_scaled and
    conformally_flat for ready-made families.
    """
    grid = TorusGrid(m, points)
    d = n * n - 1
    gc = _materialize_block(gc_spec, m, grid, "classical")
    gq = _materialize_block(gq_spec, d, grid, "quantum")
    metric = np.zeros((m + d, m + d) + grid.shape)
    metric[:m, :m] = gc
    metric[m:, m:] = gq
    return TorusModel(grid, n, metric, gc_spec=gc_spec, gq_spec=gq_spec,
                      fd_order=fd_order)


def _sqrt_abs_det(block):
    """Pointwise sqrt(|det|) of a (k, k, *grid) field."""
    stacked = np.moveaxis(block, (0, 1), (-2, -1))
    return np.sqrt(np.abs(np.linalg.det(stacked)))


def total_action(model):
    """Einstein action of the full block-diagonal metric.

    Pointwise Koszul Levi-Civita connection, curvature, Ricci, then the
    quadrature of -sqrt(|det g|) g^{jk} R_{kj}.  (The 1/n trace weight
    and the algebra trace of the identity cancel for centre-valued
    metrics, so no explicit n factor appears.)
    """
    frame = model.frame
    gamma = engine.koszul_levi_civita(model.metric, frame)
    curv = engine.curvature_tensor(gamma, frame)
    ric = engine.ricci(curv)
    ginv = engine.invert_centre_metric(model.metric, frame)
    scalar = np.einsum('jk...,kj...->...', ginv, ric)
    weight = _sqrt_abs_det(model.metric)
    return model.grid.integrate(-weight * scalar)


def classical_block_action(model):
    """Action of the classical block alone, via the generic pipeline.

    Equals -integral of sqrt(|det g_c|) g_c^{jk} R^c_{kj} computed with
    the same frame machinery as total_action but restricted to the m
    coordinate derivations.
    """
    grid = model.grid
    m = grid.m
    ring = engine.LatticeCoefficients(grid.shape, grid.spacing, m, m, 1,
                                      fd_order=model.fd_order)
    frame = engine.Frame(np.zeros((m, m, m)), ring)
    gamma = engine.koszul_levi_civita(model.gc, frame)
    curv = engine.curvature_tensor(gamma, frame)
    ric = engine.ricci(curv)
    ginv = engine.invert_centre_metric(model.gc, frame)
    scalar = np.einsum('jk...,kj...->...', ginv, ric)
    weight = _sqrt_abs_det(model.gc)
    return grid.integrate(-weight * scalar)


def quantum_point_action(model):
    """Action of the constant quantum block as a matrix-algebra geometry.

    Requires g_q constant over the grid; uses the closed-form evaluation
    against the sl(n) structure constants.
    """
    gq = model.constant_gq()
    if gq is None:
        raise InvalidDimensionError("quantum block varies over the grid")
    kill = liealg.killing_form(model.quantum_structure)
    return action.action_closed_form(gq, model.quantum_structure, kill)


def classical_volume(model):
    """Riemannian volume of the torus: quadrature of sqrt(|det g_c|)."""
    return model.grid.integrate(_sqrt_abs_det(model.gc))


def split_action_constant_gq(model):
    """The (classical, quantum) contributions for constant g_q.

    classical = sqrt(|det g_q|) * E(g_c) via the m-dimensional pipeline;
    quantum = E(g_q) * vol(T^m, g_c) via the closed form and the volume
    quadrature.  Their sum reproduces total_action; the mixed curvature
    terms cancel identically for constant g_q.
    """
    gq = model.constant_gq()
    if gq is None:
        raise InvalidDimensionError(
            "split_action_constant_gq needs a quantum block that is "
            "constant over the grid")
    weight = float(np.sqrt(abs(np.linalg.det(gq))))
    classical = weight * classical_block_action(model)
    quantum = quantum_point_action(model) * classical_volume(model)
    return classical, quantum


def _ddx(field, axis, spacing):
    """Second-order periodic central difference (local to the oracle)."""
    return (np.roll(field, -1, axis=axis) - np.roll(field, 1, axis=axis)) \
        / (2.0 * spacing)


def classical_eh_oracle(gc_field, grid):
    """Coordinate-geometry Einstein action of g_c, coded independently.

    Standard textbook route: Christoffel symbols from metric derivatives,
    Ricci tensor from their derivatives and quadratic terms, scalar
    curvature by contraction, then the quadrature of
    -sqrt(|det g_c|) * scal.  The sign matches the derivation-based
    action so the value is directly comparable to
    classical_block_action.  Second-order differences only.
    """
    gc = np.asarray(gc_field, dtype=float)
    m = grid.m
    if gc.shape != (m, m) + grid.shape:
        raise InvalidDimensionError(
            "classical field has shape %s, expected %s"
            % (gc.shape, (m, m) + grid.shape))
    _check_block_invertible(gc, "classical")
    stacked = np.moveaxis(gc, (0, 1), (-2, -1))
    ginv = np.moveaxis(np.linalg.inv(stacked), (-2, -1), (0, 1))
    h = grid.spacing

    # dg[k, i, j] = d_k g_ij
    dg = np.empty((m,) + gc.shape)
    for k in range(m):
        dg[k] = _ddx(gc, 2 + k, h)
    # Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    grid_axes = tuple(range(3, dg.ndim))
    s = (np.transpose(dg, (2, 0, 1) + grid_axes)
         + np.transpose(dg, (2, 1, 0) + grid_axes) - dg)
    gam = 0.5 * np.einsum('kl...,lij...->kij...', ginv, s)
    # Ricci_ij = d_k Gamma^k_ij - d_j Gamma^k_ik + Gamma^k_kl Gamma^l_ij
    #            - Gamma^k_jl Gamma^l_ik
    ric = np.zeros_like(gc)
    trace_gam = np.einsum('kki...->i...', gam)
    for k in range(m):
        ric += _ddx(gam[k], 2 + k, h)
    for j in range(m):
        ric[:, j] -= _ddx(trace_gam, 1 + j, h)
    ric += np.einsum('l...,lij...->ij...', trace_gam, gam)
    ric -= np.einsum('kjl...,lik...->ij...', gam, gam)

    scal = np.einsum('ij...,ij...->...', ginv, ric)
    weight = np.sqrt(np.abs(np.linalg.det(stacked)))
    return grid.integrate(-weight * scal)


@dataclass
class ConvergenceReport:
    resolutions: tuple
    values: tuple
    differences: tuple
    orders: tuple
    observed_order: float


def grid_convergence(model, resolutions):
    """Re-run total_action over a doubling ladder of resolutions.

    Needs a model built from re-evaluable specs; tabulated-field models
    cannot be re-gridded.  Returns a ConvergenceReport with the observed
    Richardson order; exact (resolution-independent) values report an
    infinite order.
    """
    if model.gc_spec is None or model.gq_spec is None:
        raise InvalidDimensionError(
            "grid_convergence needs spec-built models; tabulated fields "
            "cannot be re-evaluated at other resolutions")
    resolutions = [int(r) for r in resolutions]
    if len(resolutions) < 3:
        raise InvalidDimensionError("need at least 3 resolutions")
    for a, b in zip(resolutions, resolutions[1:]):
        if b != 2 * a:
            raise InvalidDimensionError("resolutions must double: %s" % resolutions)
    values = []
    for points in resolutions:
        rebuilt = build_model(model.grid.m, model.n, points,
                              model.gc_spec, model.gq_spec,
                              fd_order=model.fd_order)
        values.append(total_action(rebuilt))
    diffs = [abs(b - a) for a, b in zip(values, values[1:])]
    scale = max(1.0, max(abs(v) for v in values))
    orders = []
    for d1, d2 in zip(diffs, diffs[1:]):
        if d2 <= 1e-14 * scale:
            orders.append(float('inf'))
        else:
            orders.append(float(np.log2(d1 / d2)))
    return ConvergenceReport(tuple(resolutions), tuple(values), tuple(diffs),
                             tuple(orders), orders[-1])


def write_field_file(path, model):
    """Dump the metric blocks as plain text.

    Header line `m n N`, then one line per grid point in row-major order
    holding the lower triangle of g_c followed by the lower triangle of
    g_q, whitespace-separated decimals.
    """
    m = model.grid.m
    d = model.d
    with open(path, "w") as fh:
        fh.write("%d %d %d\n" % (m, model.n, model.grid.points))
        gc = model.gc.reshape(m, m, -1)
        gq = model.gq.reshape(d, d, -1)
        for p in range(gc.shape[-1]):
            vals = [gc[i, j, p] for i in range(m) for j in range(i + 1)]
            vals += [gq[i, j, p] for i in range(d) for j in range(i + 1)]
            fh.write(" ".join("%.17g" % v for v in vals) + "\n")


def read_field_file(path):
    """Parse a tabulated-field file; returns (m, n, points, gc, gq)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise InvalidDimensionError("metric file is empty")
    head = lines[0].split()
    if len(head) != 3:
        raise InvalidDimensionError("metric file header must be `m n N`")
    try:
        m, n, points = (int(tok) for tok in head)
    except ValueError:
        raise InvalidDimensionError("metric file header must hold integers")
    d = n * n - 1
    total = points ** m
    if len(lines) - 1 != total:
        raise InvalidDimensionError(
            "metric file has %d data lines, expected %d" % (len(lines) - 1, total))
    per_line = m * (m + 1) // 2 + d * (d + 1) // 2
    gc = np.zeros((m, m, total))
    gq = np.zeros((d, d, total))
    for p, line in enumerate(lines[1:]):
        vals = [float(tok) for tok in line.split()]
        if len(vals) != per_line:
            raise InvalidDimensionError(
                "line %d has %d values, expected %d" % (p + 2, len(vals), per_line))
        pos = 0
        for i in range(m):
            for j in range(i + 1):
                gc[i, j, p] = gc[j, i, p] = vals[pos]
                pos += 1
        for i in range(d):
            for j in range(i + 1):
                gq[i, j, p] = gq[j, i, p] = vals[pos]
                pos += 1
    shape = (points,) * m
    return m, n, points, gc.reshape(m, m, *shape), gq.reshape(d, d, *shape)


def build_model_from_file(path, fd_order=2):
    """TorusModel from a tabulated-field file (not re-griddable)."""
    m, n, points, gc, gq = read_field_file(path)
    grid = TorusGrid(m, points)
    d = n * n - 1
    metric = np.zeros((m + d, m + d) + grid.shape)
    metric[:m, :m] = gc
    metric[m:, m:] = gq
    return TorusModel(grid, n, metric, fd_order=fd_order)
