"""Einstein action functionals for inner-derivation frames on M_n(R) with
centre-valued (real) metrics.

Two routes to the same number:

  * action_pipeline: metric -> Levi-Civita connection -> curvature ->
    Ricci -> contraction, E = -tau(g^{jk} R_{kj}) with the normalized
    trace tau = nu * sqrt(|det g|) * Tr and nu = 1/n by default, which
    folds to E = -sqrt(|det g|) * g^{jk} R_{kj} for central scalars.

  * action_closed_form: the algebraic identity

        E = CLOSED_FORM_SCALE * g^{jp}
            (K_{jp} + 1/2 g^{il} g_{rk} c^r_{lp} c^k_{ij}) sqrt(|det g|)

    with K the adjoint-trace Killing matrix K_{jp} = c^r_{js} c^s_{pr}.

CLOSED_FORM_SCALE = 1/2 is the one global normalization constant that
reconciles the two routes; it multiplies the whole bracket.  No rescale
of K alone can do the job: expanding the pipeline for a constant metric
on a unimodular frame gives exactly

    E = ( 1/2 tr(g^{-1} K) + 1/4 g^{jp} g^{il} g_{rk} c^r_{lp} c^k_{ij} )
        sqrt(|det g|)

so the bracket above evaluates to twice the pipeline value.  The
equality is an exact algebraic identity, re-derived symbolically in the
tests and pinned numerically across algebras and random metrics.
"""

import numpy as np

from . import engine, liealg
from .errors import DegenerateMetricError, InvalidDimensionError

CLOSED_FORM_SCALE = 0.5


def inverse_metric(g):
    """Inverse of a constant symmetric metric; rejects degenerate input."""
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise InvalidDimensionError("metric must be a square matrix")
    scale = np.abs(g).max()
    if scale == 0.0:
        raise DegenerateMetricError("metric is identically zero")
    if np.abs(g - g.T).max() > 1e-12 * scale:
        raise InvalidDimensionError("metric must be symmetric")
    d = g.shape[0]
    det = np.linalg.det(g)
    if not np.isfinite(det) or abs(det) < 1e-12 * scale ** d:
        raise DegenerateMetricError(
            "metric determinant %.3g is below the degeneracy threshold" % det)
    cond = np.linalg.cond(g)
    if cond > engine.METRIC_CONDITION_LIMIT:
        raise DegenerateMetricError("metric condition number %.3g too large" % cond)
    return np.linalg.inv(g)


def action_closed_form(g, c, kill):
    """Closed-form Einstein action of the Levi-Civita connection,

    CLOSED_FORM_SCALE * g^{jp} (K_{jp} + 1/2 g^{il} g_{rk} c^r_{lp} c^k_{ij})
    * sqrt(|det g|).

    Pass kill = liealg.killing_form(c) (adjoint-trace normalization) to
    match action_pipeline exactly; see the module docstring for why the
    global scale sits outside the bracket.
    """
    g = np.asarray(g, dtype=float)
    c = np.asarray(c, dtype=float)
    kill = np.asarray(kill, dtype=float)
    ginv = inverse_metric(g)
    linear = np.einsum('jp,jp->', ginv, kill)
    quadratic = 0.5 * np.einsum('jp,il,rk,rlp,kij->', ginv, ginv, g, c, c)
    value = CLOSED_FORM_SCALE * (linear + quadratic)
    return float(value * np.sqrt(abs(np.linalg.det(g))))


def action_pipeline(g, gamma, frame, tau_normalizer=None):
    """Einstein action -tau(g^{jk} R_{kj}) through the curvature pipeline.

    g and gamma are constant real coefficient tensors on an
    inner-derivation frame with scalar (centre-valued) coefficients.
    tau_normalizer replaces the default 1/n factor in the normalized
    trace tau = nu * sqrt(|det g|) * Tr.
    """
    if frame.ring.elem_shape != ():
        raise InvalidDimensionError(
            "action_pipeline expects scalar coefficients; use the torus "
            "module for field-valued metrics")
    g = np.asarray(g, dtype=float)
    ginv = inverse_metric(g)
    curv = engine.curvature_tensor(gamma, frame)
    ric = engine.ricci(curv)
    contraction = np.einsum('jk,kj->', ginv, ric)
    n = frame.ring.algebra_dim
    nu = (1.0 / n) if tau_normalizer is None else float(tau_normalizer)
    return float(-nu * n * contraction * np.sqrt(abs(np.linalg.det(g))))


def levi_civita_action(g, frame, tau_normalizer=None):
    """action_pipeline evaluated on the Koszul Levi-Civita connection of g."""
    gamma = engine.koszul_levi_civita(np.asarray(g, dtype=float), frame)
    return action_pipeline(g, gamma, frame, tau_normalizer)
