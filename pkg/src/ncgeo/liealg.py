"""Matrix Lie algebra substrate: traceless bases, structure constants,
and the Killing form.

Index convention used throughout the package: a structure tensor c has
layout c[r, l, p] with [E_l, E_p] = c^r_{lp} E_r.
"""

import numpy as np

from .errors import DegenerateBasisError, InvalidDimensionError

GRAM_CONDITION_LIMIT = 1e10


class DerivationBasis:
    """Ordered basis of traceless n x n real matrices.

    The matrices span a space of inner derivations ad(E_i) of M_n(R).
    Stored as a (dim, n, n) array.  Generators must be traceless and
    linearly independent under the trace pairing <A, B> = tr(AB): the
    Gram matrix has to be invertible so commutators can be re-expanded
    in the basis.
    """

    def __init__(self, mats):
        mats = np.asarray(mats, dtype=float)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise InvalidDimensionError(
                "basis must be a (dim, n, n) array of square matrices, got shape %s"
                % (mats.shape,))
        if mats.shape[0] == 0:
            raise InvalidDimensionError("basis needs at least one generator")
        if not np.all(np.isfinite(mats)):
            raise DegenerateBasisError("basis contains non-finite entries")
        scale = np.abs(mats).max()
        if scale == 0.0:
            raise DegenerateBasisError("basis is identically zero")
        traces = np.trace(mats, axis1=1, axis2=2)
        if np.abs(traces).max() > 1e-12 * scale:
            raise DegenerateBasisError("generators must be traceless")
        gram = np.einsum('iab,jba->ij', mats, mats)
        if np.linalg.cond(gram) > GRAM_CONDITION_LIMIT:
            raise DegenerateBasisError(
                "Gram matrix of trace pairings is singular; generators are "
                "linearly dependent")
        self.mats = mats
        self.dim = mats.shape[0]
        self.n = mats.shape[1]
        self.gram = gram

    def __repr__(self):
        return "DerivationBasis(dim=%d, n=%d)" % (self.dim, self.n)


def sl_basis(n):
    """Standard basis of sl(n, R), dimension n^2 - 1.

    Order: off-diagonal units e_ab in lexicographic (a, b) order, then the
    diagonal differences e_aa - e_(a+1)(a+1).  For n = 2 this gives
    (e_12, e_21, diag(1, -1)).
    """
    if n < 2:
        raise InvalidDimensionError("sl(n) basis needs n >= 2, got n=%d" % n)
    mats = []
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            e = np.zeros((n, n))
            e[a, b] = 1.0
            mats.append(e)
    for a in range(n - 1):
        e = np.zeros((n, n))
        e[a, a] = 1.0
        e[a + 1, a + 1] = -1.0
        mats.append(e)
    return DerivationBasis(np.array(mats))


def commutator(a, b):
    """Matrix commutator [a, b] = ab - ba."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidDimensionError(
            "commutator needs two square matrices of equal shape")
    return a @ b - b @ a


def structure_constants(basis):
    """Structure tensor c[r, l, p] with [E_l, E_p] = c^r_{lp} E_r.

    Expansion coefficients are obtained by solving with the trace-pairing
    Gram matrix.  Raises DegenerateBasisError when the commutators do not
    close in the span of the basis.
    """
    mats = basis.mats
    d = basis.dim
    # rhs[j, l, p] = tr([E_l, E_p] E_j)
    lp = np.einsum('lab,pbc->lpac', mats, mats)
    brackets = lp - np.transpose(lp, (1, 0, 2, 3))
    rhs = np.einsum('lpab,jba->jlp', brackets, mats)
    c = np.linalg.solve(basis.gram, rhs.reshape(d, d * d)).reshape(d, d, d)
    recon = np.einsum('rlp,rab->lpab', c, mats)
    scale = max(1.0, np.abs(brackets).max())
    if np.abs(recon - brackets).max() > 1e-10 * scale:
        raise DegenerateBasisError(
            "commutators do not close in the span of the basis")
    return c


def killing_form(c):
    """Killing matrix K[j, p] = c^r_{js} c^s_{pr} from a structure tensor."""
    c = np.asarray(c, dtype=float)
    return np.einsum('rjs,spr->jp', c, c)


def antisymmetry_residual(c):
    """max |c^r_{lp} + c^r_{pl}|."""
    c = np.asarray(c, dtype=float)
    return np.abs(c + np.transpose(c, (0, 2, 1))).max()


def jacobi_residual(c):
    """max over (m, l, p, q) of the cyclic sum |c^m_{ls} c^s_{pq} + cyc(l, p, q)|."""
    c = np.asarray(c, dtype=float)
    t = np.einsum('mls,spq->mlpq', c, c)
    total = t + np.transpose(t, (0, 2, 3, 1)) + np.transpose(t, (0, 3, 1, 2))
    return np.abs(total).max()


def ad_invariance_residual(kill, c):
    """max |K_{rm} c^r_{lj} + K_{jr} c^r_{lm}| over (l, j, m)."""
    kill = np.asarray(kill, dtype=float)
    c = np.asarray(c, dtype=float)
    t = np.einsum('rm,rlj->ljm', kill, c) + np.einsum('jr,rlm->ljm', kill, c)
    return np.abs(t).max()


def expansion_residual(basis, c):
    """max Frobenius-entry error of [E_l, E_p] - c^r_{lp} E_r."""
    mats = basis.mats
    lp = np.einsum('lab,pbc->lpac', mats, mats)
    brackets = lp - np.transpose(lp, (1, 0, 2, 3))
    recon = np.einsum('rlp,rab->lpab', np.asarray(c, dtype=float), mats)
    return np.abs(recon - brackets).max()
