"""Metric operators on left-invariant forms.

Everything is finite-dimensional linear algebra on coefficient vectors: the
metric induces a Gram matrix on each Lambda^k (the compound of g^{-1}), the
Hodge star is that Gram matrix followed by the top-degree pairing, and the
codifferential and Laplacian are built from the Chevalley-Eilenberg matrices.
"""
from math import comb

import numpy as np

from ._tables import top_pairing
from .errors import DimensionError, PositivityError
from .exterior import KForm, compound

EIGENFORM_TOL = 1e-8


class MetricData:
    """Left-invariant metric ``g`` on ``L`` with volume coefficient ``vol``.

    ``vol`` is the coefficient of e^{1..n} in the Riemannian volume form. The
    default is sqrt(det g), i.e. e^{1..n} is positively oriented.
    """

    def __init__(self, L, g, vol=None):
        g = np.array(g, dtype=np.float64)
        n = L.dim
        if g.shape != (n, n):
            raise DimensionError(f"metric must be {n}x{n}, got {g.shape}")
        if not np.allclose(g, g.T, atol=1e-12 * max(1.0, np.abs(g).max())):
            raise PositivityError("metric is not symmetric")
        g = 0.5 * (g + g.T)
        evals = np.linalg.eigvalsh(g)
        if evals[0] <= 0:
            raise PositivityError(f"metric is not positive definite (min eigenvalue {evals[0]:.3e})")
        g.setflags(write=False)
        self.L = L
        self.g = g
        self.ginv = np.linalg.inv(g)
        self.vol = float(np.sqrt(np.linalg.det(g))) if vol is None else float(vol)
        self._gram = {}
        self._star = {}

    @property
    def dim(self):
        return self.L.dim

    @property
    def volume_form(self):
        return KForm(self.dim, self.dim, [self.vol])

    def gram(self, k):
        """Gram matrix of the induced inner product on Lambda^k."""
        if k not in self._gram:
            G = compound(self.ginv, k)
            G = 0.5 * (G + G.T)
            G.setflags(write=False)
            self._gram[k] = G
        return self._gram[k]

    def star_matrix(self, k):
        if k not in self._star:
            S = self.vol * top_pairing(self.dim, k).T @ self.gram(k)
            S.setflags(write=False)
            self._star[k] = S
        return self._star[k]

    def __repr__(self):
        return f"MetricData(dim={self.dim}, vol={self.vol:.6g})"


def _check(M, a):
    if a.dim != M.dim:
        raise DimensionError(f"form on R^{a.dim} for a metric on R^{M.dim}")


def form_inner(M, a, b):
    _check(M, a)
    _check(M, b)
    if a.deg != b.deg:
        return 0.0
    return float(a.coeffs @ M.gram(a.deg) @ b.coeffs)


def form_norm_sq(M, a):
    return form_inner(M, a, a)


def form_norm(M, a):
    return float(np.sqrt(max(form_norm_sq(M, a), 0.0)))


def hodge_star(M, a):
    _check(M, a)
    return KForm(M.dim, M.dim - a.deg, M.star_matrix(a.deg) @ a.coeffs)


def codiff_matrix(M, k):
    """Matrix of d^*: Lambda^k -> Lambda^{k-1}, d^* = (-1)^{n(k+1)+1} * d *."""
    n = M.dim
    if k == 0:
        return np.zeros((0, 1))
    sign = (-1) ** (n * (k + 1) + 1)
    D = M.L.d_matrix(n - k)
    return sign * M.star_matrix(n - k + 1) @ D @ M.star_matrix(k)


def laplacian_matrix(M, k):
    n = M.dim
    L = M.L
    out = np.zeros((comb(n, k), comb(n, k)))
    if k >= 1:
        out += L.d_matrix(k - 1) @ codiff_matrix(M, k)
    if k < n:
        out += codiff_matrix(M, k + 1) @ L.d_matrix(k)
    return out


def codifferential(M, a):
    _check(M, a)
    if a.deg < 1:
        raise DimensionError("the codifferential needs degree >= 1")
    return KForm(M.dim, a.deg - 1, codiff_matrix(M, a.deg) @ a.coeffs)


def hodge_laplacian(M, a):
    _check(M, a)
    return KForm(M.dim, a.deg, laplacian_matrix(M, a.deg) @ a.coeffs)


def eigenform_fit(M, a, threshold=EIGENFORM_TOL):
    """Best eigenvalue ``c`` with ``Delta a ~ c a``.

    Returns ``(c, residual, is_eigenform)`` where ``residual`` is the relative
    metric norm of ``Delta a - c a``.
    """
    nrm = form_norm_sq(M, a)
    if nrm <= 0:
        raise ValueError("eigenform_fit needs a nonzero form")
    lap = laplacian_matrix(M, a.deg) @ a.coeffs
    G = M.gram(a.deg)
    c = float(lap @ G @ a.coeffs / nrm)
    r = lap - c * a.coeffs
    residual = float(np.sqrt(max(r @ G @ r, 0.0) / nrm))
    return c, residual, residual < threshold


# curvature ----------------------------------------------------------------


def orthonormal_frame(g):
    """Matrix E whose columns are a g-orthonormal basis (E^T g E = I)."""
    Lc = np.linalg.cholesky(np.asarray(g, dtype=float))
    return np.linalg.inv(Lc).T


def levi_civita(M):
    """Connection coefficients in a g-orthonormal frame.

    Returns ``(E, c, Gamma)`` with ``nabla_{u_i} u_j = sum_k Gamma[i, j, k] u_k``
    for the frame u = columns of E and structure constants ``c[i, j, k]`` of
    that frame.
    """
    E = orthonormal_frame(M.g)
    Einv = np.linalg.inv(E)
    # brackets of frame vectors, expressed back in the frame
    C = M.L.brackets
    c = np.einsum("ka,kij,ib,jc->bca", Einv.T, C, E, E)
    # Koszul formula in an orthonormal frame
    # np.transpose(c, (2, 0, 1))[i, j, k] == c[j, k, i]
    Gamma = 0.5 * (c - np.transpose(c, (2, 0, 1)) + np.transpose(c, (1, 2, 0)))
    return E, c, Gamma


def ricci_orthonormal(M):
    E, c, Gamma = levi_civita(M)
    n = M.dim
    # nabla_{u_i} as matrices: (N_i)[k, j] = Gamma[i, j, k]
    N = np.transpose(Gamma, (0, 2, 1))
    R = np.zeros((n, n, n, n))  # R[a, b] = R(u_a, u_b) as matrix [k, j]
    for a in range(n):
        for b in range(n):
            R[a, b] = N[a] @ N[b] - N[b] @ N[a] - np.einsum("k,kij->ij", c[a, b], N)
    # Ric(Y, Z) = sum_i <R(u_i, Y) Z, u_i>
    return np.einsum("ibij->bj", R)


def ricci(M):
    """Ricci tensor as a symmetric matrix in the original basis."""
    E = orthonormal_frame(M.g)
    Einv = np.linalg.inv(E)
    Ric = ricci_orthonormal(M)
    Ric = 0.5 * (Ric + Ric.T)
    return Einv.T @ Ric @ Einv


def scalar_curvature(M):
    return float(np.trace(ricci_orthonormal(M)))
