"""Algebraic Laplacian solitons: Delta_phi phi = L_{X_D} phi + lambda phi.

The Lie derivative along the vector field of a derivation D is realised as
``sign * D.phi`` with D acting as a derivation on forms. The sign is fixed once
by the A_{5,7} example and then shared by every other check.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DerivationError, DimensionError, NotClosedError, NotEigenformError
from .exterior import Endomorphism, KForm, endo_action
from .flow import soliton_type
from .g2warp import g2_torsion
from .metric_ops import eigenform_fit, form_norm

DERIVATION_TOL = 1e-10
SOLITON_TOL = 1e-8


def derivation_defect(L, D):
    """Array R[k, i, j] of D[e_i, e_j] - [D e_i, e_j] - [e_i, D e_j]."""
    D = D.matrix if isinstance(D, Endomorphism) else np.asarray(D, dtype=float)
    if D.shape != (L.dim, L.dim):
        raise DimensionError(f"D must be {L.dim}x{L.dim}")
    C = L.brackets
    return (
        np.einsum("km,mij->kij", D, C)
        - np.einsum("kmj,mi->kij", C, D)
        - np.einsum("kim,mj->kij", C, D)
    )


def is_derivation(L, D):
    """Largest ||D[x, y] - [Dx, y] - [x, Dy]|| over basis pairs (0 for a derivation)."""
    R = derivation_defect(L, D)
    return float(np.max(np.linalg.norm(R, axis=0), initial=0.0))


def derivation_space(L, tol=1e-10):
    """Basis (list of matrices) of the derivation algebra Der(L)."""
    n = L.dim
    cols = []
    for a in range(n * n):
        E = np.zeros(n * n)
        E[a] = 1.0
        cols.append(derivation_defect(L, E.reshape(n, n)).ravel())
    A = np.array(cols).T
    _, s, Vt = np.linalg.svd(A)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
    return [v.reshape(n, n) for v in Vt[rank:]]


def symmetric_derivations(L, g, tol=1e-10):
    """Basis of the derivations that are self-adjoint for the metric g."""
    n = L.dim
    der = derivation_space(L, tol)
    if not der:
        return []
    # g D - D^T g = 0, restricted to the span of der
    A = np.array([(g @ D - D.T @ g).ravel() for D in der]).T
    _, s, Vt = np.linalg.svd(A)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
    Z = Vt[rank:]
    B = np.array(der)
    return [np.tensordot(z, B, axes=1) for z in Z]


@dataclass(frozen=True, eq=False)
class SolitonCandidate:
    G: object
    D: Endomorphism
    lam: float
    sign: int = None

    def __post_init__(self):
        if self.sign is None:
            object.__setattr__(self, "sign", calibrated_sign())


def _lap(G):
    if not G.closed:
        raise NotClosedError("the soliton equation needs a closed G2-structure")
    return g2_torsion(G).laplacian_phi


def soliton_defect(G, D, lam, sign):
    """Delta phi - lam phi - sign * D.phi."""
    D = D if isinstance(D, Endomorphism) else Endomorphism(D)
    lap = _lap(G)
    return lap - G.phi * lam - endo_action(D, G.phi, mode="derivation") * sign


def soliton_residual(cand, check_derivation=True):
    """||Delta phi - lambda phi - sign D.phi|| / ||phi|| in the metric of phi."""
    G = cand.G
    if check_derivation:
        r = is_derivation(G.Lhat, cand.D)
        if r > DERIVATION_TOL * max(1.0, np.abs(cand.D.matrix).max()):
            raise DerivationError(f"D is not a derivation (defect {r:.3e})")
    defect = soliton_defect(G, cand.D, cand.lam, cand.sign)
    return form_norm(G.metric, defect) / form_norm(G.metric, G.phi)


@lru_cache(maxsize=1)
def calibrated_sign():
    """The sign with Delta phi = lambda phi + sign D.phi on the A_{5,7} example."""
    from . import catalog

    row = catalog.load("a57")
    G = row.warped(1.0)
    res = {
        s: form_norm(G.metric, soliton_defect(G, row.D, row.lam, s)) for s in (1, -1)
    }
    best = min(res, key=res.get)
    if res[best] > SOLITON_TOL * 10:
        raise DerivationError("no sign makes the reference example a soliton")
    return best


def soliton_relation_check(S, lam, threshold=1e-8):
    """|2 lambda - (6c - |w2-|^2)| for a structure whose w2- is a Laplacian eigenform."""
    from .su3 import torsion_forms

    T = torsion_forms(S)
    c, res, ok = eigenform_fit(S.metric, T.w2_minus, threshold)
    if not ok:
        raise NotEigenformError(f"w2- is not a Laplacian eigenform (relative residual {res:.3e})")
    return abs(2.0 * lam - (6.0 * c - T.w2_norm_sq))


@dataclass(frozen=True, eq=False)
class SolitonFit:
    residual: float
    D: Endomorphism
    lam: float
    dim: int

    @property
    def type(self):
        return soliton_type(self.lam)


def best_fit_soliton(G, sign=None, symmetric=True):
    """Least-squares (D, lambda) over (symmetric) derivations.

    Minimises ||Delta phi - lambda phi - sign D.phi|| / ||phi|| with D in the
    span of the g_phi-self-adjoint derivations (all derivations if
    ``symmetric`` is false).
    """
    sign = calibrated_sign() if sign is None else sign
    lap = _lap(G)
    basis = symmetric_derivations(G.Lhat, G.g) if symmetric else derivation_space(G.Lhat)
    cols = [G.phi.coeffs] + [
        sign * endo_action(Endomorphism(B), G.phi, mode="derivation").coeffs for B in basis
    ]
    A = np.array(cols).T
    # whiten with the metric on 3-forms so the fit minimises the g_phi norm
    W = np.linalg.cholesky(G.metric.gram(3)).T
    x, *_ = np.linalg.lstsq(W @ A, W @ lap.coeffs, rcond=None)
    lam = float(x[0])
    D = np.tensordot(x[1:], np.array(basis), axes=1) if basis else np.zeros((7, 7))
    r = lap.coeffs - A @ x
    residual = float(np.sqrt(max(r @ G.metric.gram(3) @ r, 0.0))) / form_norm(G.metric, G.phi)
    return SolitonFit(residual, Endomorphism(D), lam, len(basis))


def report(cand):
    return {
        "derivation_residual": is_derivation(cand.G.Lhat, cand.D),
        "soliton_residual": soliton_residual(cand, check_derivation=False),
        "lambda": float(cand.lam),
        "type": soliton_type(cand.lam),
    }
