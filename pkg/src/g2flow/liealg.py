"""Lie algebras given by the differentials of their dual basis.

The structure is stored as ``d e^k`` for k = 1..n. Brackets follow from
``[e_i, e_j]^k = -(d e^k)(e_i, e_j)`` and the Chevalley-Eilenberg
differential extends ``d`` to all degrees by the graded Leibniz rule.
"""
from functools import cached_property
from math import comb

import numpy as np

from ._tables import basis, basis_array
from .config import get_tol
from .dsl import format_tuple, parse_tuple
from .errors import DimensionError, JacobiError
from .exterior import KForm, two_form_matrix, wedge

JACOBI_TOL = 1e-12


class LieAlgebra:
    """Finite-dimensional real Lie algebra."""

    def __init__(self, dual_differentials, name=None, *, check=True, jacobi_tol=None):
        forms = list(dual_differentials)
        if not forms:
            raise DimensionError("a Lie algebra needs at least one basis element")
        n = len(forms)
        for k, f in enumerate(forms):
            if f.dim != n or f.deg != 2:
                raise DimensionError(f"d e^{k + 1} must be a 2-form on R^{n}")
        self.dim = n
        self.dual_differentials = tuple(forms)
        self.name = name
        self._dcache = {}
        if check:
            res, triple = self.jacobi_residual()
            tol = JACOBI_TOL if jacobi_tol is None else jacobi_tol
            # inputs with irrational literals carry rounding at the 1e-16 level
            if res > max(tol, 1e3 * np.finfo(float).eps * self._scale()):
                raise JacobiError(
                    f"Jacobi identity fails: d(d e^{triple[0]}) has coefficient {res:.3e} on "
                    f"e^{''.join(map(str, triple[1]))}",
                    triple=triple,
                    residual=res,
                )

    @classmethod
    def parse(cls, text, params=None, name=None, **kw):
        return cls(parse_tuple(text, params), name=name, **kw)

    def _scale(self):
        return max(1.0, max(f.max_abs() for f in self.dual_differentials) ** 2)

    def __repr__(self):
        label = f"{self.name} " if self.name else ""
        return f"LieAlgebra({label}{self.to_text()})"

    def to_text(self):
        return format_tuple(self.dual_differentials)

    # structure constants ------------------------------------------------

    @cached_property
    def brackets(self):
        """Array C with [e_i, e_j] = sum_k C[k, i, j] e_k."""
        C = np.array([-two_form_matrix(f) for f in self.dual_differentials])
        C.setflags(write=False)
        return C

    def bracket(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.einsum("kij,i,j->k", self.brackets, x, y)

    def ad(self, x):
        """Matrix of ad_x; column j is [x, e_j]."""
        return np.einsum("kij,i->kj", self.brackets, np.asarray(x, dtype=float))

    # Chevalley-Eilenberg differential -----------------------------------

    def d_matrix(self, k):
        """Matrix of d: Lambda^k -> Lambda^{k+1} on coefficient vectors."""
        if k in self._dcache:
            return self._dcache[k]
        n = self.dim
        if k >= n:
            M = np.zeros((0, comb(n, k)))
        elif k == 0:
            M = np.zeros((n, 1))
        else:
            M = np.zeros((comb(n, k + 1), comb(n, k)))
            for col, idx in enumerate(basis(n, k)):
                acc = np.zeros(comb(n, k + 1))
                for r, i in enumerate(idx):
                    rest = KForm.basis_form(n, tuple(j + 1 for j in idx[:r] + idx[r + 1:]))
                    term = wedge(self.dual_differentials[i], rest)
                    acc += (-1) ** r * term.coeffs
                M[:, col] = acc
        M.setflags(write=False)
        self._dcache[k] = M
        return M

    def d(self, a):
        return ce_differential(self, a)

    def jacobi_residual(self):
        """Largest coefficient of d(d e^k) and where it occurs."""
        n = self.dim
        if n < 3:
            return 0.0, None
        D2 = self.d_matrix(2)
        worst, where = 0.0, None
        for k, f in enumerate(self.dual_differentials):
            dd = D2 @ f.coeffs
            j = int(np.argmax(np.abs(dd)))
            if abs(dd[j]) > worst:
                worst = float(abs(dd[j]))
                where = (k + 1, tuple(i + 1 for i in basis(n, 3)[j]))
        return worst, where

    # predicates ---------------------------------------------------------

    def is_unimodular(self, tol=None):
        tol = get_tol() if tol is None else tol
        traces = np.einsum("kik->i", self.brackets)
        return bool(np.all(np.abs(traces) < tol))

    def derived_series(self, tol=None):
        """Dimensions of g, [g, g], [[g, g], [g, g]], ... until it stabilises."""
        return [s.shape[1] for s in _series(self, tol, lower=False)]

    def lower_central_series(self, tol=None):
        return [s.shape[1] for s in _series(self, tol, lower=True)]

    def is_solvable(self, tol=None):
        return self.derived_series(tol)[-1] == 0

    def is_nilpotent(self, tol=None):
        return self.lower_central_series(tol)[-1] == 0

    def is_abelian(self, tol=None):
        tol = get_tol() if tol is None else tol
        return bool(np.all(np.abs(self.brackets) < tol))

    # serialization ------------------------------------------------------

    def to_json(self):
        return {"name": self.name, "dim": self.dim, "structure": self.to_text(), "params": {}}

    @classmethod
    def from_json(cls, obj):
        try:
            text = obj["structure"]
        except (KeyError, TypeError) as exc:
            raise ValueError("algebra JSON needs a 'structure' field") from exc
        L = cls.parse(text, obj.get("params") or {}, name=obj.get("name"))
        if "dim" in obj and int(obj["dim"]) != L.dim:
            raise DimensionError(f"declared dim {obj['dim']} but structure has {L.dim} entries")
        return L


def _orth(vectors, n, tol):
    if not vectors:
        return np.zeros((n, 0))
    A = np.array(vectors).T
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    return U[:, s > tol * max(1.0, s[0] if s.size else 1.0)]


def _series(L, tol, lower):
    tol = get_tol() if tol is None else tol
    n = L.dim
    current = np.eye(n)
    out = [current]
    while current.shape[1] > 0:
        left = np.eye(n) if lower else current
        vecs = [L.bracket(x, y) for x in left.T for y in current.T]
        nxt = _orth(vecs, n, tol)
        if nxt.shape[1] == current.shape[1]:
            break
        current = nxt
        out.append(current)
    return out


def ce_differential(L, a):
    if a.dim != L.dim:
        raise DimensionError(f"form on R^{a.dim} for a {L.dim}-dimensional algebra")
    if a.deg == L.dim:
        return KForm(L.dim, L.dim)
    return KForm(L.dim, a.deg + 1, L.d_matrix(a.deg) @ a.coeffs)


def is_unimodular(L):
    return L.is_unimodular()


def extend_by_line(L, name=None):
    """The product algebra L + R e_{n+1} with d e^{n+1} = 0."""
    n = L.dim
    forms = [f.embed(n + 1) for f in L.dual_differentials] + [KForm(n + 1, 2)]
    if name is None and L.name:
        name = f"{L.name}+R"
    return LieAlgebra(forms, name=name, check=False)


def abelian(n):
    return LieAlgebra([KForm(n, 2) for _ in range(n)], name=f"R^{n}")


def parse_structure_equations(text, params=None, name=None):
    return LieAlgebra.parse(text, params, name=name)


def structure_tensor_from_brackets(C):
    """Inverse of :attr:`LieAlgebra.brackets`: dual differentials from C[k, i, j]."""
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    B = basis_array(n, 2)
    return [KForm(n, 2, -C[k][B[:, 0], B[:, 1]]) for k in range(n)]
