"""Alternating forms on R^n with a fixed basis.

Forms are immutable and stored densely over strictly increasing multi-indices
in lexicographic order. Multi-indices are 1-based in the public API
(``e^{125}`` is ``(1, 2, 5)``) and 0-based internally.
"""
from math import comb

import numpy as np

from . import _backend
from ._tables import basis, basis_array, contract_table, derivation_table, index, wedge_table
from .config import get_tol
from .errors import DimensionError

MAX_DIM = 8


def _prune(c, tol=None):
    tol = get_tol() if tol is None else tol
    c = np.where(np.abs(c) < tol, 0.0, c)
    return c + 0.0  # normalise -0.0


class KForm:
    """A degree-``deg`` alternating form on an ``dim``-dimensional space."""

    __slots__ = ("dim", "deg", "_c")

    def __init__(self, dim, deg, coeffs=None, *, prune=True):
        if not 1 <= dim <= MAX_DIM:
            raise DimensionError(f"dimension must be in 1..{MAX_DIM}, got {dim}")
        if not 0 <= deg <= dim:
            raise DimensionError(f"degree {deg} out of range for dimension {dim}")
        size = comb(dim, deg)
        if coeffs is None:
            c = np.zeros(size)
        else:
            c = np.array(coeffs, dtype=np.float64).reshape(-1)
            if c.shape != (size,):
                raise DimensionError(f"expected {size} coefficients, got {c.shape[0]}")
            if not np.all(np.isfinite(c)):
                raise ValueError("form coefficients must be finite")
        if prune:
            c = _prune(c)
        c.setflags(write=False)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "deg", deg)
        object.__setattr__(self, "_c", c)

    def __setattr__(self, name, value):
        raise AttributeError("KForm is immutable")

    # construction -------------------------------------------------------

    @classmethod
    def zero(cls, dim, deg):
        return cls(dim, deg)

    @classmethod
    def scalar(cls, dim, value):
        return cls(dim, 0, [value])

    @classmethod
    def basis_form(cls, dim, idx, coeff=1.0):
        """``coeff * e^{i1...ik}`` for a 1-based index tuple in any order."""
        idx = tuple(idx)
        if len(set(idx)) != len(idx):
            return cls(dim, len(idx))
        for i in idx:
            if not 1 <= i <= dim:
                raise DimensionError(f"index {i} out of range 1..{dim}")
        zero_based = tuple(i - 1 for i in idx)
        from ._tables import perm_sign

        c = np.zeros(comb(dim, len(idx)))
        c[index(dim, len(idx))[tuple(sorted(zero_based))]] = coeff * perm_sign(zero_based)
        return cls(dim, len(idx), c)

    @classmethod
    def from_terms(cls, dim, deg, terms):
        """Build from a mapping ``{(i1, ..., ik): coeff}`` with 1-based indices."""
        out = cls(dim, deg)
        for idx, val in terms.items():
            if len(idx) != deg:
                raise DimensionError(f"term {idx} does not have degree {deg}")
            out = out + cls.basis_form(dim, idx, val)
        return out

    # accessors ----------------------------------------------------------

    @property
    def coeffs(self):
        """Read-only dense coefficient vector (lexicographic multi-index order)."""
        return self._c

    @property
    def terms(self):
        """Nonzero coefficients keyed by 1-based increasing multi-index."""
        return {
            tuple(i + 1 for i in b): float(v)
            for b, v in zip(basis(self.dim, self.deg), self._c)
            if v != 0.0
        }

    def __getitem__(self, idx):
        return self.terms.get(tuple(idx), 0.0)

    def is_zero(self, tol=None):
        tol = get_tol() if tol is None else tol
        return bool(np.all(np.abs(self._c) < tol))

    def max_abs(self):
        return float(np.max(np.abs(self._c))) if self._c.size else 0.0

    def top_coefficient(self):
        """Coefficient of e^{1...n}; zero for lower degrees."""
        return float(self._c[0]) if self.deg == self.dim else 0.0

    # arithmetic ---------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, KForm):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if other.deg != self.deg:
            raise DimensionError(f"cannot add forms of degree {self.deg} and {other.deg}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return KForm(self.dim, self.deg, self._c + other._c)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return KForm(self.dim, self.deg, self._c - other._c)

    def __neg__(self):
        return KForm(self.dim, self.deg, -self._c)

    def __mul__(self, s):
        if isinstance(s, KForm):
            return NotImplemented
        return KForm(self.dim, self.deg, self._c * float(s))

    __rmul__ = __mul__

    def __truediv__(self, s):
        return KForm(self.dim, self.deg, self._c / float(s))

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, KForm):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.deg == other.deg
            and bool(np.all(np.abs(self._c - other._c) < get_tol()))
        )

    __hash__ = None

    def allclose(self, other, atol=None):
        atol = get_tol() if atol is None else atol
        return self.dim == other.dim and self.deg == other.deg and bool(
            np.max(np.abs(self._c - other._c), initial=0.0) < atol
        )

    def __repr__(self):
        return f"KForm(dim={self.dim}, deg={self.deg}, {format_form(self)})"

    # embedding ----------------------------------------------------------

    def embed(self, dim):
        """The same form viewed on R^dim with dim >= self.dim (extra basis appended)."""
        if dim < self.dim:
            raise DimensionError("cannot embed into a smaller dimension")
        out = np.zeros(comb(dim, self.deg))
        idx = index(dim, self.deg)
        for b, v in zip(basis(self.dim, self.deg), self._c):
            if v:
                out[idx[b]] = v
        return KForm(dim, self.deg, out)

    # serialization ------------------------------------------------------

    def to_json(self):
        return {
            "dim": self.dim,
            "deg": self.deg,
            "terms": [{"idx": list(k), "c": v} for k, v in self.terms.items()],
        }

    @classmethod
    def from_json(cls, obj):
        try:
            dim, deg = int(obj["dim"]), int(obj["deg"])
            terms = {tuple(int(i) for i in t["idx"]): float(t["c"]) for t in obj["terms"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed KForm JSON: {exc}") from exc
        return cls.from_terms(dim, deg, terms)


def format_form(a, digits=12):
    """Human-readable expression such as ``e125 - e146 + 2*e236``."""
    parts = []
    for idx, v in a.terms.items():
        name = "e" + "".join(str(i) for i in idx) if idx else ""
        mag = abs(v)
        if name and abs(mag - 1.0) < 1e-15:
            body = name
        else:
            num = f"{mag:.{digits}g}"
            body = f"{num}*{name}" if name else num
        parts.append(("-" if v < 0 else "+", body))
    if not parts:
        return "0"
    head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    return head + "".join(f" {s} {b}" for s, b in parts[1:])


class Endomorphism:
    """Linear map of R^n; column j of ``matrix`` is the image of e_j."""

    __slots__ = ("dim", "matrix")

    def __init__(self, matrix):
        m = np.array(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"endomorphism must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("endomorphism entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "dim", m.shape[0])
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("Endomorphism is immutable")

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @classmethod
    def diag(cls, entries):
        return cls(np.diag(entries))

    def __call__(self, v):
        return self.matrix @ np.asarray(v, dtype=float)

    def __matmul__(self, other):
        return Endomorphism(self.matrix @ other.matrix)

    def __repr__(self):
        return f"Endomorphism({self.matrix.tolist()})"


def wedge(a, b):
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    n, p, q = a.dim, a.deg, b.deg
    if p + q > n:
        # degree overflow: the zero form of top degree stands in for 0
        return KForm(n, n)
    I, J, K, S = wedge_table(n, p, q)
    out = _backend.kernels.wedge(a.coeffs, b.coeffs, I, J, K, S, comb(n, p + q))
    return KForm(n, p + q, out)


def wedge_all(*forms):
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def contract(v, a):
    """Interior product of the vector ``v`` (length dim) into ``a``."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] != a.dim:
        raise DimensionError(f"vector of length {v.shape[0]} for a form on R^{a.dim}")
    if a.deg < 1:
        raise DimensionError("cannot contract a 0-form")
    src, vec, dst, sgn = contract_table(a.dim, a.deg)
    out = _backend.kernels.contract(v, a.coeffs, src, vec, dst, sgn, comb(a.dim, a.deg - 1))
    return KForm(a.dim, a.deg - 1, out)


def unit_vector(n, i):
    """The basis vector e_i (1-based) as an array."""
    v = np.zeros(n)
    v[i - 1] = 1.0
    return v


def compound(A, k):
    """k-th compound matrix: entry (I, J) is the minor det A[I, J]."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    n = A.shape[0]
    if k == 0:
        return np.ones((1, 1))
    return _backend.kernels.compound(A, basis_array(n, k))


def pullback_matrix(A, k):
    """Matrix of a -> a(A., ..., A.) on degree-k coefficient vectors."""
    return compound(A, k).T


def derivation_matrix(A, k):
    """Matrix of a -> sum_r a(., ..., A., ..., .) on degree-k coefficient vectors."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    size = comb(n, k)
    M = np.zeros((size, size))
    if k == 0:
        return M
    src, row, col, dst, sgn = derivation_table(n, k)
    np.add.at(M, (dst, src), sgn * A[row, col])
    return M


def endo_action(A, a, mode="full"):
    """Act on ``a`` by the endomorphism ``A``.

    ``mode="full"`` gives a(A., ..., A.); ``mode="derivation"`` gives
    sum_i a(., ..., A., ..., .).
    """
    M = A.matrix if isinstance(A, Endomorphism) else np.asarray(A, dtype=float)
    if M.shape[0] != a.dim:
        raise DimensionError(f"endomorphism of R^{M.shape[0]} acting on a form on R^{a.dim}")
    if mode == "full":
        return KForm(a.dim, a.deg, pullback_matrix(M, a.deg) @ a.coeffs)
    if mode == "derivation":
        return KForm(a.dim, a.deg, derivation_matrix(M, a.deg) @ a.coeffs)
    raise ValueError(f"unknown action mode {mode!r}")


def two_form_matrix(a):
    """Antisymmetric matrix of a 2-form: M[i, j] = a(e_i, e_j)."""
    if a.deg != 2:
        raise DimensionError("expected a 2-form")
    n = a.dim
    M = np.zeros((n, n))
    B = basis_array(n, 2)
    M[B[:, 0], B[:, 1]] = a.coeffs
    M[B[:, 1], B[:, 0]] = -a.coeffs
    return M


def two_form_from_matrix(M):
    M = np.asarray(M, dtype=float)
    B = basis_array(M.shape[0], 2)
    return KForm(M.shape[0], 2, M[B[:, 0], B[:, 1]])


def one_form(coeffs):
    c = np.asarray(coeffs, dtype=float)
    return KForm(c.shape[0], 1, c)
