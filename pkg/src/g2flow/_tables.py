"""Cached index tables for dense exterior algebra.

A k-form on R^n is stored as a dense vector over the k-subsets of
{0, ..., n-1} in lexicographic order. The tables here turn wedge products,
contractions and derivation actions into gather/scatter operations that the
kernels (compiled or numpy) execute.
"""
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np


def perm_sign(seq):
    """Sign of the permutation sorting ``seq`` (entries distinct)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def basis(n, k):
    """Tuple of k-subsets of range(n) in lexicographic order."""
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def index(n, k):
    return {c: i for i, c in enumerate(basis(n, k))}


@lru_cache(maxsize=None)
def basis_array(n, k):
    arr = np.array(basis(n, k), dtype=np.intp).reshape(comb(n, k), k)
    arr.setflags(write=False)
    return arr


def _frozen(*arrays):
    for a in arrays:
        a.setflags(write=False)
    return arrays


@lru_cache(maxsize=None)
def wedge_table(n, p, q):
    """(I, J, K, S) with e^I ^ e^J = S e^K for every disjoint pair."""
    out_index = index(n, p + q) if p + q <= n else {}
    I, J, K, S = [], [], [], []
    if p + q <= n:
        for i, a in enumerate(basis(n, p)):
            sa = set(a)
            for j, b in enumerate(basis(n, q)):
                if sa.isdisjoint(b):
                    merged = a + b
                    I.append(i)
                    J.append(j)
                    K.append(out_index[tuple(sorted(merged))])
                    S.append(perm_sign(merged))
    return _frozen(
        np.array(I, dtype=np.intp),
        np.array(J, dtype=np.intp),
        np.array(K, dtype=np.intp),
        np.array(S, dtype=np.float64),
    )


@lru_cache(maxsize=None)
def contract_table(n, k):
    """(src, vec, dst, sign): iota_{e_vec} e^src = sign e^dst, summed over entries."""
    src, vec, dst, sgn = [], [], [], []
    if k >= 1:
        low = index(n, k - 1)
        for s, c in enumerate(basis(n, k)):
            for r, m in enumerate(c):
                src.append(s)
                vec.append(m)
                dst.append(low[c[:r] + c[r + 1:]])
                sgn.append(-1.0 if r % 2 else 1.0)
    return _frozen(
        np.array(src, dtype=np.intp),
        np.array(vec, dtype=np.intp),
        np.array(dst, dtype=np.intp),
        np.array(sgn, dtype=np.float64),
    )


@lru_cache(maxsize=None)
def derivation_table(n, k):
    """(src, row, col, dst, sign) for the derivation action of an endomorphism.

    Replacing e^{row} at some slot of e^src by e^{col} gives sign e^dst; the
    coefficient picked up is A[row, col].
    """
    src, row, col, dst, sgn = [], [], [], [], []
    idx = index(n, k)
    for s, c in enumerate(basis(n, k)):
        for r, i in enumerate(c):
            rest = c[:r] + c[r + 1:]
            for j in range(n):
                if j in rest:
                    continue
                new = c[:r] + (j,) + c[r + 1:]
                src.append(s)
                row.append(i)
                col.append(j)
                dst.append(idx[tuple(sorted(new))])
                sgn.append(perm_sign(new))
    return _frozen(
        np.array(src, dtype=np.intp),
        np.array(row, dtype=np.intp),
        np.array(col, dtype=np.intp),
        np.array(dst, dtype=np.intp),
        np.array(sgn, dtype=np.float64),
    )


@lru_cache(maxsize=None)
def top_pairing(n, k):
    """Signed permutation matrix W with e^I ^ e^K = W[I, K] e^{1..n}."""
    W = np.zeros((comb(n, k), comb(n, n - k)))
    I, J, K, S = wedge_table(n, k, n - k)
    W[I, J] = S
    W.setflags(write=False)
    return W
