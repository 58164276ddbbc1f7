"""Pure numpy implementations of the hot kernels.

Same signatures as the compiled ``_ckernels`` module; used when the extension
is unavailable or when ``G2FLOW_PURE_PYTHON=1`` is set.
"""
import numpy as np


def wedge(a, b, I, J, K, S, nout):
    return np.bincount(K, weights=S * a[I] * b[J], minlength=nout).astype(np.float64)


def contract(v, a, src, vec, dst, sgn, nout):
    return np.bincount(dst, weights=sgn * v[vec] * a[src], minlength=nout).astype(np.float64)


def g2_bilinear(phi, n, csrc, cvec, cdst, csgn, n2, I, J, K, S, n5, P):
    """Matrix of coefficients of (1/6) i_{e_i}phi ^ i_{e_j}phi ^ phi."""
    iphi = np.zeros((n, n2))
    np.add.at(iphi, (cvec, cdst), csgn * phi[csrc])
    L = np.zeros((n5, n2))
    np.add.at(L, (K, I), S * phi[J])
    Q = iphi @ L.T
    return (iphi @ P @ Q.T) / 6.0


def compound(A, B):
    """Minors det A[B[r], B[c]] for all pairs of rows of B."""
    sub = A[B[:, None, :, None], B[None, :, None, :]]
    return np.linalg.det(sub)
