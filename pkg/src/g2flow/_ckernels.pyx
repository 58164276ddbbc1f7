# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors ``_pykernels`` exactly."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def wedge(const double[::1] a, const double[::1] b,
          const cnp.intp_t[::1] I, const cnp.intp_t[::1] J,
          const cnp.intp_t[::1] K, const double[::1] S, Py_ssize_t nout):
    out = np.zeros(nout)
    cdef double[::1] o = out
    cdef Py_ssize_t t, m = I.shape[0]
    for t in range(m):
        o[K[t]] += S[t] * a[I[t]] * b[J[t]]
    return out


def contract(const double[::1] v, const double[::1] a,
             const cnp.intp_t[::1] src, const cnp.intp_t[::1] vec,
             const cnp.intp_t[::1] dst, const double[::1] sgn, Py_ssize_t nout):
    out = np.zeros(nout)
    cdef double[::1] o = out
    cdef Py_ssize_t t, m = src.shape[0]
    for t in range(m):
        o[dst[t]] += sgn[t] * v[vec[t]] * a[src[t]]
    return out


def g2_bilinear(const double[::1] phi, Py_ssize_t n,
                const cnp.intp_t[::1] csrc, const cnp.intp_t[::1] cvec,
                const cnp.intp_t[::1] cdst, const double[::1] csgn, Py_ssize_t n2,
                const cnp.intp_t[::1] I, const cnp.intp_t[::1] J,
                const cnp.intp_t[::1] K, const double[::1] S, Py_ssize_t n5,
                const double[:, ::1] P):
    iphi_arr = np.zeros((n, n2))
    Q_arr = np.zeros((n, n5))
    out = np.zeros((n, n))
    cdef double[:, ::1] iphi = iphi_arr
    cdef double[:, ::1] Q = Q_arr
    cdef double[:, ::1] b = out
    cdef Py_ssize_t t, i, j, r, c
    cdef double acc, x
    for t in range(csrc.shape[0]):
        iphi[cvec[t], cdst[t]] += csgn[t] * phi[csrc[t]]
    for i in range(n):
        for t in range(I.shape[0]):
            Q[i, K[t]] += S[t] * iphi[i, I[t]] * phi[J[t]]
    for i in range(n):
        for j in range(i, n):
            acc = 0.0
            for r in range(n2):
                x = iphi[i, r]
                if x == 0.0:
                    continue
                for c in range(n5):
                    if P[r, c] != 0.0:
                        acc += x * P[r, c] * Q[j, c]
            b[i, j] = acc / 6.0
            b[j, i] = acc / 6.0
    return out


def compound(const double[:, ::1] A, const cnp.intp_t[:, ::1] B):
    """Minors det A[B[r], B[c]] for all pairs of rows of B (Gaussian elimination)."""
    cdef Py_ssize_t m = B.shape[0], k = B.shape[1]
    out = np.empty((m, m))
    cdef double[:, ::1] o = out
    cdef double M[8][8]
    cdef double det, piv, f, tmp
    cdef Py_ssize_t r, c, i, j, col, p, best
    for r in range(m):
        for c in range(m):
            for i in range(k):
                for j in range(k):
                    M[i][j] = A[B[r, i], B[c, j]]
            det = 1.0
            for col in range(k):
                best = col
                piv = M[col][col] if M[col][col] >= 0 else -M[col][col]
                for p in range(col + 1, k):
                    tmp = M[p][col] if M[p][col] >= 0 else -M[p][col]
                    if tmp > piv:
                        piv = tmp
                        best = p
                if piv == 0.0:
                    det = 0.0
                    break
                if best != col:
                    for j in range(col, k):
                        tmp = M[col][j]
                        M[col][j] = M[best][j]
                        M[best][j] = tmp
                    det = -det
                piv = M[col][col]
                det *= piv
                for p in range(col + 1, k):
                    f = M[p][col] / piv
                    if f != 0.0:
                        for j in range(col + 1, k):
                            M[p][j] -= f * M[col][j]
            o[r, c] = det
    return out
