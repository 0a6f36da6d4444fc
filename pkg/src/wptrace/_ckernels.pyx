# cython: language_level=3
"""Compiled kernels; same signatures as wptrace._pykernels."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cosh, sinh, exp

cnp.import_array()


def expansion(theta, s):
    cdef double[:, ::1] th = np.ascontiguousarray(np.atleast_2d(theta), dtype=np.float64)
    cdef double[:, ::1] ss = np.ascontiguousarray(np.atleast_2d(s), dtype=np.float64)
    cdef Py_ssize_t n = th.shape[0], m = th.shape[1], i, k
    cdef long long pat, npat = 1LL << m
    cdef double[::1] out = np.zeros(n)
    cdef double[::1] ch = np.empty(m)
    cdef double[::1] sh = np.empty(m)
    cdef double hyp, arg, total
    cdef int rho, neg
    for i in range(n):
        for k in range(m):
            ch[k] = cosh(0.5 * th[i, k])
            sh[k] = sinh(0.5 * th[i, k])
        total = 0.0
        for pat in range(npat):
            # bit k set means delta_k = -1; keep patterns with an even number of -1
            neg = 0
            for k in range(m):
                neg ^= (pat >> k) & 1
            if neg:
                continue
            hyp = 1.0
            arg = 0.0
            rho = 1
            for k in range(m):
                arg += rho * ss[i, k]
                if (pat >> k) & 1:
                    hyp *= sh[k]
                    rho = -rho
                else:
                    hyp *= ch[k]
            total += hyp * cosh(0.5 * arg)
        out[i] = total
    return np.asarray(out)


def trace_half(theta, s):
    cdef double[:, ::1] th = np.ascontiguousarray(np.atleast_2d(theta), dtype=np.float64)
    cdef double[:, ::1] ss = np.ascontiguousarray(np.atleast_2d(s), dtype=np.float64)
    cdef Py_ssize_t n = th.shape[0], m = th.shape[1], i, k
    cdef double[::1] out = np.empty(n)
    cdef double a, b, c, d, e, ei, ch, sh, t0, t1
    for i in range(n):
        a = 1.0; b = 0.0; c = 0.0; d = 1.0
        for k in range(m):
            e = exp(0.5 * ss[i, k])
            ei = 1.0 / e
            a *= e; c *= e; b *= ei; d *= ei
            ch = cosh(0.5 * th[i, k])
            sh = sinh(0.5 * th[i, k])
            t0 = a * ch + b * sh
            t1 = a * sh + b * ch
            a = t0; b = t1
            t0 = c * ch + d * sh
            t1 = c * sh + d * ch
            c = t0; d = t1
        out[i] = 0.5 * (a + d)
    return np.asarray(out)


cdef Py_ssize_t _spread(long long[::1] ip, long long[::1] ix, long long[::1] src,
                        long long[:, ::1] cnt, long long[:, ::1] touched, Py_ssize_t[::1] ntouch,
                        long long start, Py_ssize_t depth):
    """Layer k of cnt holds the number of non-backtracking walks of k steps from edge ``start``."""
    cdef Py_ssize_t k, t
    cdef long long f, g, v, tail, c
    cnt[0, start] = 1
    touched[0, 0] = start
    ntouch[0] = 1
    for k in range(depth):
        ntouch[k + 1] = 0
        for t in range(ntouch[k]):
            f = touched[k, t]
            c = cnt[k, f]
            v = ix[f]
            tail = src[f]
            for g in range(ip[v], ip[v + 1]):
                if ix[g] == tail:
                    continue
                if cnt[k + 1, g] == 0:
                    touched[k + 1, ntouch[k + 1]] = g
                    ntouch[k + 1] += 1
                cnt[k + 1, g] += c
    return depth


cdef void _clear(long long[:, ::1] cnt, long long[:, ::1] touched, Py_ssize_t[::1] ntouch,
                 Py_ssize_t depth):
    cdef Py_ssize_t k, t
    for k in range(depth + 1):
        for t in range(ntouch[k]):
            cnt[k, touched[k, t]] = 0
        ntouch[k] = 0


def nb_closed_walk_traces(indptr, indices, int lmax):
    """Tr(B^l), l = 0..lmax, meeting in the middle.

    (B^b)_{f,e} = (B^b)_{rev e, rev f}, so Tr(B^{a+b}) is the sum over e, f of
    (walks e -> f in a steps) * (walks rev e -> rev f in b steps): only walks of
    about half the length are expanded from each edge.
    """
    ip_np = np.ascontiguousarray(indptr, dtype=np.int64)
    ix_np = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t nv = ip_np.shape[0] - 1, m2 = ix_np.shape[0]
    if lmax < 0:
        return np.zeros(0, dtype=np.int64)
    src_np = np.repeat(np.arange(nv, dtype=np.int64), np.diff(ip_np))
    order = np.lexsort((ix_np, src_np))
    key = src_np[order] * nv + ix_np[order]
    rev_np = np.ascontiguousarray(order[np.searchsorted(key, ix_np * nv + src_np)], dtype=np.int64)
    cdef long long[::1] ip = ip_np, ix = ix_np, src = src_np, rev = rev_np
    cdef Py_ssize_t A = (lmax + 1) // 2, Bd = lmax - A
    cdef long long[:, ::1] fw = np.zeros((A + 1, max(m2, 1)), dtype=np.int64)
    cdef long long[:, ::1] bw = np.zeros((Bd + 1, max(m2, 1)), dtype=np.int64)
    cdef long long[:, ::1] tf = np.empty((A + 1, max(m2, 1)), dtype=np.int64)
    cdef long long[:, ::1] tb = np.empty((Bd + 1, max(m2, 1)), dtype=np.int64)
    cdef Py_ssize_t[::1] nf = np.zeros(A + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] nb = np.zeros(Bd + 1, dtype=np.intp)
    cdef long long[::1] counts = np.zeros(lmax + 1, dtype=np.int64)
    cdef Py_ssize_t e, ell, a, b, t
    cdef long long f, acc
    counts[0] = m2
    for e in range(m2):
        _spread(ip, ix, src, fw, tf, nf, e, A)
        _spread(ip, ix, src, bw, tb, nb, rev[e], Bd)
        for ell in range(1, lmax + 1):
            a = (ell + 1) // 2
            b = ell - a
            acc = 0
            for t in range(nf[a]):
                f = tf[a, t]
                acc += fw[a, f] * bw[b, rev[f]]
            counts[ell] += acc
        _clear(fw, tf, nf, A)
        _clear(bw, tb, nb, Bd)
    return np.asarray(counts)


def trapz_convolve(f, g, double h):
    cdef double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef double[::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t n = fv.shape[0], i, j
    cdef double[::1] out = np.zeros(n)
    cdef double acc
    for i in range(1, n):
        acc = 0.5 * (fv[0] * gv[i] + fv[i] * gv[0])
        for j in range(1, i):
            acc += fv[j] * gv[i - j]
        out[i] = h * acc
    return np.asarray(out)
