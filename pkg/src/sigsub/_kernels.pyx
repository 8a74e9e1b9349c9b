# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: batched Fisher p-values and the coherent level sweep."""
import numpy as np
cimport numpy as cnp
from libc.math cimport lgamma, exp
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

cdef double TIE_SLACK = 1e-12

ctypedef struct _Pair:
    double key
    Py_ssize_t pos


cdef int _cmp_pair(const void *a, const void *b) noexcept nogil:
    cdef double x = (<_Pair *> a).key
    cdef double y = (<_Pair *> b).key
    if x < y:
        return -1
    if x > y:
        return 1
    # stable on position, matches numpy's stable argsort
    if (<_Pair *> a).pos < (<_Pair *> b).pos:
        return -1
    if (<_Pair *> a).pos > (<_Pair *> b).pos:
        return 1
    return 0


def fisher_pvalues(const cnp.int64_t[::1] k0, const cnp.int64_t[::1] k1, long n0, long n1):
    cdef Py_ssize_t n_tab = k0.shape[0]
    cdef long N = n0 + n1
    cdef Py_ssize_t i, j, width, x, lo, hi, a, b, mid
    cdef long Kv
    cdef double const, thr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n_tab, dtype=np.float64)
    cdef double[::1] res = out

    cdef double *lf = <double *> malloc((N + 1) * sizeof(double))
    # per-K cache: sorted log-probabilities, their cumulative mass, and the
    # log-probability of each support point in natural order
    cdef Py_ssize_t maxw = (n0 if n0 < n1 else n1) + 1
    cdef _Pair *pairs = <_Pair *> malloc(maxw * sizeof(_Pair))
    cdef double *sorted_lp = <double *> malloc(maxw * sizeof(double))
    cdef double *cum = <double *> malloc(maxw * sizeof(double))
    cdef double *natural = <double *> malloc(maxw * sizeof(double))
    cdef long cached_K = -1
    cdef Py_ssize_t cached_lo = 0
    if lf == NULL or pairs == NULL or sorted_lp == NULL or cum == NULL or natural == NULL:
        free(lf); free(pairs); free(sorted_lp); free(cum); free(natural)
        raise MemoryError()

    # visit tables grouped by margin so each pmf is built once
    order = np.lexsort((np.arange(n_tab), np.asarray(k0) + np.asarray(k1)))
    cdef cnp.int64_t[::1] visit = order.astype(np.int64)

    try:
        for i in range(N + 1):
            lf[i] = lgamma(i + 1.0)
        for j in range(n_tab):
            i = visit[j]
            Kv = k0[i] + k1[i]
            if Kv != cached_K:
                lo = Kv - n1 if Kv > n1 else 0
                hi = n0 if n0 < Kv else Kv
                width = hi - lo + 1
                const = lf[n0] + lf[n1] + lf[Kv] + lf[N - Kv] - lf[N]
                for a in range(width):
                    x = lo + a
                    natural[a] = const - ((lf[x] + lf[n0 - x]) + (lf[Kv - x] + lf[n1 - Kv + x]))
                    pairs[a].key = natural[a]
                    pairs[a].pos = a
                qsort(pairs, width, sizeof(_Pair), _cmp_pair)
                for a in range(width):
                    sorted_lp[a] = pairs[a].key
                    cum[a] = exp(pairs[a].key) + (cum[a - 1] if a > 0 else 0.0)
                cached_K = Kv
                cached_lo = lo
            thr = natural[k0[i] - cached_lo] + TIE_SLACK
            # last sorted position with value <= thr
            a = 0
            b = width
            while a < b:
                mid = (a + b) // 2
                if sorted_lp[mid] <= thr:
                    a = mid + 1
                else:
                    b = mid
            res[i] = cum[a - 1] if cum[a - 1] < 1.0 else 1.0
    finally:
        free(lf); free(pairs); free(sorted_lp); free(cum); free(natural)
    return out


def coherent_threshold(const cnp.int64_t[::1] us, const cnp.int64_t[::1] vs, const double[::1] scores,
                       long V, long m, long s):
    """Linear sweep over edges in descending score order.

    Vertex weights grow by one per incident edge; a histogram of weights
    gives the top-``m`` total in O(V) at every level boundary.
    """
    cdef Py_ssize_t d = scores.shape[0]
    cdef Py_ssize_t j, e, k
    cdef long need, total, take
    cdef cnp.int64_t[::1] order = np.argsort(-np.asarray(scores), kind="stable").astype(np.int64)
    cdef cnp.int64_t[::1] w = np.zeros(V, dtype=np.int64)
    cdef cnp.int64_t[::1] hist = np.zeros(V + 1, dtype=np.int64)
    hist[0] = V
    for j in range(d):
        e = order[j]
        hist[w[us[e]]] -= 1
        w[us[e]] += 1
        hist[w[us[e]]] += 1
        hist[w[vs[e]]] -= 1
        w[vs[e]] += 1
        hist[w[vs[e]]] += 1
        if j + 1 < d and scores[order[j + 1]] == scores[e]:
            continue
        need = m
        total = 0
        k = V
        while need > 0 and k > 0:
            take = hist[k] if hist[k] < need else need
            total += take * k
            need -= take
            k -= 1
        if total >= s:
            return float(scores[e])
    return None
