"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Both modules expose the same functions with the same argument conventions;
:mod:`sigsub.kernels` picks one at import time.
"""
import math

import numpy as np

# relative slack when comparing hypergeometric point probabilities
TIE_SLACK = 1e-12


def log_factorials(N):
    return np.array([math.lgamma(i + 1.0) for i in range(N + 1)], dtype=np.float64)


def fisher_pvalues(k0, k1, n0, n1):
    """Two-sided Fisher p-values for tables sharing class sizes ``n0, n1``.

    ``k0`` and ``k1`` are int64 arrays of edge-present counts. Tables with the
    same row margin ``K = k0 + k1`` share one null distribution, so the pmf is
    built once per distinct ``K``.
    """
    N = n0 + n1
    lf = log_factorials(N)
    K = k0 + k1
    out = np.empty(k0.shape[0], dtype=np.float64)
    for Kv in np.unique(K):
        Kv = int(Kv)
        lo = max(0, Kv - n1)
        hi = min(n0, Kv)
        x = np.arange(lo, hi + 1)
        const = lf[n0] + lf[n1] + lf[Kv] + lf[N - Kv] - lf[N]
        # pairing keeps mirrored tables bit-identical when n0 == n1
        logp = const - ((lf[x] + lf[n0 - x]) + (lf[Kv - x] + lf[n1 - Kv + x]))
        order = np.argsort(logp, kind="stable")
        sorted_logp = logp[order]
        cum = np.cumsum(np.exp(sorted_logp))
        sel = np.flatnonzero(K == Kv)
        obs = logp[k0[sel] - lo]
        pos = np.searchsorted(sorted_logp, obs + TIE_SLACK, side="right")
        out[sel] = np.minimum(1.0, cum[pos - 1])
    return out


def coherent_threshold(us, vs, scores, V, m, s):
    """Strictest score level ``c`` at which the ``m`` best vertices cover ``s``.

    A vertex's weight at level ``c`` is the number of incident edges scoring
    at least ``c``. The covered count only grows as ``c`` loosens, so the
    first feasible level is found by bisection over the distinct scores.
    Returns ``None`` when even the loosest level is infeasible.
    """
    levels = np.unique(scores)[::-1]

    def covered(c):
        mask = scores >= c
        w = np.bincount(us[mask], minlength=V) + np.bincount(vs[mask], minlength=V)
        return int(np.sort(w)[V - m:].sum())

    lo, hi = 0, len(levels) - 1
    if covered(levels[hi]) < s:
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if covered(levels[mid]) >= s:
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])
