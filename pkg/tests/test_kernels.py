import numpy as np
import pytest

from sigsub import kernels
from sigsub.graph import edge_endpoints, n_edges

try:
    from sigsub import _kernels  # noqa: F401
    HAVE_CYTHON = True
except ImportError:
    HAVE_CYTHON = False

needs_cython = pytest.mark.skipif(not HAVE_CYTHON, reason="compiled extension not built")


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        kernels.fisher_pvalues([0], [0], 1, 1, backend="fortran")


@needs_cython
def test_fisher_backends_agree(rng):
    for n0, n1 in ((1, 1), (7, 3), (25, 24), (300, 500)):
        k0 = rng.integers(0, n0 + 1, size=500)
        k1 = rng.integers(0, n1 + 1, size=500)
        a = kernels.fisher_pvalues(k0, k1, n0, n1, backend="python")
        b = kernels.fisher_pvalues(k0, k1, n0, n1, backend="cython")
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-15)


@needs_cython
def test_coherent_threshold_backends_agree(rng):
    for V in (4, 9, 30):
        us, vs = edge_endpoints(V)
        for _ in range(40):
            # coarse scores force many ties
            scores = rng.integers(0, 6, size=n_edges(V)).astype(float)
            m = int(rng.integers(1, V + 1))
            s = int(rng.integers(1, n_edges(V) + 1))
            a = kernels.coherent_threshold(us, vs, scores, V, m, s, backend="python")
            b = kernels.coherent_threshold(us, vs, scores, V, m, s, backend="cython")
            assert a == b


def test_fisher_large_margins_finite():
    p = kernels.fisher_pvalues([0, 50000, 100000], [100000, 50000, 0], 100000, 100000)
    assert p[1] == pytest.approx(1.0, abs=1e-9)
    assert 0.0 <= p[0] < 1e-300 or p[0] == 0.0
    assert np.all(np.isfinite(p))
