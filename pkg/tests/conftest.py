import numpy as np
import pytest

from sigsub.simulate import HomogeneousModelSpec, sample_homogeneous

# criterion id -> (passed, detail), filled in by test_acceptance.py
ACCEPTANCE = {}


def record(cid, name, passed, detail):
    ACCEPTANCE[cid] = (name, bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[cid]
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid:>2}. {name}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_spec():
    return HomogeneousModelSpec(12, 1, 6, 0.5, 0.1, 0.6)


@pytest.fixture(scope="session")
def small_ds(small_spec):
    return sample_homogeneous(small_spec, 40, "conditioned", seed=7)
