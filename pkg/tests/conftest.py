import functools
import itertools

import numpy as np
import pytest

from gme_detect.weyl import weyl_operator


def brute_coefficient(rho, word):
    """tr(rho (A_{w1} x ... x A_{wn})^dagger) with explicit Kronecker products.

    ``word`` holds one (i, j) per party, (0, 0) meaning identity.
    """
    op = functools.reduce(np.kron, [weyl_operator(d, w) for d, w in zip(rho.dims, word)])
    return np.trace(rho.matrix @ op.conj().T)


def brute_partial_trace(mat, dims, keep):
    """Reduced matrix by explicit summation over traced indices."""
    n = len(dims)
    keep = sorted(keep)
    traced = [p for p in range(1, n + 1) if p not in keep]
    kd = [dims[p - 1] for p in keep]
    td = [dims[p - 1] for p in traced]
    Dk = int(np.prod(kd))
    out = np.zeros((Dk, Dk), dtype=complex)
    for r in itertools.product(*[range(d) for d in kd]):
        for c in itertools.product(*[range(d) for d in kd]):
            acc = 0
            for e in itertools.product(*[range(d) for d in td]):
                ri, ci = [0] * n, [0] * n
                for p, v in zip(keep, r):
                    ri[p - 1] = v
                for p, v in zip(keep, c):
                    ci[p - 1] = v
                for p, v in zip(traced, e):
                    ri[p - 1] = ci[p - 1] = v
                acc += mat[np.ravel_multi_index(ri, dims), np.ravel_multi_index(ci, dims)]
            out[np.ravel_multi_index(r, kd), np.ravel_multi_index(c, kd)] = acc
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def record_acceptance(number, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
