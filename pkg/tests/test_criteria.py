import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_coefficient
from gme_detect import states
from gme_detect.bloch import decompose
from gme_detect.criteria import (
    J2,
    K1,
    K2,
    CriterionParams,
    M_bound,
    T_score,
    biseparable_bound_check,
    build_N_multipartite,
    build_N_tripartite,
    gme_verdict,
    m_bound,
    matricize,
    n_bound,
    n_bound_homogeneous,
    split_norms,
    thm1_bound,
    trace_norm,
)
from gme_detect.states import Bipartition, from_ket, maximally_mixed, named_state, white_noise_mix
from gme_detect.weyl import canonical_indices

SQ3 = math.sqrt(3)


def eig_trace_norm(M):
    """Independent route: tr sqrt(M M^dagger) from a Hermitian eigensolver."""
    G = M @ M.conj().T if M.shape[0] <= M.shape[1] else M.conj().T @ M
    ev = scipy.linalg.eigh(G, eigvals_only=True, driver="ev")
    return float(np.sqrt(np.clip(ev, 0, None)).sum())


@pytest.mark.parametrize("df, dg, expected", [(2, 2, 3), (3, 2, 4.5), (2, 3, 4.5), (3, 3, 8)])
def test_m_bound(df, dg, expected):
    assert m_bound(df, dg) == pytest.approx(expected, abs=1e-14)


def test_m_bound_invalid():
    with pytest.raises(ValueError):
        m_bound(1, 2)


@pytest.mark.parametrize(
    "dims, expected, ok",
    [([2, 2, 2], 4.0, True), ([2, 2, 2, 2], 9.0, True), ([3, 2], 4.5, True), ([2], 1.0, True), ([3, 2, 2], None, True), ([3, 3, 2, 2], None, True), ([4, 2, 2], None, True), ([5, 2, 2], None, False)],
)
def test_n_bound(dims, expected, ok):
    nb = n_bound(dims)
    if expected is not None:
        assert nb.value == pytest.approx(expected, abs=1e-12)
    assert nb.hypothesis_ok is ok


def test_n_bound_empty():
    with pytest.raises(ValueError):
        n_bound([])


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("k", [3, 4, 5, 6])
def test_n_bound_homogeneous_cross_check(d, k):
    closed = d**k - k / (k - 2) * d ** (k - 2) + 2 / (k - 2)
    assert abs(n_bound([d] * k).value - closed) <= 1e-12 * max(1, closed)
    assert n_bound_homogeneous(d, k) == pytest.approx(closed, rel=1e-15)


def test_matricize_s21_layout():
    rho = states.random_mixed((2, 2, 3), seed=3)
    t = decompose(rho)
    S = matricize(t, [2], [1])
    assert S.shape == (3, 3)
    idx = canonical_indices(2)
    for r, a in enumerate(idx):
        for c, b in enumerate(idx):
            assert S[r, c] == pytest.approx(brute_coefficient(rho, [b, a, (0, 0)]), abs=1e-12)


def test_matricize_s213_layout():
    rho = states.random_mixed((2, 2, 3), seed=4)
    t = decompose(rho)
    S = matricize(t, [2], [1, 3])
    assert S.shape == (3, 24)
    i2, i3 = canonical_indices(2), canonical_indices(3)
    cols = [(a, b) for a in i2 for b in i3]
    assert ["".join(map(str, a)) + "," + "".join(map(str, b)) for a, b in cols[:2]] == ["01,01", "01,02"]
    for r, x in enumerate(i2):
        for c, (a, b) in enumerate(cols):
            assert S[r, c] == pytest.approx(brute_coefficient(rho, [a, x, b]), abs=1e-12)


def test_matricize_errors_and_zero():
    t = decompose(maximally_mixed([2, 2, 3]))
    assert np.abs(matricize(t, [1, 3], [2])).max() <= 1e-15
    with pytest.raises(ValueError):
        matricize(t, [1, 2], [2])
    with pytest.raises(ValueError):
        matricize(t, [], [2])


def test_build_N_tripartite_blocks():
    rho = states.random_mixed((2, 2, 3), seed=6)
    t = decompose(rho)
    bip = Bipartition((2,), (1, 3))
    np.testing.assert_array_equal(build_N_tripartite(t, bip, CriterionParams(0, 0, 1)), matricize(t, [2], [1, 3]))
    N = build_N_tripartite(t, bip, CriterionParams(2, 0, 0))
    np.testing.assert_allclose(N[:, :3], 2 * matricize(t, [2], [1]))
    assert np.abs(N[:, 3:]).max() == 0
    N = build_N_tripartite(t, bip, CriterionParams(0, 1, 0))
    np.testing.assert_allclose(N[:, 3:11], matricize(t, [2], [3]))
    assert np.abs(N[:, :3]).max() == 0 and np.abs(N[:, 11:]).max() == 0
    N = build_N_tripartite(t, bip, CriterionParams(0, 1, 0, "leading-overlap"))
    np.testing.assert_allclose(N[:, :8], matricize(t, [2], [3]))
    assert build_N_tripartite(decompose(maximally_mixed([2, 2, 3])), bip, CriterionParams()).any() == False
    with pytest.raises(ValueError):
        build_N_tripartite(decompose(maximally_mixed([2, 2, 2, 2])), Bipartition((1,), (2, 3, 4)), CriterionParams())


def test_build_N_multipartite_layout():
    rho = states.random_mixed((2, 2, 2, 2), seed=8)
    t = decompose(rho)
    bip = Bipartition((1, 3), (2, 4))
    N = build_N_multipartite(t, bip, CriterionParams(1, 0))
    S132 = matricize(t, [1, 3], [2])
    assert N.shape == (9, 9) and S132.shape == (9, 3)
    np.testing.assert_allclose(N[:, :3], S132)
    assert np.abs(N[:, 3:]).max() == 0
    # row (01, 10) of S^{13|2} holds t_{01,c,10,.} with party 2 varying along the row
    i2 = canonical_indices(2)
    for c, b in enumerate(i2):
        assert S132[1, c] == pytest.approx(brute_coefficient(rho, [(0, 1), b, (1, 0), (0, 0)]), abs=1e-12)
    np.testing.assert_allclose(build_N_multipartite(t, bip, CriterionParams(0, 2.5)), 2.5 * matricize(t, [1, 3], [2, 4]))
    with pytest.raises(ValueError):
        build_N_multipartite(t, Bipartition((1, 2, 3), (4,)), CriterionParams())
    N4 = build_N_multipartite(t, bip, CriterionParams(1, 0), lk=4)
    np.testing.assert_allclose(N4[:, :3], matricize(t, [1, 3], [4]))


def test_trace_norm_examples(rng):
    assert trace_norm(np.eye(4)) == pytest.approx(4)
    u = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    v = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    assert trace_norm(np.outer(u, v.conj())) == pytest.approx(np.linalg.norm(u) * np.linalg.norm(v), rel=1e-12)
    M = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
    assert abs(trace_norm(M) - eig_trace_norm(M)) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_zero_padding_invariance(r, c, pad, seed):
    g = np.random.default_rng(seed)
    S = g.standard_normal((r, c)) + 1j * g.standard_normal((r, c))
    assert abs(trace_norm(np.hstack([S, np.zeros((r, pad))])) - trace_norm(S)) <= 1e-10


@pytest.mark.parametrize(
    "dims, p, expected",
    [
        ((2, 2, 2), CriterionParams(1, 1, 1), 2 + SQ3),
        ((3, 3, 2), CriterionParams(0, 0, 1), 3.0),
        ((2, 2, 2), CriterionParams(0, 0, 0), 0.0),
    ],
)
def test_thm1_bound(dims, p, expected):
    assert thm1_bound(dims, p) == pytest.approx(expected, abs=1e-12)


def test_K1():
    for p in [CriterionParams(1, 1, 1), CriterionParams(0.5, 2, 0.1)]:
        assert K1((2, 2, 2), p) == pytest.approx(thm1_bound((2, 2, 2), p))
    # 6 orderings of (3, 3, 2); sqrt(2) sqrt(m(3,2)) = 3 beats sqrt(1) sqrt(m(3,3)) = sqrt(8)
    assert K1((3, 3, 2), CriterionParams(0, 0, 1)) == pytest.approx(3.0)
    assert K1((3, 3, 2), CriterionParams(1, 0, 0)) == pytest.approx(2.0)
    assert K1((3, 3, 2), CriterionParams(0.5, 0, 1)) == pytest.approx(4.0)
    assert K1((3, 3, 2), CriterionParams(1 / 3, 0, 2)) == pytest.approx(2 / 3 + 6)


def test_M_bound():
    d4 = (2, 2, 2, 2)
    assert M_bound(Bipartition((1,), (2, 3, 4)), d4, CriterionParams(1, 1)).value == pytest.approx(3.0)
    assert M_bound(Bipartition((1, 2), (3, 4)), d4, CriterionParams(1, 1)).value == pytest.approx(SQ3 * (1 + SQ3))
    assert M_bound(Bipartition((1, 2), (3, 4)), d4, CriterionParams(0, 1)).value == pytest.approx(3.0)
    # two-party side (3, 2) breaks prod/d_i^2 >= 1
    b = M_bound(Bipartition((1, 2), (3, 4)), (3, 2, 2, 2), CriterionParams(1, 1))
    assert not b.hypothesis_ok and not b.applicable
    assert M_bound(Bipartition((1,), (2, 3, 4)), (3, 2, 2, 2), CriterionParams(1, 1)).applicable


def test_K2_J2():
    p = CriterionParams(1, 1)
    assert J2(2, 4, p) == pytest.approx(SQ3 * (1 + SQ3), abs=1e-12)
    assert K2((2, 2, 2, 2), p).value == pytest.approx(J2(2, 4, p), abs=1e-12)
    assert J2(2, 4, CriterionParams(0, 1)) == pytest.approx(3.0)
    for d, n in [(2, 5), (2, 6), (3, 4)]:
        assert K2((d,) * n, p).value == pytest.approx(J2(d, n, p), rel=1e-12)
    assert not K2((3, 2, 2, 2), p).hypothesis_ok
    with pytest.raises(ValueError):
        J2(2, 3, p)


def test_T_score_ghz4_werner():
    g = named_state("ghz", n=4)
    p = CriterionParams(1, 1)
    for x in np.linspace(0, 1, 6):
        T, detail = T_score(white_noise_mix(g, x), p)
        assert T == pytest.approx(5 * x, abs=1e-9)
        assert len(detail) == 7
        assert detail[0][1] == pytest.approx((4 + math.sqrt(2)) * x, abs=1e-9)


def test_T_score_paper_332():
    phi = named_state("paper_332")
    p = CriterionParams(0, 0, 1)
    T1, detail = T_score(white_noise_mix(phi, 1), p)
    assert len(detail) == 3
    assert 3 / 0.53 < T1 < 3 / 0.50
    T_half, _ = T_score(white_noise_mix(phi, 0.5), p)
    assert T_half == pytest.approx(0.5 * T1, abs=1e-9)


def test_T_score_mixed_is_zero():
    T, _ = T_score(maximally_mixed([2, 2, 2]), CriterionParams())
    assert T == pytest.approx(0, abs=1e-14)


def test_thread_pool_gives_same_result(monkeypatch):
    rho = states.random_mixed((2, 2, 2, 2), seed=1)
    serial = split_norms(rho, CriterionParams(1, 1))
    monkeypatch.setenv("GME_DETECT_THREADS", "4")
    assert split_norms(rho, CriterionParams(1, 1)) == serial


def test_verdicts():
    rep = gme_verdict(white_noise_mix(named_state("ghz", n=4), 0.95), CriterionParams(1, 1))
    assert rep.detected and not rep.inconclusive
    assert rep.T == min(r.trace_norm for r in rep.records)
    assert rep.K == pytest.approx(max(r.bound.value for r in rep.records))
    assert any("symmetrically coherent" in c for c in rep.caveats)
    assert any("proxy passes" in c for c in rep.caveats)
    assert not gme_verdict(maximally_mixed([2, 2, 2]), CriterionParams()).detected
    rep = gme_verdict(white_noise_mix(named_state("paper_332"), 0.52), CriterionParams(0, 0, 1))
    assert rep.detected
    assert any("skipped" in c for c in rep.caveats)
    assert not gme_verdict(white_noise_mix(named_state("paper_332"), 0.50), CriterionParams(0, 0, 1)).detected


def test_verdict_inconclusive_when_hypothesis_fails():
    rho = states.random_pure((3, 2, 2, 2), 0)
    rep = gme_verdict(rho, CriterionParams(1, 1))
    assert rep.inconclusive and not rep.detected
    d = rep.to_dict()
    assert any(not b["applicable"] for b in d["bipartitions"])
    assert set(d) == {"bipartitions", "T", "K", "detected", "inconclusive", "caveats"}


@pytest.mark.parametrize(
    "split, dims, p",
    [
        ("1|23", (2, 2, 2), CriterionParams(1, 1, 1)),
        ("3|12", (3, 3, 2), CriterionParams(0, 0, 1)),
        ("2|13", (3, 3, 2), CriterionParams(0.5, 1, 1, "leading-overlap")),
        ("12|34", (2, 2, 2, 2), CriterionParams(1, 1)),
        ("2|1345", (2, 2, 2, 2, 2), CriterionParams(1, 1)),
    ],
)
def test_biseparable_bound_check(split, dims, p):
    chk = biseparable_bound_check(Bipartition.parse(split), dims, p, samples=150, seed=3)
    assert not chk.skipped and chk.violations == 0


def test_biseparable_bound_check_skips_inapplicable():
    chk = biseparable_bound_check(Bipartition.parse("12|34"), (3, 2, 2, 2), CriterionParams(1, 1), samples=5)
    assert chk.skipped and chk.violations == 0


@pytest.mark.parametrize("name, p", [("paper_332", CriterionParams(1, 1, 1)), ("ghz", CriterionParams(1, 1)), ("w", CriterionParams(1, 1, 1))])
def test_subadditivity(name, p):
    rho = white_noise_mix(named_state(name), 0.8)
    t = decompose(rho)
    for bip in states.all_bipartitions(rho.n):
        if rho.n == 3:
            (i,), (j, k) = bip.left, bip.right
            N = build_N_tripartite(t, bip, p)
            parts = abs(p.alpha) * trace_norm(matricize(t, [i], [j])) + abs(p.beta) * trace_norm(matricize(t, [i], [k])) + abs(p.gamma) * trace_norm(matricize(t, [i], [j, k]))
        else:
            N = build_N_multipartite(t, bip, p)
            parts = abs(p.alpha) * trace_norm(matricize(t, bip.left, [bip.right[0]])) + abs(p.beta) * trace_norm(matricize(t, bip.left, bip.right))
        assert trace_norm(N) <= parts + 1e-9
