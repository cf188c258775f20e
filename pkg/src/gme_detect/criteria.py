"""Trace-norm tests for genuine multipartite entanglement.

Block matrices ``N`` are assembled from matricized correlation tensors and
their trace norms compared against closed-form bounds that every state
separable across the corresponding bipartition must satisfy.

Tripartite systems use ``N^{i|jk} = alpha S0^{i|j} + beta S^{i|k} + gamma S^{i|jk}``
and the threshold ``K1``; systems with four or more parties use
``N^{L|R} = alpha S0^{L|l_k} + beta S^{L|R}`` and the threshold ``K2``.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .bloch import BlochTensor, decompose
from .states import (
    Bipartition,
    DensityMatrix,
    all_bipartitions,
    random_biseparable,
)

Placement = Literal["disjoint", "leading-overlap"]

STANDING_CAVEAT = (
    "threshold assumes a symmetrically coherent state: biseparability in one "
    "bipartition carries over to the others and mixture summands do not increase N; "
    "this is not checked from rho alone"
)
ONE_SIDED_CAVEAT = "a negative result does not certify biseparability"


@dataclass(frozen=True)
class CriterionParams:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    placement: Placement = "disjoint"

    def __post_init__(self):
        if self.placement not in ("disjoint", "leading-overlap"):
            raise ValueError(f"unknown placement {self.placement!r}")


@dataclass(frozen=True)
class BoundValue:
    value: float | None
    hypothesis_ok: bool = True

    @property
    def applicable(self) -> bool:
        return self.value is not None and self.hypothesis_ok


# -- bounds -------------------------------------------------------------------


def _check_dims(*dims):
    for d in dims:
        if int(d) != d or d < 2:
            raise ValueError(f"local dimensions must be integers >= 2, got {d!r}")


def m_bound(df: int, dg: int) -> float:
    """Largest ``||T^(fg)||^2`` of a two-party state: ``min(df dg - df/dg, df dg - dg/df)``."""
    _check_dims(df, dg)
    return min(df * dg - df / dg, df * dg - dg / df)


def n_bound(dims: Sequence[int]) -> BoundValue:
    """Bound on the full correlation norm of a ``k``-party pure state.

    ``k = 1`` gives ``d - 1``, ``k = 2`` gives :func:`m_bound`; for ``k >= 3``
    the bound holds when ``prod(dims) >= max(dims)^2`` and ``hypothesis_ok``
    records whether it does.
    """
    dims = list(dims)
    if not dims:
        raise ValueError("n_bound needs at least one dimension")
    _check_dims(*dims)
    k = len(dims)
    if k == 1:
        return BoundValue(float(dims[0] - 1))
    if k == 2:
        return BoundValue(m_bound(*dims))
    D = math.prod(dims)
    inv = sum(1.0 / d**2 for d in dims)
    value = (D - D * inv / (k - 1) + 1.0 / (k - 1)) + (k / (k - 1) - D * inv / (k - 1)) / (k - 2)
    return BoundValue(value, D >= max(dims) ** 2)


def n_bound_homogeneous(d: int, k: int) -> float:
    """``n_bound([d] * k)`` in closed form (``k = 1, 2`` use the piecewise cases)."""
    if k == 1:
        return d - 1.0
    if k == 2:
        return m_bound(d, d)
    return d**k - k / (k - 2) * d ** (k - 2) + 2.0 / (k - 2)


def thm1_bound(dims: Sequence[int], p: CriterionParams) -> float:
    """Bound on ``||N^{i|jk}||_tr`` for states separable across ``i|jk``.

    ``dims = (d_i, d_j, d_k)`` with ``j`` the party of the alpha block.
    """
    di, dj, dk = dims
    _check_dims(di, dj, dk)
    return math.sqrt(di - 1) * (
        abs(p.alpha) * math.sqrt(dj - 1)
        + abs(p.beta) * math.sqrt(dk - 1)
        + abs(p.gamma) * math.sqrt(m_bound(dj, dk))
    )


def K1(dims: Sequence[int], p: CriterionParams) -> float:
    """Tripartite threshold: max of :func:`thm1_bound` over all orderings of the parties."""
    if len(dims) != 3:
        raise ValueError("K1 is defined for three parties")
    return max(thm1_bound([dims[a] for a in perm], p) for perm in itertools.permutations(range(3)))


def _side_ok(side_dims: Sequence[int]) -> bool:
    # a single party needs nothing; larger groups need prod/d_i^2 >= 1 for all i
    return len(side_dims) == 1 or math.prod(side_dims) >= max(side_dims) ** 2


def _alpha_party(bip: Bipartition, lk: int | None) -> int:
    if lk is None:
        return bip.right[0]
    if lk not in bip.right:
        raise ValueError(f"alpha-block party {lk} is not on the right of {bip}")
    return lk


def M_bound(bip: Bipartition, dims: Sequence[int], p: CriterionParams, lk: int | None = None) -> BoundValue:
    """Bound on ``||N^{L|R}||_tr`` for states separable across ``L|R`` (n >= 3 parties).

    ``sqrt(n_L) (|alpha| sqrt(d_lk - 1) + |beta| sqrt(n_R))`` where ``n_L``,
    ``n_R`` are :func:`n_bound` values of the two sides.
    """
    left = [dims[q - 1] for q in bip.left]
    right = [dims[q - 1] for q in bip.right]
    d_lk = dims[_alpha_party(bip, lk) - 1]
    nl, nr = n_bound(left), n_bound(right)
    value = math.sqrt(nl.value) * (abs(p.alpha) * math.sqrt(d_lk - 1) + abs(p.beta) * math.sqrt(nr.value))
    return BoundValue(value, _side_ok(left) and _side_ok(right))


def K2(dims: Sequence[int], p: CriterionParams) -> BoundValue:
    """Multipartite threshold: max of :func:`M_bound` over canonical bipartitions.

    ``hypothesis_ok`` is False if any contributing bound is inapplicable.
    """
    bounds = [M_bound(b, dims, p) for b in all_bipartitions(len(dims))]
    return BoundValue(max(b.value for b in bounds), all(b.hypothesis_ok for b in bounds))


def J2(d: int, n: int, p: CriterionParams) -> float:
    """:func:`K2` for ``n`` parties of equal dimension ``d``, in closed form."""
    if n < 4:
        raise ValueError("J2 is stated for n >= 4 parties")
    _check_dims(d)
    vals = []
    for k in range(1, n // 2 + 1):
        vals.append(
            math.sqrt(n_bound_homogeneous(d, k))
            * (abs(p.alpha) * math.sqrt(d - 1) + abs(p.beta) * math.sqrt(n_bound_homogeneous(d, n - k)))
        )
    return max(vals)


# -- matrices -----------------------------------------------------------------


def trace_norm(M) -> float:
    """Sum of singular values."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False).sum())


def matricize(t: BlochTensor, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """Flatten ``T^(rows + cols)`` into a matrix.

    Row and column multi-indices run over the listed parties' Weyl indices,
    the last-listed party varying fastest.
    """
    rows, cols = list(rows), list(cols)
    if not rows or not cols:
        raise ValueError("rows and cols must be nonempty")
    if set(rows) & set(cols) or len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        raise ValueError(f"party lists overlap: {rows} / {cols}")
    subset = sorted(rows + cols)
    arr = t[subset]
    axes = [subset.index(q) for q in rows + cols]
    arr = arr.transpose(axes)
    nr = math.prod(t.dims[q - 1] ** 2 - 1 for q in rows)
    return arr.reshape(nr, -1)


def _embed(block: np.ndarray, width: int, offset: int = 0) -> np.ndarray:
    out = np.zeros((block.shape[0], width), dtype=complex)
    out[:, offset : offset + block.shape[1]] = block
    return out


def build_N_tripartite(t: BlochTensor, bip: Bipartition, p: CriterionParams) -> np.ndarray:
    """``N^{i|jk}`` for a three-party system; ``j < k`` are the right parties in order."""
    if t.n != 3:
        raise ValueError(f"tripartite N needs 3 parties, got {t.n}")
    if len(bip.left) != 1:
        raise ValueError(f"tripartite N needs a single party on the left, got {bip}")
    (i,) = bip.left
    j, k = bip.right
    S = matricize(t, [i], [j, k])
    width = S.shape[1]
    N = p.gamma * S
    if p.alpha:
        N = N + p.alpha * _embed(matricize(t, [i], [j]), width)
    if p.beta:
        offset = t.dims[j - 1] ** 2 - 1 if p.placement == "disjoint" else 0
        N = N + p.beta * _embed(matricize(t, [i], [k]), width, offset)
    return N


def build_N_multipartite(
    t: BlochTensor, bip: Bipartition, p: CriterionParams, lk: int | None = None
) -> np.ndarray:
    """``N^{L|R} = alpha [S^{L|l_k} O] + beta S^{L|R}``.

    ``l_k`` defaults to the first party of ``R``.
    """
    if t.n < 3:
        raise ValueError("multipartite N needs at least 3 parties")
    if not 1 <= len(bip.left) <= t.n // 2:
        raise ValueError(f"left side of {bip} must hold 1..{t.n // 2} parties")
    S = matricize(t, bip.left, bip.right)
    N = p.beta * S
    if p.alpha:
        N = N + p.alpha * _embed(matricize(t, bip.left, [_alpha_party(bip, lk)]), S.shape[1])
    return N


def build_N(t: BlochTensor, bip: Bipartition, p: CriterionParams) -> np.ndarray:
    if t.n == 3:
        return build_N_tripartite(t, bip, p)
    return build_N_multipartite(t, bip, p)


def split_bound(bip: Bipartition, dims: Sequence[int], p: CriterionParams) -> BoundValue:
    """Separable-state bound matching :func:`build_N` for this split."""
    if len(dims) == 3:
        (i,) = bip.left
        j, k = bip.right
        return BoundValue(thm1_bound((dims[i - 1], dims[j - 1], dims[k - 1]), p))
    return M_bound(bip, dims, p)


# -- scores and verdicts ------------------------------------------------------


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("GME_DETECT_THREADS", "1")))
    except ValueError:
        return 1


def _as_tensor(rho) -> BlochTensor:
    return rho if isinstance(rho, BlochTensor) else decompose(rho)


def _check_party_count(n: int):
    if not 3 <= n <= 6:
        raise ValueError(f"criteria are implemented for 3..6 parties, got {n}")


def split_norms(rho, p: CriterionParams, bipartitions: Sequence[Bipartition] | None = None):
    """``(bipartition, ||N||_tr)`` for each requested (default: every canonical) split."""
    t = _as_tensor(rho)
    _check_party_count(t.n)
    bips = all_bipartitions(t.n) if bipartitions is None else [b.canonical() for b in bipartitions]

    def one(b):
        return trace_norm(build_N(t, b, p))

    workers = _workers()
    if workers > 1 and len(bips) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            norms = list(pool.map(one, bips))
    else:
        norms = [one(b) for b in bips]
    return list(zip(bips, norms))


def T_score(rho, p: CriterionParams, bipartitions: Sequence[Bipartition] | None = None):
    """Minimum of ``||N||_tr`` over bipartitions, plus the per-split values."""
    detail = split_norms(rho, p, bipartitions)
    return min(v for _, v in detail), detail


def threshold_for(dims: Sequence[int], p: CriterionParams, bipartitions: Sequence[Bipartition] | None = None) -> BoundValue:
    """Detection threshold: ``K1`` (3 parties) or ``K2`` (more), or the max
    split bound when only some bipartitions are considered."""
    if bipartitions is not None:
        bounds = [split_bound(b.canonical(), dims, p) for b in bipartitions]
        return BoundValue(max(b.value for b in bounds), all(b.hypothesis_ok for b in bounds))
    if len(dims) == 3:
        return BoundValue(K1(dims, p))
    return K2(dims, p)


@dataclass(frozen=True)
class SplitRecord:
    bipartition: Bipartition
    trace_norm: float
    bound: BoundValue

    def to_dict(self) -> dict:
        return {
            "left": list(self.bipartition.left),
            "right": list(self.bipartition.right),
            "trace_norm": self.trace_norm,
            "bound": self.bound.value,
            "applicable": self.bound.applicable,
        }


@dataclass(frozen=True)
class CriterionReport:
    records: tuple[SplitRecord, ...]
    T: float
    K: float
    detected: bool
    inconclusive: bool
    caveats: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "bipartitions": [r.to_dict() for r in self.records],
            "T": self.T,
            "K": self.K,
            "detected": self.detected,
            "inconclusive": self.inconclusive,
            "caveats": list(self.caveats),
        }


def permutation_asymmetry(rho: DensityMatrix) -> float:
    """Largest ``max|rho - P rho P^dagger|`` over party permutations (equal dims only)."""
    from .states import permute_parties

    worst = 0.0
    for perm in itertools.permutations(range(1, rho.n + 1)):
        worst = max(worst, float(np.abs(permute_parties(rho, perm).matrix - rho.matrix).max()))
    return worst


def gme_verdict(rho: DensityMatrix, p: CriterionParams, bipartitions: Sequence[Bipartition] | None = None) -> CriterionReport:
    """Apply the trace-norm GME test to ``rho``.

    ``detected`` requires ``T > K`` strictly and every contributing bound
    applicable; if some bound's dimension hypothesis fails the report is
    marked inconclusive instead.
    """
    t = decompose(rho)
    T, detail = T_score(t, p, bipartitions)
    threshold = threshold_for(rho.dims, p, bipartitions)
    records = tuple(SplitRecord(b, v, split_bound(b, rho.dims, p)) for b, v in detail)
    inconclusive = not threshold.hypothesis_ok
    caveats = [STANDING_CAVEAT, ONE_SIDED_CAVEAT]
    if len(set(rho.dims)) == 1:
        asym = permutation_asymmetry(rho)
        verdict = "passes" if asym <= 1e-10 else "fails"
        caveats.append(f"permutation-symmetry proxy {verdict}: max deviation {asym:.3g}")
    else:
        caveats.append("permutation-symmetry proxy skipped: local dimensions differ")
    if inconclusive:
        bad = [str(r.bipartition) for r in records if not r.bound.applicable]
        caveats.append("dimension hypothesis fails for " + ", ".join(bad) + "; verdict inconclusive")
    detected = (not inconclusive) and T > threshold.value
    return CriterionReport(records, T, threshold.value, detected, inconclusive, tuple(caveats))


@dataclass(frozen=True)
class BoundCheck:
    bipartition: Bipartition
    samples: int
    violations: int
    max_excess: float
    bound: BoundValue
    skipped: bool = False


def biseparable_bound_check(
    bip: Bipartition,
    dims: Sequence[int],
    p: CriterionParams,
    samples: int = 1000,
    seed=0,
    terms: int = 3,
    tol: float = 1e-8,
) -> BoundCheck:
    """Sample states separable across ``bip`` and count bound violations.

    The largest ``||N||_tr - bound`` seen is reported as ``max_excess``.
    """
    bip = bip.canonical()
    dims = tuple(dims)
    bound = split_bound(bip, dims, p)
    if not bound.applicable:
        return BoundCheck(bip, 0, 0, float("nan"), bound, skipped=True)
    rng = np.random.default_rng(seed)
    violations = 0
    max_excess = -np.inf
    for _ in range(samples):
        rho, _ = random_biseparable(bip, dims, terms=int(rng.integers(1, terms + 1)), seed=rng)
        excess = trace_norm(build_N(decompose(rho), bip, p)) - bound.value
        max_excess = max(max_excess, excess)
        violations += excess > tol
    return BoundCheck(bip, samples, violations, float(max_excess), bound)
