"""Noise-robustness scans along one-parameter state families.

For white-noise families ``rho(x) = x |psi><psi| + (1 - x) I / D`` the
identity part has no correlations, so every ``||N||_tr`` is linear in ``x``
and the detection threshold is ``x* = K / T(1)``. Other families fall back
to bisection on ``T(rho(x)) - K``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from .criteria import CriterionParams, T_score, threshold_for
from .states import Bipartition, DensityMatrix, KetExpression, white_noise_mix

# Reported thresholds of other criteria for the same families. Carried as
# constants for comparison tables; never recomputed here.
COMPARISON_RANGES_332 = {
    (0.5, 0.0, 1.0): 0.69,
    (1 / 3, 0.0, 2.0): 0.59,
    (0.0, 0.0, 1.0): 0.53,
}
COMPARISON_CURVES_GHZ4 = {
    "G1": lambda x: (4 + math.sqrt(2)) * x - (1 + math.sqrt(11 / 2)),
    "G2": lambda x: 9 * x**2 - 4,
}


@dataclass(frozen=True)
class FamilySpec:
    """A one-parameter family of states indexed by ``x`` in ``[x_lo, x_hi]``.

    With ``state_at`` unset the family is the white-noise mixture of ``ket``.
    """

    ket: KetExpression | None = None
    x_lo: float = 0.0
    x_hi: float = 1.0
    state_at: Callable[[float], DensityMatrix] | None = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if not 0.0 <= self.x_lo < self.x_hi <= 1.0:
            raise ValueError(f"need 0 <= x_lo < x_hi <= 1, got [{self.x_lo}, {self.x_hi}]")
        if (self.ket is None) == (self.state_at is None):
            raise ValueError("give exactly one of ket or state_at")

    @property
    def is_white_noise(self) -> bool:
        return self.state_at is None

    @property
    def dims(self) -> tuple[int, ...]:
        return self.ket.dims if self.ket is not None else self.state_at(self.x_hi).dims

    def state(self, x: float) -> DensityMatrix:
        if self.state_at is not None:
            return self.state_at(x)
        return white_noise_mix(self.ket, x)


@dataclass(frozen=True)
class ScanResult:
    params: CriterionParams
    threshold: float | None
    method: str
    samples: list[tuple[float, float, float]]
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["samples"] = [list(s) for s in self.samples]
        return d


def _score(family: FamilySpec, x: float, p, bips) -> float:
    return T_score(family.state(x), p, bips)[0]


def threshold(
    family: FamilySpec,
    p: CriterionParams,
    tol: float = 1e-4,
    bipartitions: Sequence[Bipartition] | None = None,
    method: str | None = None,
) -> ScanResult:
    """Smallest ``x`` above which the family is detected.

    ``method`` is ``"closed-form-linear"`` (default for white-noise
    families) or ``"bisection"``. Returns ``threshold=None`` when the test
    never fires inside the range.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    K = threshold_for(family.dims, p, bipartitions).value
    method = method or ("closed-form-linear" if family.is_white_noise else "bisection")
    lo, hi = family.x_lo, family.x_hi
    T_hi = _score(family, hi, p, bipartitions)
    samples = [(hi, T_hi, K)]
    if not T_hi > K:
        note = "degenerate family: T vanishes" if T_hi == 0 else "T <= K over the whole range"
        return ScanResult(p, None, method, samples, note)

    if method == "closed-form-linear":
        if not family.is_white_noise:
            raise ValueError("closed-form threshold needs a white-noise family")
        x_star = K / (T_hi / hi)
        note = ""
        if x_star < lo:
            x_star, note = lo, "detected over the whole range"
        for x in (x_star - tol, x_star + tol):
            if lo <= x <= hi:
                samples.append((x, _score(family, x, p, bipartitions), K))
    elif method == "bisection":
        T_lo = _score(family, lo, p, bipartitions)
        samples.append((lo, T_lo, K))
        note = ""
        if T_lo > K:
            return ScanResult(p, lo, method, sorted(samples), "detected over the whole range")
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            T_mid = _score(family, mid, p, bipartitions)
            samples.append((mid, T_mid, K))
            if T_mid > K:
                hi = mid
            else:
                lo = mid
        x_star = 0.5 * (lo + hi)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ScanResult(p, x_star, method, sorted(samples), note)


def table(
    family: FamilySpec,
    param_list: Sequence[CriterionParams],
    tol: float = 1e-4,
    bipartitions: Sequence[Bipartition] | None = None,
) -> list[ScanResult]:
    """One :func:`threshold` per parameter row, in input order."""
    if not param_list:
        raise ValueError("param_list is empty")
    return [threshold(family, p, tol, bipartitions) for p in param_list]


def curve(
    family: FamilySpec,
    p: CriterionParams,
    grid: int = 11,
    bipartitions: Sequence[Bipartition] | None = None,
) -> list[dict]:
    """``F(x) = T(rho(x)) - K`` on a uniform grid over the family's range."""
    if grid < 2:
        raise ValueError("grid needs at least two points")
    bound = threshold_for(family.dims, p, bipartitions)
    rows = []
    for k in range(grid):
        x = family.x_lo + (family.x_hi - family.x_lo) * k / (grid - 1)
        T = _score(family, x, p, bipartitions)
        F = T - bound.value
        rows.append({"x": x, "T": T, "K": bound.value, "F": F, "detected": bound.hypothesis_ok and F > 0})
    return rows


def comparison_curves(xs: Sequence[float]) -> dict[str, list[float]]:
    """Reported comparison lines for the four-qubit GHZ family, sampled at ``xs``."""
    return {name: [f(x) for x in xs] for name, f in COMPARISON_CURVES_GHZ4.items()}


CSV_FIELDS = ["x", "T", "K", "F", "detected"]


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def results_to_csv(results: Sequence[ScanResult]) -> str:
    rows = []
    for r in results:
        for x, T, K in r.samples:
            rows.append({"x": x, "T": T, "K": K, "F": T - K, "detected": T > K})
    return rows_to_csv(rows)


def results_to_json(results: Sequence[ScanResult]) -> str:
    return json.dumps([r.to_dict() for r in results], indent=2)
