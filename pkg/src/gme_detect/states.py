"""Density matrices on multipartite qudit systems.

Parties are labelled ``1..n`` in every public function. Computational basis
indices are ordered with party 1 varying slowest, i.e. the usual
``np.kron(a, b)`` convention.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = -1e-9
PURITY_TOL = 1e-8


class InvalidStateError(ValueError):
    """Raised when input data cannot describe a valid state."""


@dataclass(frozen=True)
class PartySystem:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("a system needs at least one party")
        if any(d < 2 for d in dims):
            raise ValueError(f"every local dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def D(self) -> int:
        return math.prod(self.dims)

    def sub(self, parties: Iterable[int]) -> "PartySystem":
        return PartySystem(tuple(self.dims[p - 1] for p in parties))


def _as_system(system) -> PartySystem:
    if isinstance(system, PartySystem):
        return system
    return PartySystem(tuple(system))


@dataclass(frozen=True)
class Bipartition:
    """Split of parties ``1..n`` into two nonempty groups.

    Use :meth:`canonical` to get the representative with the smaller group on
    the left (ties broken lexicographically) and both sides sorted.
    """

    left: tuple[int, ...]
    right: tuple[int, ...]

    def __post_init__(self):
        left = tuple(int(p) for p in self.left)
        right = tuple(int(p) for p in self.right)
        if not left or not right:
            raise ValueError("both sides of a bipartition must be nonempty")
        if set(left) & set(right):
            raise ValueError(f"bipartition sides overlap: {left} | {right}")
        if sorted(left + right) != list(range(1, len(left) + len(right) + 1)):
            raise ValueError(f"bipartition {left}|{right} does not cover parties 1..n")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def n(self) -> int:
        return len(self.left) + len(self.right)

    def canonical(self) -> "Bipartition":
        a, b = sorted(self.left), sorted(self.right)
        if len(a) > len(b) or (len(a) == len(b) and a > b):
            a, b = b, a
        return Bipartition(tuple(a), tuple(b))

    @classmethod
    def parse(cls, text: str) -> "Bipartition":
        """Parse ``"1|23"`` or ``"1,2|3,4"`` style strings."""
        try:
            lhs, rhs = text.split("|")
        except ValueError:
            raise ValueError(f"expected one '|' in bipartition {text!r}") from None

        def side(s):
            s = s.strip()
            return tuple(int(c) for c in (s.split(",") if "," in s else s))

        return cls(side(lhs), side(rhs))

    def __str__(self) -> str:
        sep = "," if self.n > 9 else ""
        return sep.join(map(str, self.left)) + "|" + sep.join(map(str, self.right))


def all_bipartitions(n: int) -> list[Bipartition]:
    """Canonical bipartitions with ``|left| <= n // 2``, ordered by left size."""
    if n < 2:
        raise ValueError("need at least two parties")
    parties = range(1, n + 1)
    out = []
    for k in range(1, n // 2 + 1):
        for left in itertools.combinations(parties, k):
            right = tuple(p for p in parties if p not in left)
            if k == n - k and left > right:
                continue
            out.append(Bipartition(left, right))
    return out


@dataclass(frozen=True)
class DensityMatrix:
    """Dense ``D x D`` complex matrix together with its party dimensions.

    Construction only checks shapes; call :func:`validate` for the physical
    invariants.
    """

    matrix: np.ndarray = field(repr=False)
    dims: tuple[int, ...]

    def __post_init__(self):
        system = _as_system(self.dims)
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (system.D, system.D):
            raise InvalidStateError(
                f"matrix shape {mat.shape} does not match dims {system.dims} (D={system.D})"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dims", system.dims)

    @property
    def system(self) -> PartySystem:
        return PartySystem(self.dims)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def D(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix.conj().T, self.matrix)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class KetExpression:
    """Sparse pure state: basis multi-index -> amplitude."""

    dims: tuple[int, ...]
    amplitudes: Mapping[tuple[int, ...], complex]

    def __post_init__(self):
        system = _as_system(self.dims)
        amps = {}
        for key, val in self.amplitudes.items():
            key = tuple(int(k) for k in key)
            if len(key) != system.n or any(not 0 <= k < d for k, d in zip(key, system.dims)):
                raise ValueError(f"basis index {key} invalid for dims {system.dims}")
            amps[key] = amps.get(key, 0) + complex(val)
        object.__setattr__(self, "dims", system.dims)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "KetExpression":
        nrm = self.norm()
        if not nrm > 0 or not math.isfinite(nrm):
            raise InvalidStateError("degenerate ket: amplitudes are all zero")
        return KetExpression(self.dims, {k: v / nrm for k, v in self.amplitudes.items()})

    def to_vector(self) -> np.ndarray:
        ket = self.normalized()
        vec = np.zeros(math.prod(self.dims), dtype=complex)
        for key, val in ket.amplitudes.items():
            vec[np.ravel_multi_index(key, self.dims)] += val
        return vec


def from_ket(ket: KetExpression) -> DensityMatrix:
    """Projector ``|psi><psi|`` onto the (normalised) ket."""
    vec = ket.to_vector()
    return DensityMatrix(np.outer(vec, vec.conj()), ket.dims)


def from_vector(vec, dims: Sequence[int]) -> DensityMatrix:
    vec = np.asarray(vec, dtype=complex).ravel()
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise InvalidStateError("degenerate ket: amplitudes are all zero")
    vec = vec / nrm
    return DensityMatrix(np.outer(vec, vec.conj()), dims)


def ghz(n: int, d: int = 2) -> KetExpression:
    if n < 2 or d < 2:
        raise ValueError(f"GHZ needs n >= 2 and d >= 2, got n={n}, d={d}")
    return KetExpression((d,) * n, {(k,) * n: 1.0 for k in range(d)}).normalized()


def w_state(n: int = 3) -> KetExpression:
    if n < 3:
        raise ValueError(f"W state needs n >= 3 qubits, got n={n}")
    amps = {}
    for pos in range(n):
        key = [0] * n
        key[n - 1 - pos] = 1
        amps[tuple(key)] = 1.0
    return KetExpression((2,) * n, amps).normalized()


def paper_332() -> KetExpression:
    """The (3, 3, 2) test state
    ``[(|10> + |21>)|0> + (|00> + |11> + |22>)|1>] / sqrt(5)``."""
    keys = [(1, 0, 0), (2, 1, 0), (0, 0, 1), (1, 1, 1), (2, 2, 1)]
    return KetExpression((3, 3, 2), {k: 1.0 for k in keys}).normalized()


NAMED_STATES = ("ghz", "w", "paper_332")


def named_state(name: str, n: int | None = None, d: int | None = None) -> KetExpression:
    """Look up a registered pure state by (case-insensitive) name."""
    key = name.lower()
    if key == "ghz":
        return ghz(4 if n is None else n, 2 if d is None else d)
    if key == "w":
        if d not in (None, 2):
            raise ValueError("W state is defined for qubits only (d=2)")
        return w_state(3 if n is None else n)
    if key == "paper_332":
        if n not in (None, 3) or d is not None:
            raise ValueError("paper_332 is fixed at dims (3, 3, 2); do not pass n or d")
        return paper_332()
    raise ValueError(f"unknown state {name!r}; known: {', '.join(NAMED_STATES)}")


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    D = math.prod(dims)
    return DensityMatrix(np.eye(D) / D, dims)


def white_noise_mix(psi, x: float) -> DensityMatrix:
    """``x |psi><psi| + (1 - x) I / D`` for ``0 <= x <= 1``.

    ``psi`` may be a :class:`KetExpression` or an existing
    :class:`DensityMatrix`.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"mixing parameter must lie in [0, 1], got {x}")
    rho = from_ket(psi) if isinstance(psi, KetExpression) else psi
    D = rho.D
    return DensityMatrix(x * rho.matrix + (1.0 - x) / D * np.eye(D), rho.dims)


def kron(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(np.kron(a.matrix, b.matrix), a.dims + b.dims)


def permute_parties(rho: DensityMatrix, order: Sequence[int]) -> DensityMatrix:
    """Reorder tensor factors: party ``order[k]`` of ``rho`` becomes party ``k+1``."""
    n = rho.n
    perm = [p - 1 for p in order]
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of 1..{n}")
    t = rho.matrix.reshape(rho.dims * 2)
    t = t.transpose(perm + [p + n for p in perm])
    dims = tuple(rho.dims[p] for p in perm)
    return DensityMatrix(t.reshape(rho.D, rho.D), dims)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the parties in ``keep`` (returned in ascending order)."""
    keep = sorted(set(int(p) for p in keep))
    if not keep:
        raise ValueError("partial trace needs at least one party to keep")
    if keep[0] < 1 or keep[-1] > rho.n:
        raise ValueError(f"parties {keep} out of range 1..{rho.n}")
    n = rho.n
    t = rho.matrix.reshape(rho.dims * 2)
    traced = [p for p in range(n) if p + 1 not in keep]
    # einsum subscripts: bra/ket share a letter on traced parties
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    row = [next(letters) for _ in range(n)]
    col = [row[p] if p in traced else next(letters) for p in range(n)]
    out = [row[p - 1] for p in keep] + [col[p - 1] for p in keep]
    red = np.einsum("".join(row + col) + "->" + "".join(out), t)
    dims = tuple(rho.dims[p - 1] for p in keep)
    Dk = math.prod(dims)
    return DensityMatrix(red.reshape(Dk, Dk), dims)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_ket(dims: Sequence[int], seed=None) -> np.ndarray:
    """Haar-random unit vector (normalised complex Gaussian)."""
    rng = _rng(seed)
    D = math.prod(dims)
    vec = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    return vec / np.linalg.norm(vec)


def random_pure(system, seed=None) -> DensityMatrix:
    """Haar-random pure state; deterministic for an integer ``seed``."""
    system = _as_system(system)
    vec = random_ket(system.dims, seed)
    return DensityMatrix(np.outer(vec, vec.conj()), system.dims)


def random_mixed(system, rank: int | None = None, seed=None) -> DensityMatrix:
    """Mixture of ``rank`` Haar-random pure states with simplex-uniform weights."""
    system = _as_system(system)
    rng = _rng(seed)
    rank = system.D if rank is None else rank
    weights = rng.dirichlet(np.ones(rank))
    mat = np.zeros((system.D, system.D), dtype=complex)
    for w in weights:
        v = random_ket(system.dims, rng)
        mat += w * np.outer(v, v.conj())
    return DensityMatrix(mat, system.dims)


@dataclass(frozen=True)
class BiseparableSample:
    bipartition: Bipartition
    dims: tuple[int, ...]
    weights: np.ndarray
    factors: list[tuple[DensityMatrix, DensityMatrix]]

    def assemble(self) -> DensityMatrix:
        """Rebuild ``sum_s p_s rho_s^left (x) rho_s^right`` in party order."""
        order = self.bipartition.left + self.bipartition.right
        inverse = [order.index(p) + 1 for p in range(1, len(order) + 1)]
        D = math.prod(self.dims)
        total = np.zeros((D, D), dtype=complex)
        for p, (a, b) in zip(self.weights, self.factors):
            total += p * permute_parties(kron(a, b), inverse).matrix
        return DensityMatrix(total, self.dims)


def random_biseparable(
    bipartition: Bipartition, dims: Sequence[int], terms: int = 4, seed=None
) -> tuple[DensityMatrix, BiseparableSample]:
    """Random mixture of pure product states across ``bipartition``."""
    if terms < 1:
        raise ValueError("need at least one term")
    system = _as_system(dims)
    if bipartition.n != system.n:
        raise ValueError(f"bipartition {bipartition} does not match {system.n} parties")
    rng = _rng(seed)
    weights = rng.dirichlet(np.ones(terms)) if terms > 1 else np.ones(1)
    left_sys = system.sub(bipartition.left)
    right_sys = system.sub(bipartition.right)
    factors = [(random_pure(left_sys, rng), random_pure(right_sys, rng)) for _ in range(terms)]
    sample = BiseparableSample(bipartition, system.dims, weights, factors)
    return sample.assemble(), sample


@dataclass(frozen=True)
class ValidationReport:
    hermiticity: float
    trace_deviation: float
    min_eigenvalue: float
    failures: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def validate(rho) -> ValidationReport:
    """Check Hermiticity, unit trace and positive semidefiniteness."""
    mat = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho, dtype=complex)
    herm = float(np.abs(mat - mat.conj().T).max()) if mat.size else 0.0
    tr_dev = float(abs(np.trace(mat) - 1.0))
    min_eig = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2).min())
    failures = []
    if not herm <= HERMITIAN_TOL:
        failures.append(f"not Hermitian: max|rho - rho^dagger| = {herm:.3g} > {HERMITIAN_TOL:g}")
    if not tr_dev <= TRACE_TOL:
        failures.append(f"trace is not 1: |tr(rho) - 1| = {tr_dev:.3g} > {TRACE_TOL:g}")
    if not min_eig >= PSD_TOL:
        failures.append(f"not positive semidefinite: min eigenvalue {min_eig:.3g} < {PSD_TOL:g}")
    return ValidationReport(herm, tr_dev, min_eig, tuple(failures))


def is_pure(rho: DensityMatrix, tol: float = PURITY_TOL) -> bool:
    return rho.purity() >= 1.0 - tol


def from_descriptor(desc: Mapping) -> DensityMatrix:
    """Build a state from a JSON-style descriptor.

    Two forms are accepted::

        {"dims": [2, 2, 2, 2], "named": {"name": "ghz", "n": 4}, "noise_x": 0.95}
        {"dims": [2, 2], "matrix_re": [[...]], "matrix_im": [[...]]}

    ``noise_x`` defaults to 1 (no noise); ``matrix_im`` defaults to zeros.
    """
    if "dims" not in desc:
        raise InvalidStateError("descriptor is missing 'dims'")
    dims = tuple(int(d) for d in desc["dims"])
    has_named = "named" in desc
    has_matrix = "matrix_re" in desc
    if has_named == has_matrix:
        raise InvalidStateError("descriptor needs exactly one of 'named' or 'matrix_re'")
    if has_named:
        spec = dict(desc["named"])
        name = spec.pop("name", None)
        if name is None:
            raise InvalidStateError("'named' entry needs a 'name'")
        params = {k: int(v) for k, v in spec.items() if k in ("n", "d")}
        if name.lower() == "ghz":
            params.setdefault("n", len(dims))
            params.setdefault("d", dims[0])
        try:
            ket = named_state(name, **params)
        except ValueError as exc:
            raise InvalidStateError(str(exc)) from None
        if ket.dims != dims:
            raise InvalidStateError(f"named state has dims {ket.dims}, descriptor says {dims}")
        return white_noise_mix(ket, float(desc.get("noise_x", 1.0)))
    re = np.asarray(desc["matrix_re"], dtype=float)
    im = np.asarray(desc.get("matrix_im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise InvalidStateError(f"matrix_re shape {re.shape} != matrix_im shape {im.shape}")
    return DensityMatrix(re + 1j * im, dims)
