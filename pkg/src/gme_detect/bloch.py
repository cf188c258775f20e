"""Correlation-tensor (generalised Bloch) decomposition in the Weyl basis.

Every state on ``d_1 x ... x d_n`` expands as

    rho = (1/D) sum_a C[a_1, ..., a_n] A_{a_1} (x) ... (x) A_{a_n}

with ``C[a] = tr(rho (A_{a_1} (x) ... (x) A_{a_n})^dagger)`` and ``a_k``
running over all ``d_k^2`` Weyl operators (identity at position 0).
The correlation tensor ``T^(S)`` of a party subset ``S`` is the block of ``C``
with identity on the parties outside ``S`` and nonidentity operators on ``S``.
Coefficients are complex because the Weyl operators are not Hermitian; all
norms below are ``sum |t|^2``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .states import DensityMatrix, PartySystem, is_pure
from .weyl import basis


def _subset_key(subset: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(set(int(p) for p in subset)))


def _nonempty_subsets(parties: Iterable[int]):
    parties = list(parties)
    for k in range(1, len(parties) + 1):
        yield from itertools.combinations(parties, k)


def full_coefficients(rho: DensityMatrix) -> np.ndarray:
    """All ``prod d_k^2`` expansion coefficients ``C[a_1, ..., a_n]``.

    Contracts one party at a time, so no ``D x D`` Kronecker words are formed.
    """
    dims = rho.dims
    n = len(dims)
    t = rho.matrix.reshape(dims * 2)
    # interleave as (i1, j1, i2, j2, ...)
    t = t.transpose([ax for k in range(n) for ax in (k, k + n)])
    for d in dims:
        conj_ops = basis(d).full.conj()
        # C gets A^dagger[j, i] = conj(A[i, j]) contracted with rho[i, j]
        t = np.tensordot(t, conj_ops, axes=([0, 1], [1, 2]))
    return t


@dataclass(frozen=True)
class BlochTensor:
    """Correlation tensors ``T^(S)`` for every nonempty party subset ``S``.

    ``coeffs[S]`` has one axis per party in ``S`` (ascending), each of length
    ``d^2 - 1`` in canonical Weyl order.
    """

    dims: tuple[int, ...]
    coeffs: Mapping[tuple[int, ...], np.ndarray] = field(repr=False)

    def __post_init__(self):
        system = PartySystem(tuple(self.dims))
        object.__setattr__(self, "dims", system.dims)
        clean = {}
        for subset, arr in self.coeffs.items():
            key = _subset_key(subset)
            if not key or key[0] < 1 or key[-1] > system.n:
                raise ValueError(f"subset {subset} invalid for {system.n} parties")
            shape = tuple(self.dims[p - 1] ** 2 - 1 for p in key)
            arr = np.array(arr, dtype=complex)
            if arr.shape != shape:
                raise ValueError(f"tensor for subset {key} has shape {arr.shape}, expected {shape}")
            arr.setflags(write=False)
            clean[key] = arr
        for key in _nonempty_subsets(range(1, system.n + 1)):
            if key not in clean:
                z = np.zeros(tuple(self.dims[p - 1] ** 2 - 1 for p in key), dtype=complex)
                z.setflags(write=False)
                clean[key] = z
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def from_full(cls, full: np.ndarray, dims) -> "BlochTensor":
        n = len(dims)
        coeffs = {}
        for subset in _nonempty_subsets(range(1, n + 1)):
            index = tuple(slice(1, None) if p + 1 in subset else 0 for p in range(n))
            coeffs[subset] = full[index]
        return cls(tuple(dims), coeffs)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def D(self) -> int:
        return math.prod(self.dims)

    def __getitem__(self, subset) -> np.ndarray:
        key = _subset_key(subset)
        if key not in self.coeffs:
            raise KeyError(f"no correlation tensor for subset {subset}")
        return self.coeffs[key]

    def full(self) -> np.ndarray:
        """Assemble the ``prod d_k^2`` coefficient array (identity entry = 1)."""
        shape = tuple(d * d for d in self.dims)
        out = np.zeros(shape, dtype=complex)
        out[(0,) * self.n] = 1.0
        for subset, arr in self.coeffs.items():
            index = tuple(slice(1, None) if p + 1 in subset else 0 for p in range(self.n))
            out[index] = arr
        return out


def decompose(rho: DensityMatrix) -> BlochTensor:
    """Weyl-basis correlation tensors of ``rho`` for all ``2^n - 1`` subsets."""
    return BlochTensor.from_full(full_coefficients(rho), rho.dims)


def reconstruct(t: BlochTensor) -> DensityMatrix:
    """Inverse of :func:`decompose`: ``(1/D)(I + sum_S T^(S) . A_(S))``."""
    dims = t.dims
    n = len(dims)
    c = t.full()
    for d in dims:
        c = np.tensordot(c, basis(d).full, axes=([0], [0]))
    # axes are now (i1, j1, i2, j2, ...)
    c = c.transpose([2 * k for k in range(n)] + [2 * k + 1 for k in range(n)])
    D = math.prod(dims)
    return DensityMatrix(c.reshape(D, D) / D, dims)


def subset_norm_sq(t: BlochTensor, subset) -> float:
    """``||T^(S)||^2 = sum |t|^2`` over the subset's tensor."""
    key = _subset_key(subset)
    if not key:
        raise ValueError("subset must be nonempty")
    try:
        arr = t[key]
    except KeyError:
        raise ValueError(f"unknown subset {subset} for {t.n} parties") from None
    return float(np.sum(np.abs(arr) ** 2))


def sector_norms(t: BlochTensor) -> np.ndarray:
    """``A_s`` = sum of ``||T^(S)||^2`` over subsets of size ``s``, for ``s = 1..n``."""
    out = np.zeros(t.n)
    for key, arr in t.coeffs.items():
        out[len(key) - 1] += np.sum(np.abs(arr) ** 2)
    return out


def purity_identity_residual(rho: DensityMatrix, t: BlochTensor | None = None) -> float:
    """``|tr(rho^2) - (1 + sum_s A_s) / D|``; zero up to round-off for any state."""
    t = decompose(rho) if t is None else t
    return abs(rho.purity() - (1.0 + sector_norms(t).sum()) / rho.D)


def marginal_identity_residual(rho: DensityMatrix, party: int, t: BlochTensor | None = None) -> float:
    """Mismatch between the purities of one party and of its complement.

    For pure ``rho`` both sides of

        (1/d_p)(1 + ||T^(p)||^2) = (d_p/D)(1 + sum_{S in complement} ||T^(S)||^2)

    equal the common marginal purity.
    """
    if not is_pure(rho):
        raise ValueError("marginal identity requires a pure state (tr rho^2 >= 1 - 1e-8)")
    if not 1 <= party <= rho.n:
        raise ValueError(f"party {party} out of range 1..{rho.n}")
    t = decompose(rho) if t is None else t
    d_p = rho.dims[party - 1]
    rest = [q for q in range(1, rho.n + 1) if q != party]
    lhs = (1.0 + subset_norm_sq(t, (party,))) / d_p
    rhs = (1.0 + sum(subset_norm_sq(t, s) for s in _nonempty_subsets(rest))) * d_p / rho.D
    return abs(lhs - rhs)


def single_party_hermiticity_residual(t: BlochTensor) -> float:
    """Worst violation of ``u_(-i,-j) = omega^(ij) conj(u_ij)`` over all parties."""
    worst = 0.0
    for p, d in enumerate(t.dims, start=1):
        u = np.concatenate([[1.0], t[(p,)]])
        w = basis(d).omega
        for i in range(d):
            for j in range(d):
                lhs = u[((-i) % d) * d + (-j) % d]
                rhs = w ** ((i * j) % d) * np.conj(u[i * d + j])
                worst = max(worst, abs(lhs - rhs))
    return float(worst)


def coefficient_records(t: BlochTensor, cutoff: float = 1e-12) -> list[dict]:
    """Flat list of coefficients with modulus above ``cutoff``.

    Each record is ``{"subset": [...], "indices": "01,10", "re": x, "im": y}``.
    """
    labels = {d: [f"{i}{j}" for i in range(d) for j in range(d)][1:] for d in set(t.dims)}
    records = []
    for key in sorted(t.coeffs, key=lambda k: (len(k), k)):
        arr = t.coeffs[key]
        for idx in zip(*np.nonzero(np.abs(arr) > cutoff)):
            val = arr[idx]
            records.append(
                {
                    "subset": list(key),
                    "indices": ",".join(labels[t.dims[p - 1]][a] for p, a in zip(key, idx)),
                    "re": float(val.real),
                    "im": float(val.imag),
                }
            )
    return records
