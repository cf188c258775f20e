"""Weyl operators (principal basis) for a single qudit.

For local dimension ``d`` and ``omega = exp(2j*pi/d)`` the operators are

.. math::
    A_{ij} = \\sum_{m \\in Z_d} \\omega^{i m} E_{m, m+j}

They are unitary, orthogonal under the Hilbert-Schmidt product
(``tr(A_ij A_kl^dagger) = d delta_ik delta_jl``) and multiply as
``A_ij A_kl = omega^(jk) A_(i+k, j+l)``.

Index ``(i, j)`` maps to the flat position ``i*d + j``; position 0 is the
identity and positions ``1 .. d^2-1`` are the nonidentity operators in
lexicographic order.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np


class WeylIndex(NamedTuple):
    i: int
    j: int


def _check_dim(d: int) -> int:
    if int(d) != d or d < 2:
        raise ValueError(f"local dimension must be an integer >= 2, got {d!r}")
    return int(d)


def omega(d: int) -> complex:
    """Primitive d-th root of unity ``exp(2 pi i / d)``."""
    return np.exp(2j * np.pi / _check_dim(d))


def weyl_operator(d: int, idx) -> np.ndarray:
    """Return the d x d Weyl operator ``A_ij``.

    Parameters
    ----------
    d : int
        Local dimension, at least 2.
    idx : WeylIndex or tuple of int
        ``(i, j)`` with ``0 <= i, j < d``.

    Examples
    --------
    >>> weyl_operator(2, (0, 1)).real
    array([[0., 1.],
           [1., 0.]])
    """
    d = _check_dim(d)
    i, j = idx
    if not (0 <= i < d and 0 <= j < d):
        raise ValueError(f"Weyl index {tuple(idx)} out of range for d={d}")
    m = np.arange(d)
    # exact phases for the common cases keep the algebra identities tight
    phases = np.exp(2j * np.pi * ((i * m) % d) / d)
    phases.real[np.isclose(phases.real, 0.0, atol=1e-15)] = 0.0
    phases.imag[np.isclose(phases.imag, 0.0, atol=1e-15)] = 0.0
    out = np.zeros((d, d), dtype=complex)
    out[m, (m + j) % d] = phases
    return out


def canonical_indices(d: int) -> list[WeylIndex]:
    """Nonidentity Weyl indices in lexicographic order, (0,0) excluded."""
    d = _check_dim(d)
    return [WeylIndex(i, j) for i in range(d) for j in range(d) if (i, j) != (0, 0)]


def index_labels(d: int) -> list[str]:
    """Labels such as ``"01"``, ``"10"`` for the canonical ordering."""
    return [f"{i}{j}" for i, j in canonical_indices(d)]


@dataclass(frozen=True)
class WeylBasis:
    """The d^2-1 nonidentity Weyl operators of one qudit, in canonical order.

    ``full`` stacks all d^2 operators (identity first) as an array of shape
    ``(d*d, d, d)``; ``ops`` is the view without the identity.
    """

    d: int
    full: np.ndarray = field(repr=False)

    @property
    def omega(self) -> complex:
        return omega(self.d)

    @property
    def ops(self) -> np.ndarray:
        return self.full[1:]

    @property
    def identity(self) -> np.ndarray:
        return self.full[0]

    @property
    def indices(self) -> list[WeylIndex]:
        return canonical_indices(self.d)

    def __len__(self) -> int:
        return self.d * self.d - 1

    def __getitem__(self, idx) -> np.ndarray:
        i, j = idx
        return self.full[i * self.d + j]


@lru_cache(maxsize=None)
def _basis_cached(d: int) -> WeylBasis:
    full = np.stack([weyl_operator(d, (i, j)) for i in range(d) for j in range(d)])
    full.setflags(write=False)
    return WeylBasis(d, full)


def basis(d: int) -> WeylBasis:
    """Cached, read-only :class:`WeylBasis` for dimension ``d``."""
    return _basis_cached(_check_dim(d))


@dataclass(frozen=True)
class AlgebraReport:
    d: int
    product_rule: float
    dagger_rule: float
    orthogonality: float

    @property
    def max_deviation(self) -> float:
        return max(self.product_rule, self.dagger_rule, self.orthogonality)

    def ok(self, tol: float = 1e-12) -> bool:
        return self.max_deviation <= tol


def algebra_check(d: int) -> AlgebraReport:
    """Exhaustively measure the worst deviation from the Weyl algebra.

    Checks, over every pair of indices, the product rule
    ``A_ij A_kl = omega^(jk) A_(i+k,j+l)``, the adjoint rule
    ``A_ij^dagger = omega^(ij) A_(-i,-j)`` and trace orthogonality.
    """
    b = basis(d)
    d = b.d
    w = b.omega
    A = b.full
    prod_dev = dag_dev = orth_dev = 0.0
    for i in range(d):
        for j in range(d):
            a = A[i * d + j]
            dag = w ** (i * j) * A[((-i) % d) * d + (-j) % d]
            dag_dev = max(dag_dev, np.abs(a.conj().T - dag).max())
            for k in range(d):
                for l in range(d):
                    c = A[k * d + l]
                    rhs = w ** ((j * k) % d) * A[((i + k) % d) * d + (j + l) % d]
                    prod_dev = max(prod_dev, np.abs(a @ c - rhs).max())
                    expected = d if (i, j) == (k, l) else 0.0
                    orth_dev = max(orth_dev, abs(np.trace(a @ c.conj().T) - expected))
    return AlgebraReport(d, float(prod_dev), float(dag_dev), float(orth_dev))
