"""Genuine multipartite entanglement tests from Weyl-basis correlation tensors."""

from .bloch import BlochTensor, decompose, reconstruct, sector_norms, subset_norm_sq
from .criteria import (
    K1,
    K2,
    J2,
    CriterionParams,
    CriterionReport,
    M_bound,
    T_score,
    gme_verdict,
    m_bound,
    n_bound,
    trace_norm,
)
from .states import (
    Bipartition,
    DensityMatrix,
    KetExpression,
    PartySystem,
    from_ket,
    named_state,
    partial_trace,
    white_noise_mix,
)
from .weyl import WeylBasis, basis, weyl_operator

__version__ = "0.1.0"
