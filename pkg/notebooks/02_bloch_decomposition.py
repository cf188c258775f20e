# %% [markdown]
# # Correlation tensors
#
# `decompose` expands a state in tensor products of Weyl operators and groups
# the coefficients by the set of parties they act on.

# %%
import numpy as np

from gme_detect import states
from gme_detect.bloch import decompose, reconstruct, sector_norms, subset_norm_sq
from gme_detect.criteria import m_bound, n_bound

# %% [markdown]
# A Bell pair has no single-party structure; all weight sits in the
# two-party tensor, which reaches the two-qubit maximum of 3.

# %%
bell = states.from_ket(states.named_state("ghz", n=2))
t = decompose(bell)
print([subset_norm_sq(t, s) for s in ([1], [2], [1, 2])], m_bound(2, 2))

# %% [markdown]
# Purity is the sum of sector norms: `tr(rho^2) = (1 + A_1 + ... + A_n) / D`.

# %%
rho = states.random_mixed((3, 3, 2), rank=3, seed=1)
t = decompose(rho)
A = sector_norms(t)
print(A, rho.purity(), (1 + A.sum()) / rho.D)

# %% [markdown]
# The expansion is invertible.

# %%
print(np.abs(reconstruct(t).matrix - rho.matrix).max())

# %% [markdown]
# Random pure states stay below the full-correlation bound.

# %%
nb = n_bound((2, 2, 3)).value
worst = max(subset_norm_sq(decompose(states.random_pure((2, 2, 3), s)), [1, 2, 3]) for s in range(500))
print(f"max ||T^(123)||^2 = {worst:.3f} <= {nb:.3f}")
