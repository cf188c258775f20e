# %% [markdown]
# # Weyl operators
#
# The basis behind every correlation tensor in `gme_detect`. For a qudit of
# dimension `d` there are `d^2 - 1` nonidentity operators `A_ij`; for `d = 2`
# they are X, Z and XZ.

# %%
import numpy as np

from gme_detect.weyl import algebra_check, basis, index_labels, weyl_operator

np.set_printoptions(precision=3, suppress=True)

# %%
for label, op in zip(index_labels(2), basis(2).ops):
    print(label)
    print(op.real)

# %% [markdown]
# Qutrit operators carry cube roots of unity as phases.

# %%
print(index_labels(3))
print(weyl_operator(3, (1, 1)))

# %% [markdown]
# The algebra holds to machine precision for every dimension we use.

# %%
for d in range(2, 8):
    rep = algebra_check(d)
    print(d, f"{rep.max_deviation:.1e}")
