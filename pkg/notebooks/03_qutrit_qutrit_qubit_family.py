# %% [markdown]
# # A 3 x 3 x 2 state under white noise
#
# `rho(x) = x |phi><phi| + (1 - x) I/18` with
# `|phi> = [(|10> + |21>)|0> + (|00> + |11> + |22>)|1>] / sqrt(5)`.
# The tripartite test flags `rho(x)` once `T(rho(x)) > K1`.

# %%
from gme_detect.criteria import CriterionParams, K1, T_score, gme_verdict
from gme_detect.scan import COMPARISON_RANGES_332, FamilySpec, table
from gme_detect.states import named_state, white_noise_mix

phi = named_state("paper_332")
family = FamilySpec(phi)

# %%
p = CriterionParams(alpha=0, beta=0, gamma=1)
T1, detail = T_score(white_noise_mix(phi, 1.0), p)
for bip, v in detail:
    print(bip, round(v, 4))
print("K1 =", K1(phi.dims, p), " threshold =", K1(phi.dims, p) / T1)

# %% [markdown]
# Threshold for several weightings, next to the reported values of an
# earlier matrix-method criterion.

# %%
rows = [CriterionParams(0.5, 0, 1), CriterionParams(1 / 3, 0, 2), CriterionParams(0, 0, 1)]
for r in table(family, rows):
    key = (r.params.alpha, r.params.beta, r.params.gamma)
    print(f"alpha={key[0]:.3g} gamma={key[2]:g}: ours {r.threshold:.4f}, earlier {COMPARISON_RANGES_332[key]}")

# %%
print(gme_verdict(white_noise_mix(phi, 0.52), p).detected)
