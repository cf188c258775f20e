# %% [markdown]
# # Four-qubit GHZ under white noise
#
# For `rho(x) = x |GHZ4><GHZ4| + (1 - x) I/16` every block matrix norm is
# linear in `x`, so thresholds are ratios of bounds to slopes.

# %%
import math

from gme_detect.criteria import CriterionParams, J2, K2, M_bound, T_score
from gme_detect.scan import FamilySpec, comparison_curves, curve, threshold
from gme_detect.states import Bipartition, named_state, white_noise_mix

psi = named_state("ghz", n=4)
family = FamilySpec(psi)
p = CriterionParams(alpha=1, beta=1)

# %%
T1, detail = T_score(white_noise_mix(psi, 1.0), p)
for bip, v in detail:
    print(f"{str(bip):>6}  {v:.4f}  bound {M_bound(bip, psi.dims, p).value:.4f}")
print("K2 =", K2(psi.dims, p).value, " J2 =", J2(2, 4, p))

# %% [markdown]
# Single bipartition `1|234`: `F1(x) = (4 + sqrt 2) x - 3`.

# %%
one = [Bipartition((1,), (2, 3, 4))]
print(threshold(family, p, bipartitions=one).threshold, 3 / (4 + math.sqrt(2)))
rows = curve(family, p, 11, one)
xs = [r["x"] for r in rows]
others = comparison_curves(xs)
for r, g1, g2 in zip(rows, others["G1"], others["G2"]):
    print(f"{r['x']:.1f}  F1={r['F']:+.4f}  G1={g1:+.4f}  G2={g2:+.4f}")

# %% [markdown]
# All bipartitions: `F2(x) = 5x - sqrt(3)(1 + sqrt(3))`.

# %%
print(threshold(family, p).threshold)
