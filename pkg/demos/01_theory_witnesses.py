# %% [markdown]
# # Why minority classes get washed out
#
# A two-block SBM with a big majority block and a small minority block.
# We look at the 2x2 class propagation matrix, how fast the gap between class
# centroids shrinks with depth, and how much a path toward the minority is worth.

# %%
import numpy as np

from structbal import theory
from structbal.sbm import SBMConfig, degree_disparity, expected_degrees

p, q, beta = 0.5, 0.1, 10.0
m = theory.propagation_matrix(p, q, beta)
print(np.round(m, 3))

# %%
# One eigenvalue is exactly 1; the second one sets the decay speed.
lam1, lam2 = theory.dominant_eigenvalue(m), theory.second_eigenvalue(m)
print(f"lambda1={lam1:.6f} lambda2={lam2:.5f}")

# %%
# Transient part of the centroid gap, layer by layer.
curve = theory.centroid_decay_curve(m, 1.0, [1.0, 0.0], 12)
for layer, v in enumerate(curve):
    print(f"layer {layer:2d}  gap {v:.3e}")
print("fitted rate over layers 5-12:", round(theory.fit_geometric_rate(curve, 5, 12), 5))

# %%
# Degree disparity in the sampled regime and what a length-L path is worth.
cfg = SBMConfig(1000, 100, p, q)
print("expected degrees (minority, majority):", expected_degrees(cfg))
tau = degree_disparity(cfg)
for L in (1, 2, 4, 8):
    print(L, theory.path_weight_factor(beta, tau, L), theory.path_weight_binomial(beta, tau, L))

# %%
# Monte Carlo: minority gradient contribution relative to majority ~ 1/beta.
for b in (2, 5, 10):
    print(b, round(theory.monte_carlo_gradient_ratio(b, trials=20), 4), 1 / b)

# %%
# Over-squashing on trees: root-to-leaf entry of A_hat^(r+1).
for b in (2, 3):
    print(b, np.array2string(theory.jacobian_decay_check(b, 5), precision=4))
