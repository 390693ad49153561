"""Low-rank recovery with the nuclear norm.

A rank-4 20 x 20 matrix with unit singular values is observed through 300
Gaussian measurements. The rank of the regularized solution is compared
with the certificate bound ``4 + delta_star``.
"""

# %%
from mirrorstrat import ExperimentConfig, run_histogram

for label, changes in [("default noise", {}), ("small noise", dict(noise_std=1e-5, lam=0.5))]:
    res = run_histogram(ExperimentConfig.nuclear_default(trials=5, **changes))
    for r in res.valid_records:
        print(f"{label}: rank {r.r0_xhat}, bound {r.dim_upper}, sandwich {r.sandwich}")
