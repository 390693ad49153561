"""Complexity excess of lasso solutions.

For each trial a sparse ``x0`` is observed through a Gaussian matrix with
additive noise, the lasso is solved to high accuracy and the number of
nonzeros of the solution is compared with that of ``x0``. The minimum-norm
certificate of ``x0`` gives an upper bound ``delta_star`` on this excess,
valid once the noise is small compared with ``lam``.

Run from the repository root; outputs go to ``demos/out/``.
"""

# %%
from collections import Counter

from mirrorstrat import ExperimentConfig, run_histogram, write_outputs

# %% Default configuration: N = 100, P = 50, 10 spikes, noise 0.1, lam = 0.28.
res = run_histogram(ExperimentConfig.l1_default(trials=50))
write_outputs(res, "demos/out/hist_default")
print("delta histogram:", res.histogram)
rel = Counter(r.delta <= r.delta_star for r in res.valid_records if r.delta_star is not None)
print("delta <= delta_star:", rel[True], "of", sum(rel.values()))

# %% The noise here is large relative to lam (||w|| / lam is about 2.5), so
# solutions are much denser than the certificate predicts. Shrinking the
# noise puts the experiment in the regime where the bound applies.
res = run_histogram(ExperimentConfig.l1_default(trials=50, noise_std=1e-6, lam=0.1))
write_outputs(res, "demos/out/hist_small_noise")
print("delta histogram:", res.histogram)
ok = sum(1 for r in res.valid_records if r.sandwich)
print("sandwich holds in", ok, "of", len(res.valid_records), "trials")
