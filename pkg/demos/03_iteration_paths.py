"""Complexity of forward-backward iterates.

Records ``R0(x_k)`` along the iterations. The iterates start dense, then
settle on a stratum between that of ``x0`` and the certificate's upper
stratum. ``paths.svg`` overlays both bounds for the first trials.
"""

# %%
from mirrorstrat import ExperimentConfig, run_iteration_path, write_outputs

cfg = ExperimentConfig.l1_default(trials=4, noise_std=1e-6, lam=0.1, path_iters=2000)
res = run_iteration_path(cfg)
write_outputs(res, "demos/out/paths")

# %%
for rec in res.records:
    path = [r0 for _, r0, _ in res.paths[rec.trial]]
    print(f"trial {rec.trial}: R0 first {path[:5]} ... last {path[-1]}; "
          f"bounds [{rec.r0_x0}, {rec.dim_upper}] after {len(path) - 1} iterations")

# %% Douglas-Rachford with its default step moves more slowly here; after
# 2000 steps it is still far from the plateau, after 10000 it has settled.
res = run_iteration_path(cfg.replace(solver="dr", trials=2), iterations=10_000)
for rec in res.records:
    print(f"DR trial {rec.trial}: final R0 {res.paths[rec.trial][-1][1]}, bounds [{rec.r0_x0}, {rec.dim_upper}]")
