"""Fraction of sparse vectors whose certificate predicts exact or near-exact
identification, as a function of sparsity.

``rho(r0, delta)`` counts noiseless instances that are certified unique and
whose certificate excess ``delta_star`` is at most ``delta``. A small grid
keeps this under a minute; the CLI runs the full grid::

    mirrorstrat experiment transition --out-dir results/
"""

# %%
from mirrorstrat import ExperimentConfig, run_phase_transition, write_outputs

cfg = ExperimentConfig.l1_default(trials=20)
res = run_phase_transition(cfg, r0_grid=[1, 5, 10, 15, 20], delta_grid=[0, 2, 5, 10])
write_outputs(res, "demos/out/phase")

# %%
print("r0  " + "  ".join(f"d={d:<2}" for d in (0, 2, 5, 10)))
for r0 in (1, 5, 10, 15, 20):
    row = [rho for r, _, rho, _, _ in res.rho if r == r0]
    print(f"{r0:<3} " + "  ".join(f"{v:.2f}" for v in row))
