"""Strata of projections onto the unit box.

The projection of ``p`` onto ``[-1, 1]^d`` is ``clip(p)``. Its stratum is
the face of the box it lands on. Near a point whose residual ``p - clip(p)``
sits on the boundary of the normal cone, nearby projections can land on
two faces; the certificate-based sandwich predicts which ones.
"""

# %%
import numpy as np

from mirrorstrat import LInfBall, projection_demo

box = LInfBall(2)
p0 = np.array([2.0, 1.0])
x0 = box.prox(p0, 1.0)
print("x_hat(p0) =", x0, " residual u =", p0 - x0)

# %% Degenerate center: the second coordinate is exactly on the boundary.
rep = projection_demo(p0, perturbation_radius=0.2, samples=1000, seed=0)
print("lower stratum:", rep.lower, " upper stratum:", rep.upper)
print("observed strata:", rep.strata_counts, " sandwich pass rate:", rep.sandwich_pass_rate)

# %% Non-degenerate center: one face only.
rep = projection_demo([2.0, 0.5], perturbation_radius=0.2, samples=1000, seed=0)
print("observed strata:", rep.strata_counts)

# %% Strictly inside the box the projection is the identity.
rep = projection_demo([0.1, -0.4], perturbation_radius=0.1, samples=200, seed=0)
print("observed strata:", rep.strata_counts)
