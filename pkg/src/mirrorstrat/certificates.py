"""Minimum-norm dual certificates for the noiseless problem.

Given ``phi`` and a point ``x0``, the minimum-norm certificate is

    q_bar = argmin { ||q|| : phi^T q in dR(x0) }.

Its lift ``u_bar = phi^T q_bar`` fixes a dual stratum, whose mirror image is
the largest primal stratum that noisy solutions (or solver iterates) can
visit near ``x0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .regularizers import DEFAULT_TOL, GroupL12, L1, Nuclear, Regularizer, Tolerances
from .strata import Stratum, delta_star, dim, format_stratum

__all__ = [
    "Certificate",
    "CertificateError",
    "min_norm_certificate",
    "uniqueness_check",
]

STEP_SHRINK = 0.99
CHECK_EVERY = 25
INJECTIVITY_TOL = 1e-8


class CertificateError(linalg.NumericalBreakdownError):
    """The certificate solver did not reach its residual target.

    Either ``x0`` does not solve the noiseless problem (the feasible set is
    empty) or the iteration budget is too small.
    """


@dataclass
class Certificate:
    q_bar: np.ndarray
    u_bar: np.ndarray
    primal_stratum: Stratum
    dual_stratum_of_u: Stratum
    upper_stratum: Stratum
    delta_star: int
    feasibility_residual: float
    optimality_residual: float
    solver_iterations: int
    tolerances: Tolerances = field(default=DEFAULT_TOL)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.q_bar))

    def to_record(self, unique: bool | None = None, include_q: bool = False) -> dict:
        """JSON-compatible summary; ``q_bar`` only on request."""
        rec = {
            "q_norm": self.norm,
            "primal_stratum": format_stratum(self.primal_stratum),
            "saturation": format_stratum(self.dual_stratum_of_u),
            "upper_stratum": format_stratum(self.upper_stratum),
            "r0_x0": dim(self.primal_stratum),
            "dim_upper": dim(self.upper_stratum),
            "delta_star": self.delta_star,
            "feasibility_residual": self.feasibility_residual,
            "optimality_residual": self.optimality_residual,
            "solver_iterations": self.solver_iterations,
            "primal_zero_tol": self.tolerances.primal_zero_tol,
            "dual_saturation_tol": self.tolerances.dual_saturation_tol,
            "unique": unique,
        }
        if include_q:
            rec["q_bar"] = self.q_bar.tolist()
        return rec


def min_norm_certificate(
    phi: np.ndarray,
    x0: np.ndarray,
    kind: Regularizer,
    max_iters: int = 50_000,
    tol: float = 1e-7,
    tolerances: Tolerances = DEFAULT_TOL,
) -> Certificate:
    """Least-norm ``q`` with ``phi^T q`` in the subdifferential of ``kind`` at ``x0``.

    Solves ``min_q 0.5 ||q||^2 + i_C(phi^T q)`` with ``C = dR(x0)`` by the
    Chambolle-Pock primal-dual iteration, steps ``sigma = tau = 0.99 / ||phi||``.
    Only projections onto ``C`` and products with ``phi`` are needed.

    Convergence is declared when both the feasibility residual
    ``||phi^T q - P_C(phi^T q)||`` and the optimality residual (stationarity
    ``||q + phi p||`` and consistency of the multiplier ``p`` with
    ``phi^T q``) are at most ``tol``.

    Raises
    ------
    CertificateError
        If the residuals are still above ``tol`` after ``max_iters``.
    """
    phi = np.asarray(phi, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    n_meas, n = phi.shape
    if x0.shape != (n,) or kind.size != n:
        raise ValueError("x0, phi and the regularizer disagree on the dimension")
    project = kind.subdifferential_projector(x0, tolerances)
    lip = linalg.spectral_norm_sq(phi)
    step = STEP_SHRINK / math.sqrt(lip) if lip > 0 else 1.0
    sigma = tau = step

    q = np.zeros(n_meas)
    q_bar = q
    p = np.zeros(n)
    feas = opt = math.inf
    it = 0
    while it < max_iters:
        v = p + sigma * (phi.T @ q_bar)
        anchor = project(v / sigma)
        p = v - sigma * anchor
        q_new = (q - tau * (phi @ p)) / (1.0 + tau)
        q_bar = 2.0 * q_new - q
        q = q_new
        it += 1
        if it % CHECK_EVERY == 0 or it == max_iters:
            u = phi.T @ q
            feas = float(np.linalg.norm(u - project(u)))
            opt = max(float(np.linalg.norm(q + phi @ p)), float(np.linalg.norm(u - anchor)))
            if feas <= tol and opt <= tol:
                break
    if feas > tol or opt > tol:
        raise CertificateError("minimum-norm certificate did not converge", max(feas, opt))

    u = phi.T @ q
    primal = kind.primal_stratum(x0, tolerances)
    dual = kind.dual_stratum(u, tolerances)
    upper = kind.mirror_map_conj(dual)
    return Certificate(
        q_bar=q,
        u_bar=u,
        primal_stratum=primal,
        dual_stratum_of_u=dual,
        upper_stratum=upper,
        delta_star=delta_star(primal, dual, kind),
        feasibility_residual=feas,
        optimality_residual=opt,
        solver_iterations=it,
        tolerances=tolerances,
    )


def _min_singular_value(a: np.ndarray) -> float:
    if a.shape[1] == 0:
        return math.inf
    if a.shape[1] > a.shape[0]:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[-1])


def uniqueness_check(
    phi: np.ndarray, x0: np.ndarray, cert: Certificate, kind: Regularizer, feas_tol: float = 1e-7
) -> bool:
    """Sufficient test that ``x0`` is the unique noiseless solution.

    True when the certificate is feasible and ``phi`` is injective on the
    model subspace of the saturated dual stratum: the columns on the
    saturation support (l1), the saturated blocks (group l1-l2), or the
    tangent space of rank-``i`` matrices built on the ``i`` saturated
    singular pairs of ``u_bar`` (nuclear). False means "not certified", not
    "not unique".
    """
    phi = np.asarray(phi, dtype=float)
    if cert.feasibility_residual > feas_tol:
        return False
    t = cert.tolerances.dual_saturation_tol
    u = cert.u_bar
    if isinstance(kind, L1):
        cols = np.flatnonzero(np.abs(u) >= 1.0 - t)
        sub = phi[:, cols]
    elif isinstance(kind, GroupL12):
        sat = kind.block_norms(u) >= 1.0 - t
        cols = np.flatnonzero(sat[kind._label])
        sub = phi[:, cols]
    elif isinstance(kind, Nuclear):
        n = kind.side
        uu, s, vt = np.linalg.svd(u.reshape(n, n))
        i = int((s >= 1.0 - t).sum())
        a, b = np.divmod(np.arange(n * n), n)
        keep = (a < i) | (b < i)
        # column a*n + b of kron(U, V) is vec(u_a v_b^T) in row-major order
        basis = np.kron(uu, vt.T)[:, keep]
        sub = phi @ basis
    else:
        raise TypeError(f"no uniqueness test for {type(kind).__name__}")
    return _min_singular_value(sub) > INJECTIVITY_TOL
