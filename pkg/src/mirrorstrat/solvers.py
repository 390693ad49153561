"""Forward-Backward and Douglas-Rachford solvers with stratum tracking.

Both solvers minimize

    E(x) = R(x) + ||y - phi @ x||^2 / (2 * lam)

and record, at every iteration, the objective, the complexity index and the
primal stratum of the current iterate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import linalg
from .regularizers import DEFAULT_TOL, Regularizer, Tolerances
from .strata import Stratum, format_stratum

__all__ = [
    "ProblemInstance",
    "SolverParams",
    "IterRecord",
    "SolverTrace",
    "SolverBudgetError",
    "objective",
    "dual_objective",
    "duality_gap",
    "fb_params",
    "dr_params",
    "fb_solve",
    "dr_solve",
    "reference_solve",
    "reference_trace",
]

FB_STEP_FACTOR = 1.8


class SolverBudgetError(linalg.NumericalBreakdownError):
    """Iteration budget exhausted before reaching the requested residual."""

    def __init__(self, message: str, residual: float, x: np.ndarray):
        super().__init__(message, residual)
        self.x = x


@dataclass
class ProblemInstance:
    """Regularized least squares ``min_x R(x) + ||y - phi x||^2 / (2 lam)``.

    The optional ground truth satisfies ``y0 = phi @ x0`` and ``y = y0 + w``.
    """

    phi: np.ndarray
    y: np.ndarray
    lam: float
    regularizer: Regularizer
    x0: Optional[np.ndarray] = None
    y0: Optional[np.ndarray] = None
    w: Optional[np.ndarray] = None
    _gram: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _lipschitz: Optional[float] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.phi.ndim != 2 or self.y.shape != (self.phi.shape[0],):
            raise ValueError("phi must be P x N and y of length P")
        if self.phi.shape[1] != self.regularizer.size:
            raise ValueError("phi columns do not match the regularizer dimension")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.x0 is not None:
            y0 = self.phi @ self.x0 if self.y0 is None else self.y0
            w = self.y - y0 if self.w is None else self.w
            scale = max(1.0, float(np.abs(self.y).max()))
            if np.abs(self.phi @ self.x0 - y0).max() > 1e-12 * scale * self.phi.shape[1]:
                raise ValueError("ground truth violates y0 = phi @ x0")
            if np.abs(y0 + w - self.y).max() > 1e-12 * scale:
                raise ValueError("ground truth violates y = y0 + w")
            self.y0, self.w = y0, w

    @property
    def shape(self) -> tuple[int, int]:
        return self.phi.shape

    @property
    def gram(self) -> np.ndarray:
        if self._gram is None:
            self._gram = self.phi.T @ self.phi
        return self._gram

    @property
    def lipschitz(self) -> float:
        """Largest eigenvalue of ``phi.T @ phi``."""
        if self._lipschitz is None:
            self._lipschitz = linalg.spectral_norm_sq(self.phi)
        return self._lipschitz


@dataclass(frozen=True)
class SolverParams:
    gamma: float
    tau: float = 1.0
    max_iters: int = 10_000
    stop_tol: float = 1e-9

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.stop_tol >= 0:
            raise ValueError("stop_tol must be nonnegative")


@dataclass(frozen=True)
class IterRecord:
    """State after ``k`` iterations.

    ``residual`` is the fixed-point residual of the step that produced
    iterate ``k`` (``nan`` for the starting point).
    """

    k: int
    objective: float
    r0: int
    stratum: Stratum
    residual: float


@dataclass
class SolverTrace:
    records: list[IterRecord]
    x: np.ndarray
    converged: bool
    iterations: int
    residual: float
    aux: dict = field(default_factory=dict)

    @property
    def r0_path(self) -> np.ndarray:
        return np.array([r.r0 for r in self.records], dtype=int)

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual for r in self.records])

    def to_csv(self, path) -> None:
        """Write ``k, objective, r0, stratum, residual`` rows."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["k", "objective", "r0", "stratum", "residual"])
            for r in self.records:
                writer.writerow([r.k, repr(r.objective), r.r0, format_stratum(r.stratum), repr(r.residual)])


Hook = Callable[[IterRecord], None]


def objective(problem: ProblemInstance, x: np.ndarray) -> float:
    """``R(x) + ||y - phi x||^2 / (2 lam)``."""
    x = np.asarray(x, dtype=float)
    r = problem.y - problem.phi @ x
    return problem.regularizer.eval(x) + float(r @ r) / (2.0 * problem.lam)


def dual_objective(problem: ProblemInstance, q: np.ndarray) -> float:
    """``<q, y> - lam/2 ||q||^2 - R*(phi^T q)``."""
    return float(q @ problem.y) - 0.5 * problem.lam * float(q @ q) - problem.regularizer.conjugate(problem.phi.T @ q)


def duality_gap(problem: ProblemInstance, x: np.ndarray) -> float:
    """Primal-dual gap at ``x`` with the dual point ``(y - phi x) / lam``.

    The dual point is shrunk just enough to enter ``dom R*`` so the gap is
    always finite for the norm regularizers.
    """
    q = (problem.y - problem.phi @ x) / problem.lam
    q = q / problem.regularizer.dual_scale(problem.phi.T @ q)
    return objective(problem, x) - dual_objective(problem, q)


def fb_params(problem: ProblemInstance, **kw) -> SolverParams:
    """Default FB parameters: ``gamma = 1.8 lam / sigma_max(phi^T phi)``."""
    kw.setdefault("gamma", FB_STEP_FACTOR * problem.lam / problem.lipschitz)
    return SolverParams(**kw)


def dr_params(problem: ProblemInstance, **kw) -> SolverParams:
    """Default DR parameters: ``gamma = lam / sigma_max(phi^T phi)``."""
    kw.setdefault("gamma", problem.lam / problem.lipschitz)
    return SolverParams(**kw)


def _record(problem, k, x, residual, tol) -> IterRecord:
    reg = problem.regularizer
    return IterRecord(k, objective(problem, x), reg.complexity_index(x, tol), reg.primal_stratum(x, tol), residual)


def fb_solve(
    problem: ProblemInstance,
    params: SolverParams | None = None,
    hook: Hook | None = None,
    x_init: np.ndarray | None = None,
    record: bool = True,
    tol: Tolerances = DEFAULT_TOL,
) -> SolverTrace:
    """Relaxed Forward-Backward iteration.

    ``x+ = (1 - tau) x + tau * prox_{gamma R}(x - gamma * grad f(x))`` with
    ``grad f(x) = phi^T (phi x - y) / lam``. The iteration stops once the
    fixed-point residual ``||x - prox_{gamma R}(x - gamma grad f(x))||`` is
    at most ``params.stop_tol``.

    Raises
    ------
    ValueError
        If ``gamma`` is not in ``(0, 2 lam / L)`` or ``tau`` not in ``(0, 1]``.
    """
    params = params or fb_params(problem)
    lam, reg = problem.lam, problem.regularizer
    bound = 2.0 * lam / problem.lipschitz
    if not 0 < params.gamma < bound:
        raise ValueError(f"FB step gamma={params.gamma:.6g} outside (0, {bound:.6g})")
    if not 0 < params.tau <= 1:
        raise ValueError(f"FB relaxation tau={params.tau} outside (0, 1]")

    gram = problem.gram
    b = problem.phi.T @ problem.y
    gamma, tau = params.gamma, params.tau
    step = gamma / lam
    x = np.zeros(reg.size) if x_init is None else np.array(x_init, dtype=float)

    records: list[IterRecord] = []
    if record:
        records.append(_record(problem, 0, x, math.nan, tol))
        if hook is not None:
            hook(records[-1])
    residual = math.inf
    converged = False
    k = 0
    while k < params.max_iters:
        p = reg.prox(x - step * (gram @ x - b), gamma)
        residual = float(np.linalg.norm(p - x))
        x = p if tau == 1.0 else (1.0 - tau) * x + tau * p
        k += 1
        if record:
            records.append(_record(problem, k, x, residual, tol))
            if hook is not None:
                hook(records[-1])
        if residual <= params.stop_tol:
            converged = True
            break
    return SolverTrace(records, x, converged, k, residual)


def dr_solve(
    problem: ProblemInstance,
    params: SolverParams | None = None,
    hook: Hook | None = None,
    order: str = "fg",
    record: bool = True,
    tol: Tolerances = DEFAULT_TOL,
) -> SolverTrace:
    """Douglas-Rachford splitting with ``f`` the data term and ``g = R``.

    With ``order="fg"``::

        v+ = prox_{gamma f}(2 x - z)
        z+ = z + tau (v+ - x)
        x+ = prox_{gamma g}(z+)

    ``order="gf"`` swaps the roles of ``f`` and ``g``. Either way the traced
    iterate is the output of ``prox_{gamma R}``, so it is the one whose
    stratum is meaningful. ``prox_{gamma f}`` solves
    ``(I + gamma/lam phi^T phi) v = a + gamma/lam phi^T y`` with a Cholesky
    factor computed once. Stops when ``||z+ - z|| / tau <= stop_tol``; the
    final ``z`` and ``x`` are returned in ``trace.aux``.
    """
    params = params or dr_params(problem)
    if not 0 < params.tau < 2:
        raise ValueError(f"DR relaxation tau={params.tau} outside (0, 2)")
    if order not in ("fg", "gf"):
        raise ValueError("order must be 'fg' or 'gf'")
    reg = problem.regularizer
    gamma, tau = params.gamma, params.tau
    c = gamma / problem.lam
    factor = linalg.CholeskyFactor(np.eye(reg.size) + c * problem.gram)
    rhs0 = c * (problem.phi.T @ problem.y)

    def prox_f(a):
        return factor.solve(a + rhs0)

    def prox_g(a):
        return reg.prox(a, gamma)

    first, second = (prox_f, prox_g) if order == "fg" else (prox_g, prox_f)

    z = np.zeros(reg.size)
    x = second(z)
    v = x
    tracked = x if order == "fg" else v

    records: list[IterRecord] = []
    if record:
        records.append(_record(problem, 0, tracked, math.nan, tol))
        if hook is not None:
            hook(records[-1])
    residual = math.inf
    converged = False
    k = 0
    while k < params.max_iters:
        v = first(2.0 * x - z)
        dz = tau * (v - x)
        z = z + dz
        x = second(z)
        residual = float(np.linalg.norm(dz)) / tau
        k += 1
        tracked = x if order == "fg" else v
        if record:
            records.append(_record(problem, k, tracked, residual, tol))
            if hook is not None:
                hook(records[-1])
        if residual <= params.stop_tol:
            converged = True
            break
    return SolverTrace(records, tracked, converged, k, residual, aux={"z": z, "x": x, "v": v, "gamma": gamma})


def reference_trace(problem: ProblemInstance, tol: float = 1e-10, max_iters: int = 500_000) -> SolverTrace:
    """Run the reference FB solve and return its (unrecorded) trace.

    Same contract as :func:`reference_solve`; the trace also carries the
    iteration count.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    params = fb_params(problem, tau=1.0, max_iters=max_iters, stop_tol=tol)
    trace = fb_solve(problem, params, record=False)
    if not trace.converged:
        raise SolverBudgetError("reference solve hit its iteration cap", trace.residual, trace.x)
    return trace


def reference_solve(problem: ProblemInstance, tol: float = 1e-10, max_iters: int = 500_000) -> np.ndarray:
    """High-accuracy minimizer: unrelaxed FB until the residual is ``<= tol``.

    Raises
    ------
    SolverBudgetError
        With the achieved residual and last iterate if the cap is hit.
    """
    return reference_trace(problem, tol, max_iters).x
