"""Random instance generation and the Monte Carlo experiments.

Three experiments share one configuration type:

* ``run_histogram``: distribution of the complexity excess
  ``delta = R0(x_hat) - R0(x0)`` of high-accuracy solutions, with the
  certificate bound ``delta_star`` and a sandwich verdict per trial.
* ``run_iteration_path``: complexity index of solver iterates ``R0(x_k)``.
* ``run_phase_transition``: fraction ``rho(r0, delta)`` of noiseless
  instances that are certified unique with ``delta_star <= delta``.

``projection_demo`` is a standalone 2-D (or n-D) illustration with the
indicator of the l-infinity ball.

Seeding
-------
Trial ``t`` of a run with master seed ``m`` uses the 64-bit seed
``SeedSequence([m, t]).generate_state(1, uint64)[0]`` (``[m, r0, t]`` in the
phase-transition sweep). From that seed, three independent sub-seeds drive
``phi``, ``x0`` and ``w``. Trials therefore never share generator state and
can run in any order or in parallel.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__, linalg
from .certificates import CertificateError, min_norm_certificate, uniqueness_check
from .regularizers import GroupL12, L1, LInfBall, Nuclear, Regularizer, Tolerances
from .solvers import (
    ProblemInstance,
    SolverBudgetError,
    dr_params,
    dr_solve,
    fb_params,
    fb_solve,
    reference_trace,
)
from .strata import format_stratum, sandwich_holds
from . import svg

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "TrialRecord",
    "ExperimentResult",
    "ProjectionReport",
    "LAMBDA_FLOOR",
    "trial_seed",
    "gen_instance",
    "lambda_select",
    "solver_params",
    "run_histogram",
    "run_iteration_path",
    "run_phase_transition",
    "projection_demo",
    "write_outputs",
]

LAMBDA_FLOOR = 1e-6
DEFAULT_N = 100
REGULARIZERS = ("l1", "group", "nuclear")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of an experiment run.

    Dimensions: ``n`` is the ambient dimension (default 100; for
    ``nuclear`` it is ``side**2`` and may be omitted), ``p`` the number of
    measurements.
    ``r0_target`` counts nonzeros (l1), active blocks (group) or the rank
    (nuclear). ``lambda_rule`` is ``"fixed"`` (use ``lam``) or
    ``"proportional"`` (``c0 * ||w||``). ``step_factor`` scales the default
    step ``lam / ||phi||^2``; ``None`` means 1.8 for FB and 1.0 for DR.
    """

    regularizer: str = "l1"
    n: Optional[int] = None
    p: int = 50
    side: int = 20
    block_size: int = 4
    r0_target: int = 10
    noise_std: float = 0.1
    lambda_rule: str = "fixed"
    lam: float = 0.28
    c0: float = 0.4
    trials: int = 200
    master_seed: int = 0
    solver: str = "fb"
    step_factor: Optional[float] = None
    tau: float = 1.0
    max_iters: int = 10_000
    stop_tol: float = 1e-9
    path_iters: int = 2000
    reference_tol: float = 1e-10
    reference_max_iters: int = 500_000
    cert_max_iters: int = 50_000
    cert_tol: float = 1e-7
    primal_zero_tol: float = 1e-8
    dual_saturation_tol: float = 1e-6
    r0_grid: Optional[tuple[int, ...]] = None
    delta_grid: Optional[tuple[int, ...]] = None
    workers: int = 1

    def __post_init__(self):
        if self.regularizer not in REGULARIZERS:
            raise ConfigError(f"regularizer must be one of {REGULARIZERS}, got {self.regularizer!r}")
        if self.regularizer == "nuclear":
            if self.side < 1:
                raise ConfigError("side must be positive")
            if self.n is None:
                object.__setattr__(self, "n", self.side * self.side)
            elif self.n != self.side * self.side:
                raise ConfigError(f"nuclear needs n = side**2 = {self.side ** 2}, got {self.n}")
        elif self.n is None:
            object.__setattr__(self, "n", DEFAULT_N)
        if self.n is None or self.n < 1 or self.p < 1:
            raise ConfigError("n and p must be positive")
        if self.regularizer == "group":
            if self.block_size < 1 or self.n % self.block_size:
                raise ConfigError(f"block_size {self.block_size} must divide n = {self.n}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.noise_std >= 0:
            raise ConfigError("noise_std must be nonnegative")
        if not 0 <= self.r0_target <= self.r0_max:
            raise ConfigError(f"r0_target {self.r0_target} outside [0, {self.r0_max}] for {self.regularizer}")
        if self.lambda_rule not in ("fixed", "proportional"):
            raise ConfigError("lambda_rule must be 'fixed' or 'proportional'")
        if self.lambda_rule == "fixed" and not self.lam > 0:
            raise ConfigError("lam must be positive")
        if self.lambda_rule == "proportional" and not self.c0 > 0:
            raise ConfigError("c0 must be positive")
        if self.solver not in ("fb", "dr"):
            raise ConfigError("solver must be 'fb' or 'dr'")
        if self.step_factor is not None and not self.step_factor > 0:
            raise ConfigError("step_factor must be positive")
        for name in ("max_iters", "path_iters", "reference_max_iters", "cert_max_iters", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        for name in ("stop_tol", "reference_tol", "cert_tol"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be nonnegative")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        try:
            self.tolerances
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for name in ("r0_grid", "delta_grid"):
            grid = getattr(self, name)
            if grid is not None:
                object.__setattr__(self, name, tuple(int(v) for v in grid))

    @property
    def r0_max(self) -> int:
        if self.regularizer == "nuclear":
            return self.side
        if self.regularizer == "group":
            return self.n // self.block_size
        return self.n

    @property
    def tolerances(self) -> Tolerances:
        return Tolerances(self.primal_zero_tol, self.dual_saturation_tol)

    def build_regularizer(self) -> Regularizer:
        if self.regularizer == "l1":
            return L1(self.n)
        if self.regularizer == "group":
            return GroupL12.uniform(self.n // self.block_size, self.block_size)
        return Nuclear(self.side)

    def default_r0_grid(self) -> tuple[int, ...]:
        """Sparsities 1, 5, 10, ... up to ``p`` (l1, group); ranks ``1..side`` (nuclear)."""
        if self.regularizer == "nuclear":
            return tuple(range(1, self.side + 1))
        top = min(self.p, self.r0_max)
        return tuple(sorted({1, *range(5, top + 1, 5)}))

    def default_delta_grid(self) -> tuple[int, ...]:
        return tuple(range(0, 11))

    def replace(self, **changes) -> "ExperimentConfig":
        if self.regularizer == "nuclear" and "side" in changes and "n" not in changes:
            changes["n"] = None
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        for k in ("r0_grid", "delta_grid"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(data)

    @classmethod
    def l1_default(cls, **kw) -> "ExperimentConfig":
        """Sparse recovery at (N, P) = (100, 50), 10 unit spikes, noise 0.1, lam 0.28."""
        return cls(**kw)

    @classmethod
    def nuclear_default(cls, **kw) -> "ExperimentConfig":
        """Rank-4 recovery of 20 x 20 matrices from 300 measurements, noise 0.1, lam 10."""
        base = dict(regularizer="nuclear", p=300, side=20, r0_target=4, lam=10.0)
        base.update(kw)
        return cls(**base)


@dataclass
class TrialRecord:
    """Outcome of one trial. Strata are stored in their text form."""

    trial: int
    seed: int
    lam: float
    valid: bool
    r0_x0: int
    r0_xhat: Optional[int] = None
    delta: Optional[int] = None
    delta_star: Optional[int] = None
    unique: Optional[bool] = None
    sandwich: Optional[bool] = None
    iterations: Optional[int] = None
    x0_stratum: str = ""
    xhat_stratum: str = ""
    upper_stratum: str = ""
    error: str = ""

    @property
    def dim_upper(self) -> Optional[int]:
        return None if self.delta_star is None else self.r0_x0 + self.delta_star


@dataclass
class ExperimentResult:
    kind: str
    config: ExperimentConfig
    records: list[TrialRecord]
    histogram: dict[int, int] = field(default_factory=dict)
    paths: dict[int, list[tuple[int, int, str]]] = field(default_factory=dict)
    rho: list[tuple[int, int, float, int, int]] = field(default_factory=list)

    @property
    def valid_records(self) -> list[TrialRecord]:
        return [r for r in self.records if r.valid]


@dataclass
class ProjectionReport:
    p0: np.ndarray
    x_hat0: np.ndarray
    u_hat0: np.ndarray
    lower: str
    upper: str
    strata_counts: dict[str, int]
    sandwich_pass_rate: float
    samples: int

    @property
    def n_strata(self) -> int:
        return len(self.strata_counts)

    def to_record(self) -> dict:
        return {
            "p0": self.p0.tolist(),
            "x_hat0": self.x_hat0.tolist(),
            "u_hat0": self.u_hat0.tolist(),
            "lower": self.lower,
            "upper": self.upper,
            "strata_counts": self.strata_counts,
            "n_strata": self.n_strata,
            "sandwich_pass_rate": self.sandwich_pass_rate,
            "samples": self.samples,
        }


def trial_seed(master_seed: int, trial: int, *extra: int) -> int:
    """64-bit seed of one trial, derived from the master seed by ``SeedSequence``."""
    ss = np.random.SeedSequence([int(master_seed), *(int(e) for e in extra), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0])


def lambda_select(config: ExperimentConfig, w: np.ndarray) -> float:
    """Regularization parameter for one instance.

    ``fixed`` returns ``config.lam``. ``proportional`` returns
    ``config.c0 * ||w||``, or :data:`LAMBDA_FLOOR` when ``w`` vanishes.
    """
    if config.lambda_rule == "fixed":
        return float(config.lam)
    value = config.c0 * float(np.linalg.norm(w))
    return value if value > 0 else LAMBDA_FLOOR


def _ground_truth(config: ExperimentConfig, seed: int) -> np.ndarray:
    r, n = config.r0_target, config.n
    x0 = np.zeros(n)
    if r == 0:
        return x0
    rng = linalg.rng_from_seed(seed)
    if config.regularizer == "l1":
        support = rng.choice(n, size=r, replace=False)
        x0[support] = rng.choice([-1.0, 1.0], size=r)
        return x0
    if config.regularizer == "group":
        reg = config.build_regularizer()
        for b in rng.choice(reg.n_blocks, size=r, replace=False):
            idx = np.asarray(reg.blocks[b])
            v = rng.standard_normal(len(idx))
            x0[idx] = v / np.linalg.norm(v)
        return x0
    side = config.side
    sa, sb = (int(s) for s in np.random.SeedSequence(seed).generate_state(2, np.uint64))
    a = linalg.gaussian_matrix(side, r, sa)
    b = linalg.gaussian_matrix(side, r, sb)
    f = linalg.svd(a @ b.T)
    return (f.u[:, :r] @ f.vt[:r]).ravel()


def gen_instance(config: ExperimentConfig, seed: int, noiseless: bool = False) -> ProblemInstance:
    """Draw ``(phi, x0, w)`` from ``seed`` and assemble ``y = phi x0 + w``.

    ``phi`` has i.i.d. standard normal entries. ``x0`` has ``r0_target``
    active components: random support with random signs (l1), random
    blocks with unit-norm contents (group), or a product of two Gaussian
    ``side x r`` factors with its singular values reset to one (nuclear).
    ``w`` has i.i.d. entries of standard deviation ``noise_std`` (zero when
    ``noiseless`` is set).
    """
    s_phi, s_x, s_w = (int(s) for s in np.random.SeedSequence(int(seed)).generate_state(3, np.uint64))
    phi = linalg.gaussian_matrix(config.p, config.n, s_phi)
    x0 = _ground_truth(config, s_x)
    y0 = phi @ x0
    if noiseless or config.noise_std == 0:
        w = np.zeros(config.p)
    else:
        w = config.noise_std * linalg.gaussian_matrix(config.p, 1, s_w)[:, 0]
    lam = lambda_select(config, w)
    return ProblemInstance(phi, y0 + w, lam, config.build_regularizer(), x0=x0, y0=y0, w=w)


def _certify(config: ExperimentConfig, inst: ProblemInstance):
    """Certificate and uniqueness verdict; ``(None, False, message)`` on failure."""
    try:
        cert = min_norm_certificate(
            inst.phi, inst.x0, inst.regularizer, config.cert_max_iters, config.cert_tol, config.tolerances
        )
    except CertificateError as exc:
        return None, False, str(exc)
    return cert, uniqueness_check(inst.phi, inst.x0, cert, inst.regularizer), ""


def _base_record(config: ExperimentConfig, trial: int, seed: int, inst: ProblemInstance) -> TrialRecord:
    reg, tol = inst.regularizer, config.tolerances
    return TrialRecord(
        trial=trial,
        seed=seed,
        lam=inst.lam,
        valid=True,
        r0_x0=reg.complexity_index(inst.x0, tol),
        x0_stratum=format_stratum(reg.primal_stratum(inst.x0, tol)),
    )


def _fill_solution(config, rec: TrialRecord, inst: ProblemInstance, x_hat: np.ndarray, cert) -> None:
    reg, tol = inst.regularizer, config.tolerances
    s_hat = reg.primal_stratum(x_hat, tol)
    rec.r0_xhat = reg.complexity_index(x_hat, tol)
    rec.delta = rec.r0_xhat - rec.r0_x0
    rec.xhat_stratum = format_stratum(s_hat)
    if cert is not None:
        rec.sandwich = sandwich_holds(cert.primal_stratum, s_hat, cert.upper_stratum)


def _attach_certificate(rec: TrialRecord, cert, unique: bool, err: str) -> None:
    rec.unique = unique
    if cert is None:
        rec.error = err
        return
    rec.delta_star = cert.delta_star
    rec.upper_stratum = format_stratum(cert.upper_stratum)


def _hist_trial(config: ExperimentConfig, trial: int) -> TrialRecord:
    seed = trial_seed(config.master_seed, trial)
    inst = gen_instance(config, seed)
    rec = _base_record(config, trial, seed, inst)
    cert, unique, err = _certify(config, inst)
    _attach_certificate(rec, cert, unique, err)
    try:
        trace = reference_trace(inst, config.reference_tol, config.reference_max_iters)
    except SolverBudgetError as exc:
        rec.valid = False
        rec.error = str(exc)
        return rec
    rec.iterations = trace.iterations
    _fill_solution(config, rec, inst, trace.x, cert)
    return rec


def solver_params(config: ExperimentConfig, inst: ProblemInstance, max_iters: int, stop_tol: float):
    """Step and relaxation for the configured solver on ``inst``."""
    kw = dict(tau=config.tau, max_iters=max_iters, stop_tol=stop_tol)
    if config.step_factor is not None:
        kw["gamma"] = config.step_factor * inst.lam / inst.lipschitz
    return (fb_params if config.solver == "fb" else dr_params)(inst, **kw)


def _path_trial(config: ExperimentConfig, trial: int) -> tuple[TrialRecord, list[tuple[int, int, str]]]:
    seed = trial_seed(config.master_seed, trial)
    inst = gen_instance(config, seed)
    rec = _base_record(config, trial, seed, inst)
    cert, unique, err = _certify(config, inst)
    _attach_certificate(rec, cert, unique, err)
    # stop_tol 0: run the full requested number of iterations
    params = solver_params(config, inst, config.path_iters, 0.0)
    solve = fb_solve if config.solver == "fb" else dr_solve
    trace = solve(inst, params, tol=config.tolerances)
    rec.iterations = trace.iterations
    _fill_solution(config, rec, inst, trace.x, cert)
    path = [(r.k, r.r0, format_stratum(r.stratum)) for r in trace.records]
    return rec, path


def _transition_trial(config: ExperimentConfig, r0: int, trial: int) -> TrialRecord:
    seed = trial_seed(config.master_seed, trial, r0)
    inst = gen_instance(config.replace(r0_target=r0), seed, noiseless=True)
    rec = _base_record(config, trial, seed, inst)
    cert, unique, err = _certify(config, inst)
    _attach_certificate(rec, cert, unique, err)
    return rec


def _map(config: ExperimentConfig, fn, args: Sequence[tuple]) -> list:
    """Apply ``fn`` to each argument tuple; results in input order."""
    if config.workers <= 1 or len(args) <= 1:
        return [fn(config, *a) for a in args]
    with ProcessPoolExecutor(max_workers=config.workers) as ex:
        return list(ex.map(fn, [config] * len(args), *zip(*args)))


def histogram_of(records: Sequence[TrialRecord]) -> dict[int, int]:
    """Counts of ``delta`` over valid records, every integer bin between min and max."""
    deltas = [r.delta for r in records if r.valid and r.delta is not None]
    if not deltas:
        return {}
    counts = np.bincount(np.asarray(deltas) - min(deltas))
    return {min(deltas) + i: int(c) for i, c in enumerate(counts)}


def run_histogram(config: ExperimentConfig) -> ExperimentResult:
    """Per trial: instance, reference solve, ``delta``, certificate, sandwich.

    Reference-solver failures mark the trial invalid; certificate failures
    leave ``delta_star`` empty and the trial uncertified.
    """
    records = _map(config, _hist_trial, [(t,) for t in range(config.trials)])
    return ExperimentResult("hist", config, records, histogram=histogram_of(records))


def run_iteration_path(config: ExperimentConfig, iterations: Optional[int] = None) -> ExperimentResult:
    """Trace ``R0(x_k)`` over ``iterations`` (default ``config.path_iters``) solver steps.

    Each record carries ``r0_x0`` and ``delta_star`` so that the bounds
    ``R0(x0)`` and ``R0(x0) + delta_star`` can be drawn over the path.
    """
    if iterations is not None:
        if iterations < 1:
            raise ValueError("the number of iterations must be at least 1")
        config = config.replace(path_iters=iterations)
    out = _map(config, _path_trial, [(t,) for t in range(config.trials)])
    records = [rec for rec, _ in out]
    paths = {rec.trial: path for rec, path in out}
    return ExperimentResult("path", config, records, histogram=histogram_of(records), paths=paths)


def rho_table(
    records: Sequence[TrialRecord], r0_grid: Sequence[int], delta_grid: Sequence[int]
) -> list[tuple[int, int, float, int, int]]:
    """Rows ``(r0, delta, rho, n_certified, n_trials)``.

    ``records`` are grouped by ``r0_x0``; ``n_certified`` counts trials that
    are certified unique with ``delta_star <= delta``.
    """
    rows = []
    for r0 in r0_grid:
        group = [r for r in records if r.r0_x0 == r0]
        stars = np.array([r.delta_star for r in group if r.unique and r.delta_star is not None], dtype=int)
        for d in sorted(delta_grid):
            n_cert = int((stars <= d).sum())
            rows.append((r0, d, n_cert / len(group) if group else 0.0, n_cert, len(group)))
    return rows


def run_phase_transition(
    config: ExperimentConfig,
    r0_grid: Optional[Sequence[int]] = None,
    delta_grid: Optional[Sequence[int]] = None,
) -> ExperimentResult:
    """Noiseless certificates over a grid of ground-truth complexities.

    ``rho(r0, delta)`` is the fraction of the ``config.trials`` instances at
    complexity ``r0`` that are certified unique and have
    ``delta_star <= delta``. Since those events are nested in ``delta``, each
    row of the table is nondecreasing.
    """
    if r0_grid is None:
        r0_grid = config.r0_grid if config.r0_grid is not None else config.default_r0_grid()
    if delta_grid is None:
        delta_grid = config.delta_grid if config.delta_grid is not None else config.default_delta_grid()
    r0_grid, delta_grid = tuple(r0_grid), tuple(sorted(delta_grid))
    if not r0_grid or not delta_grid:
        raise ValueError("grids must be nonempty")
    if any(not 0 <= r <= config.r0_max for r in r0_grid):
        raise ValueError(f"r0 grid must lie in [0, {config.r0_max}]")
    if any(d < 0 for d in delta_grid):
        raise ValueError("delta grid must be nonnegative")
    args = [(r0, t) for r0 in r0_grid for t in range(config.trials)]
    records = _map(config, _transition_trial, args)
    return ExperimentResult("transition", config, records, rho=rho_table(records, r0_grid, delta_grid))


def projection_demo(p0, perturbation_radius: float, samples: int, seed: int) -> ProjectionReport:
    """Strata of ``x_hat(p) = clip(p, -1, 1)`` for ``p`` near ``p0``.

    Samples ``p`` uniformly in the Euclidean ball of the given radius around
    ``p0`` and checks ``M(x_hat(p0)) <= M(x_hat(p)) <= J(M*(u_hat(p0)))``
    with ``u_hat(p0) = p0 - x_hat(p0)``.
    """
    if not perturbation_radius > 0:
        raise ValueError("perturbation_radius must be positive")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    p0 = np.asarray(p0, dtype=float)
    d = p0.size
    reg = LInfBall(d)
    x0 = reg.prox(p0, 1.0)
    u0 = p0 - x0
    lower = reg.primal_stratum(x0)
    upper = reg.mirror_map_conj(reg.dual_stratum(u0))

    s_dir, s_rad = (int(s) for s in np.random.SeedSequence(int(seed)).generate_state(2, np.uint64))
    dirs = linalg.gaussian_matrix(samples, d, s_dir)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = perturbation_radius * linalg.rng_from_seed(s_rad).random(samples) ** (1.0 / d)
    counts: dict[str, int] = {}
    passed = 0
    for p in p0 + radii[:, None] * dirs:
        s = reg.primal_stratum(reg.prox(p, 1.0))
        key = format_stratum(s)
        counts[key] = counts.get(key, 0) + 1
        passed += sandwich_holds(lower, s, upper)
    return ProjectionReport(
        p0, x0, u0, format_stratum(lower), format_stratum(upper), dict(sorted(counts.items())), passed / samples, samples
    )


# ----------------------------------------------------------------- output


def _opt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    return str(v)


TRIAL_COLUMNS = [
    "trial", "seed", "lam", "valid", "r0_x0", "r0_xhat", "delta", "delta_star",
    "unique", "sandwich", "iterations", "x0_stratum", "xhat_stratum", "upper_stratum", "error",
]  # fmt: skip


def write_trials_csv(records: Sequence[TrialRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_COLUMNS)
        for r in records:
            w.writerow(
                [r.trial, r.seed, repr(r.lam), _opt(r.valid)]
                + [_opt(getattr(r, c)) for c in TRIAL_COLUMNS[4:11]]
                + [r.x0_stratum, r.xhat_stratum, r.upper_stratum, r.error]
            )


def read_trials_csv(path) -> list[TrialRecord]:
    """Inverse of :func:`write_trials_csv` (used for audits)."""

    def opt_int(s):
        return None if s == "" else int(s)

    def opt_bool(s):
        return None if s == "" else s == "1"

    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                TrialRecord(
                    trial=int(row["trial"]),
                    seed=int(row["seed"]),
                    lam=float(row["lam"]),
                    valid=row["valid"] == "1",
                    r0_x0=int(row["r0_x0"]),
                    r0_xhat=opt_int(row["r0_xhat"]),
                    delta=opt_int(row["delta"]),
                    delta_star=opt_int(row["delta_star"]),
                    unique=opt_bool(row["unique"]),
                    sandwich=opt_bool(row["sandwich"]),
                    iterations=opt_int(row["iterations"]),
                    x0_stratum=row["x0_stratum"],
                    xhat_stratum=row["xhat_stratum"],
                    upper_stratum=row["upper_stratum"],
                    error=row["error"],
                )
            )
    return out


def write_histogram_csv(hist: dict[int, int], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["delta", "count"])
        for d in sorted(hist):
            w.writerow([d, hist[d]])


def write_paths_csv(paths: dict[int, list[tuple[int, int, str]]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "k", "r0", "stratum"])
        for trial in sorted(paths):
            for k, r0, s in paths[trial]:
                w.writerow([trial, k, r0, s])


def write_phase_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r0", "delta", "rho", "n_certified", "n_trials"])
        for r0, d, rho, n_cert, n in rows:
            w.writerow([r0, d, repr(float(rho)), n_cert, n])


def manifest(result: ExperimentResult) -> dict:
    cfg = result.config
    valid = result.valid_records
    return {
        "experiment": result.kind,
        "software": {
            "mirrorstrat": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "config": cfg.to_dict(),
        "seed_rule": "trial seed = SeedSequence([master_seed, (r0,) trial]).generate_state(1, uint64)",
        "trial_seeds": [r.seed for r in result.records],
        "tolerances": {
            "primal_zero_tol": cfg.primal_zero_tol,
            "dual_saturation_tol": cfg.dual_saturation_tol,
            "reference_tol": cfg.reference_tol,
            "cert_tol": cfg.cert_tol,
            "stop_tol": cfg.stop_tol,
        },
        "lambda": {
            "rule": cfg.lambda_rule,
            "lam": cfg.lam if cfg.lambda_rule == "fixed" else None,
            "c0": cfg.c0 if cfg.lambda_rule == "proportional" else None,
            "c0_note": "default c0 = 0.4 calibrated so that c0 * E||w|| is about 0.28 at noise 0.1, P = 50",
            "floor": LAMBDA_FLOOR,
        },
        "uniqueness_rule": "certificate feasible and phi injective on the saturated model (sigma_min > 1e-8)",
        "summary": {
            "trials": len(result.records),
            "valid": len(valid),
            "certified_unique": sum(1 for r in result.records if r.unique),
            "sandwich_holds": sum(1 for r in valid if r.sandwich),
        },
    }


def write_outputs(result: ExperimentResult, out_dir) -> list[str]:
    """Write CSV, SVG and ``meta.json`` for ``result`` into ``out_dir``.

    Returns the list of written file names.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def target(name):
        written.append(name)
        return os.path.join(out_dir, name)

    write_trials_csv(result.records, target("trials.csv"))
    if result.kind in ("hist", "path"):
        write_histogram_csv(result.histogram, target("histogram.csv"))
        xs = sorted(result.histogram)
        svg.bar_chart(
            target("histogram.svg"), xs, [result.histogram[x] for x in xs],
            title=f"complexity excess ({result.config.regularizer})", xlabel="delta", ylabel="trials",
        )  # fmt: skip
    if result.kind == "path":
        write_paths_csv(result.paths, target("paths.csv"))
        shown = sorted(result.paths)[:4]
        series = [(f"trial {t}", [k for k, _, _ in result.paths[t]], [r for _, r, _ in result.paths[t]]) for t in shown]
        hlines = []
        for t in shown[:2]:
            rec = result.records[t]
            hlines.append((f"R0(x0), trial {t}", rec.r0_x0))
            if rec.dim_upper is not None:
                hlines.append((f"R0(x0)+delta*, trial {t}", rec.dim_upper))
        svg.line_chart(target("paths.svg"), series, title="R0(x_k)", xlabel="k", ylabel="R0", hlines=hlines)
    if result.kind == "transition":
        write_phase_csv(result.rho, target("phase.csv"))
        deltas = sorted({d for _, d, _, _, _ in result.rho})
        series = []
        for d in deltas:
            rows = [(r0, rho) for r0, dd, rho, _, _ in result.rho if dd == d]
            series.append((f"delta={d}", [r for r, _ in rows], [v for _, v in rows]))
        svg.line_chart(
            target("phase.svg"), series, title="rho(r0, delta)", xlabel="r0", ylabel="rho", ylim=(0.0, 1.0),
        )  # fmt: skip
    with open(target("meta.json"), "w") as fh:
        json.dump(manifest(result), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return written
