"""Mirror-stratifiable regularizers.

Four regularizers are provided, all acting on flat float vectors:

* :class:`L1` -- the l1 norm, strata are sign orthants.
* :class:`GroupL12` -- sum of Euclidean norms over a block partition.
* :class:`Nuclear` -- nuclear norm of an ``n x n`` matrix stored row-major
  as a vector of length ``n**2``; strata are fixed-rank sets.
* :class:`LInfBall` -- indicator of the unit l-infinity ball; strata are the
  open faces of the cube.

Every class exposes the same surface: ``eval``, ``prox``, ``prox_conjugate``,
stratum extraction on both sides (``primal_stratum``, ``dual_stratum``), the
mirror maps between them, and the Euclidean projection onto the
subdifferential at a point.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .strata import (
    BlockSaturation,
    BlockSupport,
    Rank,
    SaturationCount,
    SaturationPattern,
    SignPattern,
    Stratum,
)

__all__ = [
    "Tolerances",
    "InfeasibleDualError",
    "Regularizer",
    "L1",
    "GroupL12",
    "Nuclear",
    "LInfBall",
    "soft_threshold",
]


class InfeasibleDualError(ValueError):
    """Dual vector lies outside the domain of the conjugate beyond tolerance."""


@dataclass(frozen=True)
class Tolerances:
    """Thresholds turning exact stratum membership into a numerical test.

    ``primal_zero_tol`` decides when an entry, block norm or singular value
    counts as zero; ``dual_saturation_tol`` when a dual entry, block norm or
    singular value counts as one.
    """

    primal_zero_tol: float = 1e-8
    dual_saturation_tol: float = 1e-6

    def __post_init__(self):
        for name in ("primal_zero_tol", "dual_saturation_tol"):
            v = getattr(self, name)
            if not 0.0 < v <= 1e-2:
                raise ValueError(f"{name} must lie in (0, 1e-2], got {v}")


DEFAULT_TOL = Tolerances()


def soft_threshold(x: np.ndarray, mu: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - mu, 0.0)


class Regularizer(ABC):
    """Common surface of the regularizers; ``size`` is the ambient dimension."""

    size: int
    primal_type: type
    dual_type: type

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise ValueError(
                f"{type(self).__name__} expects a vector of length {self.size}, got shape {x.shape}"
            )
        return x

    def _check_kind(self, s: Stratum, expected: type) -> None:
        if not isinstance(s, expected):
            raise TypeError(
                f"{type(self).__name__} pairs {expected.__name__}, got {type(s).__name__}"
            )

    @abstractmethod
    def eval(self, x: np.ndarray) -> float: ...

    @abstractmethod
    def prox(self, x: np.ndarray, mu: float) -> np.ndarray:
        """``argmin_z 0.5 * ||z - x||^2 + mu * R(z)``."""

    def prox_conjugate(self, x: np.ndarray, mu: float) -> np.ndarray:
        """Prox of ``mu * R*`` through the Moreau decomposition."""
        x = self._check(x)
        if mu <= 0:
            raise ValueError("mu must be positive")
        return x - mu * self.prox(x / mu, 1.0 / mu)

    @abstractmethod
    def conjugate(self, u: np.ndarray) -> float:
        """Fenchel conjugate ``R*(u)``."""

    def dual_scale(self, u: np.ndarray) -> float:
        """Factor ``c >= 1`` such that ``u / c`` lies in ``dom R*``."""
        return 1.0

    @abstractmethod
    def complexity_index(self, x: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> int: ...

    @abstractmethod
    def primal_stratum(self, x: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> Stratum: ...

    @abstractmethod
    def dual_stratum(self, u: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> Stratum: ...

    @abstractmethod
    def mirror_map(self, s: Stratum) -> Stratum:
        """Primal stratum to the paired dual stratum."""

    @abstractmethod
    def mirror_map_conj(self, d: Stratum) -> Stratum:
        """Dual stratum back to its primal partner."""

    @abstractmethod
    def project_subdifferential(
        self, x0: np.ndarray, v: np.ndarray, tol: Tolerances = DEFAULT_TOL
    ) -> np.ndarray:
        """Euclidean projection of ``v`` onto ``dR(x0)``."""

    def subdifferential_projector(self, x0: np.ndarray, tol: Tolerances = DEFAULT_TOL):
        """Return ``v -> project_subdifferential(x0, v)`` with ``x0`` preprocessed."""
        x0 = self._check(x0)
        return lambda v: self.project_subdifferential(x0, v, tol)

    def enumerate_primal_strata(self):
        """All primal strata (only sensible in small dimension)."""
        raise NotImplementedError


def _ternary(values: np.ndarray) -> tuple[int, ...]:
    return tuple(int(v) for v in values)


class L1(Regularizer):
    """``R(x) = sum_i |x_i|``."""

    primal_type = SignPattern
    dual_type = SaturationPattern

    def __init__(self, size: int):
        if size < 1:
            raise ValueError("size must be positive")
        self.size = int(size)

    def __repr__(self):
        return f"L1({self.size})"

    def eval(self, x):
        return float(np.abs(self._check(x)).sum())

    def prox(self, x, mu):
        if mu <= 0:
            raise ValueError("mu must be positive")
        return soft_threshold(self._check(x), mu)

    def prox_conjugate(self, x, mu):
        if mu <= 0:
            raise ValueError("mu must be positive")
        return np.clip(self._check(x), -1.0, 1.0)

    def conjugate(self, u):
        return 0.0 if np.abs(self._check(u)).max() <= 1.0 + 1e-12 else math.inf

    def dual_scale(self, u):
        return max(1.0, float(np.abs(u).max()))

    def complexity_index(self, x, tol=DEFAULT_TOL):
        return int((np.abs(self._check(x)) > tol.primal_zero_tol).sum())

    def primal_stratum(self, x, tol=DEFAULT_TOL):
        x = self._check(x)
        return SignPattern(_ternary(np.where(np.abs(x) > tol.primal_zero_tol, np.sign(x), 0)))

    def dual_stratum(self, u, tol=DEFAULT_TOL):
        u = self._check(u)
        t = tol.dual_saturation_tol
        worst = float(np.abs(u).max())
        if worst > 1.0 + t:
            raise InfeasibleDualError(f"|u_i| reaches {worst:.6g} > 1")
        return SaturationPattern(_ternary(np.where(u >= 1.0 - t, 1, np.where(u <= -1.0 + t, -1, 0))))

    def mirror_map(self, s):
        self._check_kind(s, SignPattern)
        return SaturationPattern(s.signs)

    def mirror_map_conj(self, d):
        self._check_kind(d, SaturationPattern)
        return SignPattern(d.signs)

    def project_subdifferential(self, x0, v, tol=DEFAULT_TOL):
        x0, v = self._check(x0), self._check(v)
        on = np.abs(x0) > tol.primal_zero_tol
        return np.where(on, np.sign(x0), np.clip(v, -1.0, 1.0))

    def enumerate_primal_strata(self):
        import itertools

        for signs in itertools.product((-1, 0, 1), repeat=self.size):
            yield SignPattern(signs)


class GroupL12(Regularizer):
    """``R(x) = sum_B ||x_B||_2`` over a partition of the coordinates into blocks."""

    primal_type = BlockSupport
    dual_type = BlockSaturation

    def __init__(self, blocks: Sequence[Sequence[int]]):
        blocks = [np.asarray(b, dtype=int) for b in blocks]
        if not blocks or any(b.size == 0 for b in blocks):
            raise ValueError("blocks must be nonempty")
        flat = np.concatenate(blocks)
        size = flat.size
        if sorted(flat.tolist()) != list(range(size)):
            raise ValueError("blocks must be disjoint and cover 0..N-1")
        self.blocks = blocks
        self.size = size
        self._label = np.empty(size, dtype=int)
        for k, b in enumerate(blocks):
            self._label[b] = k

    @classmethod
    def uniform(cls, n_blocks: int, block_size: int) -> "GroupL12":
        return cls([range(k * block_size, (k + 1) * block_size) for k in range(n_blocks)])

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def __repr__(self):
        return f"GroupL12({[b.tolist() for b in self.blocks]})"

    def block_norms(self, x: np.ndarray) -> np.ndarray:
        return np.sqrt(np.bincount(self._label, weights=x * x, minlength=self.n_blocks))

    def eval(self, x):
        return float(self.block_norms(self._check(x)).sum())

    def prox(self, x, mu):
        if mu <= 0:
            raise ValueError("mu must be positive")
        x = self._check(x)
        norms = self.block_norms(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(norms > 0, np.maximum(0.0, 1.0 - mu / norms), 0.0)
        return x * scale[self._label]

    def _project_ball(self, u: np.ndarray) -> np.ndarray:
        norms = self.block_norms(u)
        return u / np.maximum(1.0, norms)[self._label]

    def prox_conjugate(self, x, mu):
        if mu <= 0:
            raise ValueError("mu must be positive")
        return self._project_ball(self._check(x))

    def conjugate(self, u):
        return 0.0 if self.block_norms(self._check(u)).max() <= 1.0 + 1e-12 else math.inf

    def dual_scale(self, u):
        return max(1.0, float(self.block_norms(u).max()))

    def complexity_index(self, x, tol=DEFAULT_TOL):
        return int((self.block_norms(self._check(x)) > tol.primal_zero_tol).sum())

    def primal_stratum(self, x, tol=DEFAULT_TOL):
        return BlockSupport(tuple(self.block_norms(self._check(x)) > tol.primal_zero_tol))

    def dual_stratum(self, u, tol=DEFAULT_TOL):
        norms = self.block_norms(self._check(u))
        t = tol.dual_saturation_tol
        if norms.max() > 1.0 + t:
            raise InfeasibleDualError(f"block norm reaches {norms.max():.6g} > 1")
        return BlockSaturation(tuple(norms >= 1.0 - t))

    def mirror_map(self, s):
        self._check_kind(s, BlockSupport)
        return BlockSaturation(s.active)

    def mirror_map_conj(self, d):
        self._check_kind(d, BlockSaturation)
        return BlockSupport(d.saturated)

    def project_subdifferential(self, x0, v, tol=DEFAULT_TOL):
        x0, v = self._check(x0), self._check(v)
        norms = self.block_norms(x0)
        on = norms > tol.primal_zero_tol
        out = self._project_ball(v)
        safe = np.where(on, norms, 1.0)
        return np.where(on[self._label], x0 / safe[self._label], out)

    def enumerate_primal_strata(self):
        import itertools

        for bits in itertools.product((False, True), repeat=self.n_blocks):
            yield BlockSupport(bits)


class Nuclear(Regularizer):
    """Nuclear norm of an ``side x side`` matrix flattened row-major.

    ``svd_method`` picks the SVD kernel used by ``prox`` and friends
    (see :func:`mirrorstrat.linalg.svd`).
    """

    primal_type = Rank
    dual_type = SaturationCount

    def __init__(self, side: int, svd_method: str = "lapack"):
        if side < 1:
            raise ValueError("side must be positive")
        self.side = int(side)
        self.size = self.side**2
        self.svd_method = svd_method

    def __repr__(self):
        return f"Nuclear({self.side})"

    def mat(self, x: np.ndarray) -> np.ndarray:
        return self._check(x).reshape(self.side, self.side)

    def _svd(self, x):
        return linalg.svd(self.mat(x), method=self.svd_method)

    def singular_values(self, x: np.ndarray) -> np.ndarray:
        return np.linalg.svd(self.mat(x), compute_uv=False)

    def eval(self, x):
        return float(self.singular_values(x).sum())

    def prox(self, x, mu):
        if mu <= 0:
            raise ValueError("mu must be positive")
        f = self._svd(x)
        return ((f.u * np.maximum(f.s - mu, 0.0)) @ f.vt).ravel()

    def prox_conjugate(self, x, mu):
        if mu <= 0:
            raise ValueError("mu must be positive")
        f = self._svd(x)
        return ((f.u * np.minimum(f.s, 1.0)) @ f.vt).ravel()

    def conjugate(self, u):
        return 0.0 if self.singular_values(u)[0] <= 1.0 + 1e-12 else math.inf

    def dual_scale(self, u):
        return max(1.0, float(self.singular_values(u)[0]))

    def complexity_index(self, x, tol=DEFAULT_TOL):
        return int((self.singular_values(x) > tol.primal_zero_tol).sum())

    def primal_stratum(self, x, tol=DEFAULT_TOL):
        return Rank(self.complexity_index(x, tol), self.side)

    def dual_stratum(self, u, tol=DEFAULT_TOL):
        s = self.singular_values(u)
        t = tol.dual_saturation_tol
        if s[0] > 1.0 + t:
            raise InfeasibleDualError(f"operator norm {s[0]:.6g} > 1")
        return SaturationCount(int((s >= 1.0 - t).sum()), self.side)

    def mirror_map(self, s):
        self._check_kind(s, Rank)
        return SaturationCount(s.rank, s.side)

    def mirror_map_conj(self, d):
        self._check_kind(d, SaturationCount)
        return Rank(d.count, d.side)

    def project_subdifferential(self, x0, v, tol=DEFAULT_TOL):
        return self.subdifferential_projector(x0, tol)(v)

    def subdifferential_projector(self, x0, tol=DEFAULT_TOL):
        f = self._svd(x0)
        r = int((f.s > tol.primal_zero_tol).sum())
        ur, vr = f.u[:, :r], f.vt[:r].T
        anchor = ur @ vr.T

        def project(v):
            w = self.mat(v)
            # restrict v to the orthogonal complements of the column/row spaces
            w = w - ur @ (ur.T @ w)
            w = w - (w @ vr) @ vr.T
            g = linalg.svd(w, method=self.svd_method)
            return (anchor + (g.u * np.minimum(g.s, 1.0)) @ g.vt).ravel()

        return project

    def enumerate_primal_strata(self):
        for r in range(self.side + 1):
            yield Rank(r, self.side)


class LInfBall(Regularizer):
    """Indicator of ``[-1, 1]^N``.

    Primal strata are faces of the cube (:class:`SaturationPattern`), dual
    strata are sign orthants of the conjugate ``||.||_1``.
    """

    primal_type = SaturationPattern
    dual_type = SignPattern

    def __init__(self, size: int):
        if size < 1:
            raise ValueError("size must be positive")
        self.size = int(size)

    def __repr__(self):
        return f"LInfBall({self.size})"

    def eval(self, x):
        return 0.0 if np.abs(self._check(x)).max() <= 1.0 else math.inf

    def prox(self, x, mu):
        if mu <= 0:
            raise ValueError("mu must be positive")
        return np.clip(self._check(x), -1.0, 1.0)

    def prox_conjugate(self, x, mu):
        if mu <= 0:
            raise ValueError("mu must be positive")
        return soft_threshold(self._check(x), mu)

    def conjugate(self, u):
        return float(np.abs(self._check(u)).sum())

    def complexity_index(self, x, tol=DEFAULT_TOL):
        # dimension of the face containing x: the unpinned coordinates
        x = self._check(x)
        return int((np.abs(x) < 1.0 - tol.dual_saturation_tol).sum())

    def primal_stratum(self, x, tol=DEFAULT_TOL):
        x = self._check(x)
        t = tol.dual_saturation_tol
        return SaturationPattern(_ternary(np.where(x >= 1.0 - t, 1, np.where(x <= -1.0 + t, -1, 0))))

    def dual_stratum(self, u, tol=DEFAULT_TOL):
        u = self._check(u)
        return SignPattern(_ternary(np.where(np.abs(u) > tol.primal_zero_tol, np.sign(u), 0)))

    def mirror_map(self, s):
        self._check_kind(s, SaturationPattern)
        return SignPattern(s.signs)

    def mirror_map_conj(self, d):
        self._check_kind(d, SignPattern)
        return SaturationPattern(d.signs)

    def project_subdifferential(self, x0, v, tol=DEFAULT_TOL):
        x0, v = self._check(x0), self._check(v)
        t = tol.dual_saturation_tol
        return np.where(x0 >= 1.0 - t, np.maximum(v, 0.0), np.where(x0 <= -1.0 + t, np.minimum(v, 0.0), 0.0))

    def enumerate_primal_strata(self):
        import itertools

        for signs in itertools.product((-1, 0, 1), repeat=self.size):
            yield SaturationPattern(signs)
