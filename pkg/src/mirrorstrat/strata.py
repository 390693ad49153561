"""Discrete descriptors of primal and dual strata and their partial order.

Each descriptor is a small frozen dataclass. The order ``leq(s, t)`` is the
closure order: ``s <= t`` iff the set described by ``s`` lies in the closure
of the set described by ``t``. Sign orthants and block supports grow by
switching coordinates on, rank strata by increasing rank. Saturation-type
descriptors (faces of a unit ball) grow the other way: the closure of a face
contains the smaller faces, so *fewer* saturated entries means a larger set.

The same classes serve both sides of the pairing. For the l1 and group norms
and the nuclear norm, ``SignPattern``/``BlockSupport``/``Rank`` are primal and
``SaturationPattern``/``BlockSaturation``/``SaturationCount`` are dual. For
the indicator of the l-infinity ball the roles swap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

__all__ = [
    "SignPattern",
    "SaturationPattern",
    "BlockSupport",
    "BlockSaturation",
    "Rank",
    "SaturationCount",
    "Stratum",
    "InconsistentCertificateError",
    "leq",
    "geq",
    "dim",
    "sandwich_holds",
    "delta_star",
    "format_stratum",
    "parse_stratum",
]


class InconsistentCertificateError(ValueError):
    """The primal stratum does not sit below the certificate's upper stratum."""


def _check_ternary(values):
    if any(v not in (-1, 0, 1) for v in values):
        raise ValueError(f"pattern entries must be in {{-1, 0, 1}}, got {values}")


@dataclass(frozen=True)
class SignPattern:
    """Sign orthant: entry ``signs[i]`` is the sign of coordinate ``i``."""

    signs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(int(v) for v in self.signs))
        _check_ternary(self.signs)


@dataclass(frozen=True)
class SaturationPattern:
    """Face of the unit cube: ``+1``/``-1`` pins a coordinate, ``0`` leaves it open."""

    signs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(int(v) for v in self.signs))
        _check_ternary(self.signs)


@dataclass(frozen=True)
class BlockSupport:
    """Which blocks are nonzero."""

    active: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "active", tuple(bool(v) for v in self.active))


@dataclass(frozen=True)
class BlockSaturation:
    """Which blocks of a dual vector have unit Euclidean norm."""

    saturated: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "saturated", tuple(bool(v) for v in self.saturated))


@dataclass(frozen=True)
class Rank:
    """Matrices of rank ``rank`` among ``side`` x ``side`` matrices."""

    rank: int
    side: int

    def __post_init__(self):
        if not 0 <= self.rank <= self.side:
            raise ValueError(f"rank {self.rank} outside [0, {self.side}]")


@dataclass(frozen=True)
class SaturationCount:
    """Dual matrices whose top ``count`` singular values equal one."""

    count: int
    side: int

    def __post_init__(self):
        if not 0 <= self.count <= self.side:
            raise ValueError(f"count {self.count} outside [0, {self.side}]")


Stratum = Union[SignPattern, SaturationPattern, BlockSupport, BlockSaturation, Rank, SaturationCount]


def _same_shape(s: Stratum, t: Stratum) -> None:
    if type(s) is not type(t):
        raise TypeError(f"cannot compare {type(s).__name__} with {type(t).__name__}")
    if isinstance(s, (Rank, SaturationCount)):
        if s.side != t.side:
            raise ValueError("strata live in different dimensions")
    elif len(_entries(s)) != len(_entries(t)):
        raise ValueError("strata live in different dimensions")


def _entries(s: Stratum) -> tuple:
    if isinstance(s, (SignPattern, SaturationPattern)):
        return s.signs
    if isinstance(s, BlockSupport):
        return s.active
    if isinstance(s, BlockSaturation):
        return s.saturated
    raise TypeError(type(s).__name__)


def leq(s: Stratum, t: Stratum) -> bool:
    """Closure order: ``s`` is contained in the closure of ``t``."""
    _same_shape(s, t)
    if isinstance(s, SignPattern):
        return all(a == 0 or a == b for a, b in zip(s.signs, t.signs))
    if isinstance(s, SaturationPattern):
        return all(b == 0 or a == b for a, b in zip(s.signs, t.signs))
    if isinstance(s, BlockSupport):
        return all(b or not a for a, b in zip(s.active, t.active))
    if isinstance(s, BlockSaturation):
        return all(a or not b for a, b in zip(s.saturated, t.saturated))
    if isinstance(s, Rank):
        return s.rank <= t.rank
    return s.count >= t.count


def geq(s: Stratum, t: Stratum) -> bool:
    return leq(t, s)


def dim(s: Stratum) -> int:
    """Complexity index of a stratum.

    Nonzeros for sign patterns, active blocks for block supports, the rank
    for rank strata. For saturation-type descriptors it is the number of
    unpinned coordinates (blocks, singular values), i.e. the count that grows
    along the closure order.
    """
    if isinstance(s, SignPattern):
        return sum(1 for v in s.signs if v != 0)
    if isinstance(s, SaturationPattern):
        return sum(1 for v in s.signs if v == 0)
    if isinstance(s, BlockSupport):
        return sum(s.active)
    if isinstance(s, BlockSaturation):
        return sum(1 for v in s.saturated if not v)
    if isinstance(s, Rank):
        return s.rank
    return s.side - s.count


def sandwich_holds(lower: Stratum, mid: Stratum, upper: Stratum) -> bool:
    """``lower <= mid <= upper``."""
    return leq(lower, mid) and leq(mid, upper)


def delta_star(primal: Stratum, dual_upper: Stratum, kind) -> int:
    """Largest complexity excess allowed by a dual certificate.

    ``kind`` is the regularizer; its ``mirror_map_conj`` turns ``dual_upper``
    into the primal upper stratum.
    """
    upper = kind.mirror_map_conj(dual_upper)
    if not leq(primal, upper):
        raise InconsistentCertificateError(
            f"primal stratum {format_stratum(primal)} is not below {format_stratum(upper)}"
        )
    return dim(upper) - dim(primal)


_SIGN_CHARS = {1: "+", 0: "0", -1: "-"}
_CHAR_SIGNS = {v: k for k, v in _SIGN_CHARS.items()}


def format_stratum(s: Stratum) -> str:
    """Compact text form used in CSV output.

    Patterns become strings over ``+0-`` (or ``01`` for blocks); rank-type
    strata become their integer.
    """
    if isinstance(s, (SignPattern, SaturationPattern)):
        return "".join(_SIGN_CHARS[v] for v in s.signs)
    if isinstance(s, (BlockSupport, BlockSaturation)):
        return "".join("1" if v else "0" for v in _entries(s))
    if isinstance(s, Rank):
        return str(s.rank)
    return str(s.count)


def parse_stratum(text: str, cls: type, side: int | None = None) -> Stratum:
    """Inverse of :func:`format_stratum` given the descriptor class."""
    if cls in (SignPattern, SaturationPattern):
        return cls(tuple(_CHAR_SIGNS[c] for c in text))
    if cls in (BlockSupport, BlockSaturation):
        return cls(tuple(c == "1" for c in text))
    if side is None:
        raise ValueError("rank-type strata need the matrix side")
    return cls(int(text), side)
