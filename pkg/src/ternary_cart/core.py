"""Three-valued verdicts, uncertainty zones and class distributions."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np

PROB_TOL = 1e-9


class Ternary(enum.IntEnum):
    """Kleene truth value. The integer encoding makes conjunction a ``min``."""

    FALSE = -1
    UNDEC = 0
    TRUE = 1


def ternary_and(a: Ternary, b: Ternary) -> Ternary:
    return Ternary(min(int(a), int(b)))


def ternary_all(values: Iterable[Ternary]) -> Ternary:
    """Fold :func:`ternary_and` over ``values``; the empty fold is TRUE."""
    return reduce(ternary_and, values, Ternary.TRUE)


@dataclass(frozen=True)
class ZoneParams:
    theta: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.delta >= 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")

    @property
    def lower(self) -> float:
        return self.theta - self.delta

    @property
    def upper(self) -> float:
        return self.theta + self.delta


def zone_classify(x: float, zp: ZoneParams) -> Ternary:
    """Locate ``x`` relative to the zone ``(theta - delta, theta + delta]``.

    TRUE is the decisive right side (``x > theta + delta``), FALSE the
    decisive left side (``x <= theta - delta``). With ``delta == 0`` the
    middle interval is empty and the result is plain binary routing.
    """
    if x > zp.theta + zp.delta:
        return Ternary.TRUE
    if x <= zp.theta - zp.delta:
        return Ternary.FALSE
    return Ternary.UNDEC


def zone_classify_array(x: np.ndarray, theta: float, delta: float) -> np.ndarray:
    """Vectorised :func:`zone_classify`; returns int8 codes -1/0/1."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=np.int8)
    out[x > theta + delta] = Ternary.TRUE
    out[x <= theta - delta] = Ternary.FALSE
    return out


@dataclass(frozen=True, eq=False)
class ClassDistribution:
    """Normalised class-probability vector (K >= 2)."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValueError("a class distribution needs at least two classes")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("class probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"class probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_weights(cls, w) -> "ClassDistribution":
        w = np.asarray(w, dtype=float)
        total = w.sum()
        if total <= 0:
            raise ValueError("cannot normalise zero total weight")
        return cls(w / total)

    @property
    def n_classes(self) -> int:
        return self.probs.size

    def argmax(self) -> int:
        # np.argmax already returns the first maximal index
        return int(np.argmax(self.probs))

    def __eq__(self, other):
        if not isinstance(other, ClassDistribution):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def __repr__(self):
        return f"ClassDistribution({self.probs.tolist()})"
