"""Probability vectors over a finite class set and elementary information quantities."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NonFinite,
    OutOfRange,
    SumOutOfTolerance,
    TooFewClasses,
)

SUM_TOLERANCE = 1e-9


class DiscreteDistribution:
    """An immutable, validated probability vector of length ``m >= 2``.

    Build one with :func:`validate`; the constructor does the same checks.
    """

    __slots__ = ("_probs",)

    def __init__(self, probs: Iterable[float]):
        object.__setattr__(self, "_probs", _checked(probs))

    @classmethod
    def _trusted(cls, probs: Sequence[float]) -> "DiscreteDistribution":
        # Sampler output: already validated in bulk, must not be renormalized
        # (the constrained coordinate has to keep its exact value).
        obj = cls.__new__(cls)
        object.__setattr__(obj, "_probs", tuple(float(x) for x in probs))
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteDistribution is immutable")

    @property
    def probs(self) -> tuple[float, ...]:
        return self._probs

    @property
    def m(self) -> int:
        return len(self._probs)

    def array(self) -> np.ndarray:
        return np.array(self._probs, dtype=float)

    def __len__(self) -> int:
        return len(self._probs)

    def __getitem__(self, i: int) -> float:
        return self._probs[i]

    def __iter__(self):
        return iter(self._probs)

    def __eq__(self, other) -> bool:
        if isinstance(other, DiscreteDistribution):
            return self._probs == other._probs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._probs)

    def __repr__(self) -> str:
        return f"DiscreteDistribution({list(self._probs)!r})"


def _checked(raw: Iterable[float]) -> tuple[float, ...]:
    try:
        values = [float(x) for x in raw]
    except (TypeError, ValueError) as exc:
        raise NonFinite(f"entries must be real numbers: {exc}") from None
    if len(values) < 2:
        raise TooFewClasses(f"need at least 2 classes, got {len(values)}")
    for i, x in enumerate(values):
        if not math.isfinite(x):
            raise NonFinite(f"entry {i} is not finite: {x!r}")
        if x < 0:
            raise NegativeEntry(f"entry {i} is negative: {x!r}")
    total = math.fsum(values)
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise SumOutOfTolerance(f"entries sum to {total!r}, not 1 (tolerance {SUM_TOLERANCE})")
    if total != 1.0:
        values = [x / total for x in values]
    return tuple(values)


def validate(raw: Iterable[float] | DiscreteDistribution) -> DiscreteDistribution:
    """Check ``raw`` is a probability vector and return it as a distribution.

    Inputs whose sum is within 1e-9 of one are renormalized; anything further
    off raises :class:`SumOutOfTolerance`.
    """
    if isinstance(raw, DiscreteDistribution):
        return raw
    return DiscreteDistribution(raw)


def parse_distribution(text: str) -> DiscreteDistribution:
    """Parse ``"0.5,0.3,0.2"`` or a JSON array into a distribution."""
    text = text.strip()
    if text.startswith("["):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise NonFinite(f"invalid JSON array at position {exc.pos}: {exc.msg}") from None
        if not isinstance(values, list):
            raise NonFinite("expected a JSON array of numbers")
        return validate(values)
    values = []
    for pos, field in enumerate(text.split(",")):
        try:
            values.append(float(field))
        except ValueError:
            raise NonFinite(f"cannot parse entry {pos} ({field.strip()!r}) as a number") from None
    return validate(values)


def same_size(p: DiscreteDistribution, q: DiscreteDistribution) -> int:
    if p.m != q.m:
        raise DimensionMismatch(f"distributions have {p.m} and {q.m} classes")
    return p.m


def dominant(d: DiscreteDistribution) -> int:
    """Index of the largest probability; ties go to the lowest index."""
    probs = d.probs
    best = 0
    for i in range(1, len(probs)):
        if probs[i] > probs[best]:
            best = i
    return best


@dataclass(frozen=True)
class DominantPair:
    omega: int
    omega_tilde: int
    nondominant_set: tuple[int, ...]

    @property
    def labels_agree(self) -> bool:
        return self.omega == self.omega_tilde

    @property
    def dominant_set(self) -> tuple[int, ...]:
        if self.labels_agree:
            return (self.omega,)
        return (self.omega, self.omega_tilde)


def dominant_pair(p: DiscreteDistribution, q: DiscreteDistribution) -> DominantPair:
    m = same_size(p, q)
    w, wt = dominant(p), dominant(q)
    rest = tuple(i for i in range(m) if i != w and i != wt)
    return DominantPair(w, wt, rest)


def _log(x: float, base: float) -> float:
    if base == math.e:
        return math.log(x)
    if base == 2:
        return math.log2(x)
    return math.log(x) / math.log(base)


def surprisal(p: float, base: float = 2) -> float:
    """Self-information ``-log p``; infinite for an impossible event."""
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise OutOfRange(f"probability must lie in [0, 1], got {p!r}")
    if p == 0.0:
        return math.inf
    if p == 1.0:
        return 0.0
    return -_log(p, base)


def entropy(d: DiscreteDistribution, base: float = 2) -> float:
    """Shannon entropy with ``0 log 0 = 0``."""
    total = math.fsum(x * _log(x, base) for x in validate(d).probs if x > 0)
    return max(0.0, -total)
