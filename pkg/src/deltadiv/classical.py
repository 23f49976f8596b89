"""Classical divergences between two discrete distributions.

Argument convention follows the Kullback-Leibler form ``sum q log(q / p)``:
the first distribution ``p`` is the reference (it sits in the denominator), the
second ``q`` is the one being compared against it.  All functions accept
:class:`DiscreteDistribution` or anything :func:`validate` accepts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import (
    InvalidAlpha,
    InvalidGenerator,
    MissingDerivative,
    UnknownMeasure,
    ZeroEntry,
    ZeroInReference,
)
from .simplex import DiscreteDistribution, DominantPair, dominant_pair, same_size, validate

E = math.e


@dataclass(frozen=True)
class MeasureValue:
    value: float
    measure_name: str
    log_base: Optional[float] = None

    def __float__(self) -> float:
        return self.value

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.value)


def _pair(p, q) -> tuple[tuple[float, ...], tuple[float, ...]]:
    p, q = validate(p), validate(q)
    same_size(p, q)
    return p.probs, q.probs


def _ln_base(base: float) -> float:
    if not base > 0 or base == 1:
        raise ValueError(f"log base must be positive and != 1, got {base!r}")
    return math.log(base)


def _nonneg(x: float) -> float:
    # Rounding can leave -1e-17 where the exact value is 0.
    return 0.0 if x < 0 else x


def _kl_terms(p, q):
    out = []
    for pi, qi in zip(p, q):
        if qi == 0:
            out.append(0.0)
        elif pi == 0:
            out.append(math.inf)
        else:
            out.append(qi * math.log(qi / pi))
    return out


def _kl_value(p, q, base: float) -> float:
    terms = _kl_terms(p, q)
    if math.inf in terms:
        return math.inf
    return _nonneg(math.fsum(terms) / _ln_base(base))


def kl(p, q, log_base: float = E) -> MeasureValue:
    """Kullback-Leibler divergence ``sum_i q_i log(q_i / p_i)``.

    Infinite when some ``q_i > 0`` meets ``p_i = 0``.
    """
    pp, qq = _pair(p, q)
    return MeasureValue(_kl_value(pp, qq, log_base), "kl", log_base)


def kl_symmetrized(p, q, log_base: float = E) -> MeasureValue:
    """Jeffreys divergence: the *sum* of both directed K-L divergences."""
    pp, qq = _pair(p, q)
    value = _kl_value(pp, qq, log_base) + _kl_value(qq, pp, log_base)
    return MeasureValue(value, "kl-sym(sum)", log_base)


def jensen_shannon(p, q, log_base: float = 2) -> MeasureValue:
    pp, qq = _pair(p, q)
    terms = []
    for pi, qi in zip(pp, qq):
        s = pi + qi
        if pi > 0:
            terms.append(pi * math.log(2 * pi / s))
        if qi > 0:
            terms.append(qi * math.log(2 * qi / s))
    value = _nonneg(0.5 * math.fsum(terms) / _ln_base(log_base))
    return MeasureValue(value, "js", log_base)


def total_variation(p, q) -> MeasureValue:
    pp, qq = _pair(p, q)
    return MeasureValue(0.5 * math.fsum(abs(qi - pi) for pi, qi in zip(pp, qq)), "tv")


def renyi(p, q, alpha: float, log_base: float = E) -> MeasureValue:
    """Renyi divergence of order ``alpha`` of ``q`` from the reference ``p``.

    ``alpha == 1`` returns the K-L limit and ``alpha == inf`` the max-ratio
    variant :func:`renyi_max`.
    """
    alpha = float(alpha)
    if math.isnan(alpha) or alpha <= 0:
        raise InvalidAlpha(f"alpha must be positive, got {alpha!r}")
    if alpha == 1:
        v = kl(p, q, log_base)
        return MeasureValue(v.value, "renyi:1", log_base)
    if math.isinf(alpha):
        return renyi_max(p, q, log_base)
    pp, qq = _pair(p, q)
    terms = []
    for pi, qi in zip(pp, qq):
        if qi == 0:
            continue
        if pi == 0:
            if alpha > 1:
                return MeasureValue(math.inf, f"renyi:{alpha:g}", log_base)
            continue
        terms.append(pi ** (1 - alpha) * qi**alpha)
    total = math.fsum(terms)
    if total == 0:
        value = math.inf
    else:
        value = _nonneg(math.log(total) / (alpha - 1) / _ln_base(log_base))
    return MeasureValue(value, f"renyi:{alpha:g}", log_base)


def renyi_max(p, q, log_base: float = E) -> MeasureValue:
    """Order-infinity Renyi divergence ``log max_i q_i / p_i``."""
    pp, qq = _pair(p, q)
    ratio = 0.0
    for pi, qi in zip(pp, qq):
        if qi == 0:
            continue
        if pi == 0:
            return MeasureValue(math.inf, "renyi:inf", log_base)
        ratio = max(ratio, qi / pi)
    return MeasureValue(_nonneg(math.log(ratio) / _ln_base(log_base)), "renyi:inf", log_base)


@dataclass(frozen=True)
class ConvexGenerator:
    """A convex ``f`` with ``f(1) = 0``, optionally with its derivative.

    Both properties are spot-checked on construction.
    """

    f: Callable[[float], float]
    f_prime: Optional[Callable[[float], float]] = None
    domain_note: str = ""
    name: str = field(default="custom", compare=False)

    _GRID = (0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0)

    def __post_init__(self):
        at_one = self.f(1.0)
        if abs(at_one) > 1e-12:
            raise InvalidGenerator(f"f(1) must be 0, got {at_one!r}")
        grid = self._GRID
        for i, a in enumerate(grid):
            for b in grid[i + 1 :]:
                mid = self.f(0.5 * (a + b))
                avg = 0.5 * (self.f(a) + self.f(b))
                if mid > avg + 1e-12:
                    raise InvalidGenerator(f"f is not convex on [{a}, {b}]")


def _xlogx(t: float) -> float:
    return t * math.log(t) if t > 0 else 0.0


def _xlogx_prime(t: float) -> float:
    return 1.0 + math.log(t)


GENERATORS: dict[str, ConvexGenerator] = {
    "kl": ConvexGenerator(_xlogx, _xlogx_prime, "t >= 0, with 0 log 0 = 0", "kl"),
    "tv": ConvexGenerator(lambda t: 0.5 * abs(t - 1.0), None, "all real t", "tv"),
    "squared": ConvexGenerator(
        lambda t: (t - 1.0) ** 2, lambda t: 2.0 * (t - 1.0), "all real t", "squared"
    ),
}


def generator(name: str) -> ConvexGenerator:
    try:
        return GENERATORS[name]
    except KeyError:
        raise UnknownMeasure(f"unknown generator {name!r}; known: {sorted(GENERATORS)}") from None


def f_divergence(p, q, gen: ConvexGenerator | str) -> MeasureValue:
    """Csiszar divergence ``sum_i p_i f(q_i / p_i)``; every ``p_i`` must be > 0."""
    if isinstance(gen, str):
        gen = generator(gen)
    pp, qq = _pair(p, q)
    if any(pi == 0 for pi in pp):
        raise ZeroInReference("reference distribution has a zero entry")
    value = math.fsum(pi * gen.f(qi / pi) for pi, qi in zip(pp, qq))
    return MeasureValue(_nonneg(value), f"f-div:{gen.name}")


def bregman(p, q, gen: ConvexGenerator | str) -> MeasureValue:
    """Separable Bregman divergence ``sum_i f(p_i) - f(q_i) - (p_i - q_i) f'(q_i)``."""
    if isinstance(gen, str):
        gen = generator(gen)
    if gen.f_prime is None:
        raise MissingDerivative(f"generator {gen.name!r} has no derivative")
    pp, qq = _pair(p, q)
    if any(x == 0 for x in pp + qq):
        raise ZeroEntry("Bregman divergence needs strictly positive entries")
    f, fp = gen.f, gen.f_prime
    value = math.fsum(f(pi) - f(qi) - (pi - qi) * fp(qi) for pi, qi in zip(pp, qq))
    return MeasureValue(_nonneg(value), f"bregman:{gen.name}")


def kl_clutter(
    p, q, pair: Optional[DominantPair] = None, log_base: float = E
) -> tuple[float, float]:
    """Split :func:`kl` into dominant-class and nondominant-class ("clutter") parts.

    The dominant part covers ``omega`` (and ``omega_tilde`` when the labels
    disagree); the two parts add up to ``kl(p, q)``.
    """
    p, q = validate(p), validate(q)
    if pair is None:
        pair = dominant_pair(p, q)
    terms = _kl_terms(p.probs, q.probs)
    ln = _ln_base(log_base)

    def part(idx):
        vals = [terms[i] for i in idx]
        if math.inf in vals:
            return math.inf
        return math.fsum(vals) / ln

    return part(pair.dominant_set), part(pair.nondominant_set)


def _named(measure: str, p, q, log_base_kl: float) -> MeasureValue:
    if measure == "kl":
        return kl(p, q, log_base_kl)
    if measure == "kl-sym":
        return kl_symmetrized(p, q, log_base_kl)
    if measure == "js":
        return jensen_shannon(p, q)
    if measure == "tv":
        return total_variation(p, q)
    kind, _, arg = measure.partition(":")
    if kind == "renyi" and arg:
        try:
            alpha = float(arg)
        except ValueError:
            raise UnknownMeasure(f"bad Renyi order in {measure!r}") from None
        return renyi(p, q, alpha, log_base_kl)
    if kind == "f-div" and arg:
        return f_divergence(p, q, generator(arg))
    if kind == "bregman" and arg:
        return bregman(p, q, generator(arg))
    raise UnknownMeasure(f"unknown measure {measure!r}")


def measure_by_name(measure: str, p, q, log_base_kl: float = E) -> MeasureValue:
    """Evaluate a classical measure selected by its CLI name (``kl``, ``renyi:2``...)."""
    return _named(measure, p, q, log_base_kl)


__all__ = [
    "MeasureValue",
    "ConvexGenerator",
    "GENERATORS",
    "generator",
    "kl",
    "kl_symmetrized",
    "jensen_shannon",
    "total_variation",
    "renyi",
    "renyi_max",
    "f_divergence",
    "bregman",
    "kl_clutter",
    "measure_by_name",
    "DiscreteDistribution",
]
