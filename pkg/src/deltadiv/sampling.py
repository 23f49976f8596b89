"""Seeded Monte-Carlo generation of posterior pairs on the probability simplex.

Points are drawn from the flat Dirichlet law (uniform on the simplex).  The
constrained modes fix the probability of a chosen class ``mu`` and spread the
remaining mass uniformly over the region where ``mu`` stays dominant.  That
region is a simplex slice with per-coordinate caps; it is sampled exactly by
rejection from whichever enclosing simplex is tighter (the plain one, or the
one mirrored about the caps), which keeps acceptance high even when the cap
is close to ``1/m``.

All randomness comes from an explicit ``numpy.random.Generator``.  Streams for
experiment runs are derived per block of sample ids, see :func:`block_rng`.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleConstraint, RejectionBudgetExceeded
from .simplex import DiscreteDistribution

DEFAULT_MAX_ATTEMPTS = 10**6
BLOCK_SIZE = 8192
LAW = "flat-dirichlet"


class Mode(str, enum.Enum):
    UNCONSTRAINED = "unconstrained"
    DOMINANT_VALUE = "dominant-value"
    DOMINANT_DIFF = "dominant-diff"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SamplerConfig:
    m: int
    mode: Mode = Mode.UNCONSTRAINED
    mu: Optional[int] = None
    p_mu: Optional[float] = None
    diff: Optional[float] = None
    count: int = 1
    seed: int = 0
    both_dominant: bool = False
    law: str = LAW
    # dominant-diff only: diff values the count is split over, in order
    diff_grid: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.diff_grid is not None:
            object.__setattr__(self, "diff_grid", tuple(float(x) for x in self.diff_grid))
        if self.m < 2:
            raise InfeasibleConstraint(f"need at least 2 classes, got m={self.m}")
        if self.count < 1:
            raise InfeasibleConstraint(f"count must be >= 1, got {self.count}")
        if not 0 <= self.seed < 2**64:
            raise InfeasibleConstraint("seed must be a 64-bit unsigned integer")
        if self.law != LAW:
            raise InfeasibleConstraint(f"unsupported sampling law {self.law!r}")
        if self.mode is Mode.UNCONSTRAINED:
            return
        if self.mu is None or not 0 <= self.mu < self.m:
            raise InfeasibleConstraint(f"mode {self.mode} needs a class index mu in [0, {self.m})")
        if self.mode is Mode.DOMINANT_VALUE:
            if self.p_mu is None:
                raise InfeasibleConstraint("mode dominant-value needs p_mu")
            _check_dominant_value(self.m, self.p_mu)
        else:
            if self.diff is None and not self.diff_grid:
                raise InfeasibleConstraint("mode dominant-diff needs diff or diff_grid")
            if self.diff is not None and self.diff_grid:
                raise InfeasibleConstraint("give either diff or diff_grid, not both")
            for value in self.diff_grid or (self.diff,):
                feasible_p_range(self.m, value, self.both_dominant)

    def diffs_for(self, start: int, stop: int) -> Optional[np.ndarray]:
        """Per-sample diff values for sample ids ``[start, stop)`` (dominant-diff mode)."""
        if self.mode is not Mode.DOMINANT_DIFF:
            return None
        if not self.diff_grid:
            return np.full(stop - start, float(self.diff))
        bounds = np.cumsum(allocate(self.count, len(self.diff_grid)))
        which = np.searchsorted(bounds, np.arange(start, stop), side="right")
        return np.asarray(self.diff_grid)[which]

    def as_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        if self.diff_grid is not None:
            d["diff_grid"] = list(self.diff_grid)
        return d


def _check_dominant_value(m: int, p_mu: float) -> None:
    if not (0 < p_mu <= 1) or p_mu < 1.0 / m:
        raise InfeasibleConstraint(
            f"p_mu={p_mu!r} cannot be dominant among {m} classes (need 1/m <= p_mu <= 1)"
        )


def feasible_p_range(m: int, diff: float, both_dominant: bool = False):
    """Intervals of ``p_mu`` for which ``p_mu +/- diff`` is a legal ``q_mu``.

    Returns a list of disjoint closed ``(lo, hi)`` intervals (possibly a single
    degenerate point).  Raises :class:`InfeasibleConstraint` when empty.
    """
    if not 0 <= diff <= 1:
        raise InfeasibleConstraint(f"diff must lie in [0, 1], got {diff!r}")
    lo_p = 1.0 / m
    lo_q = 1.0 / m if both_dominant else 0.0
    down = (max(lo_p, lo_q + diff), 1.0)  # q_mu = p_mu - diff
    up = (max(lo_p, lo_q - diff), 1.0 - diff)  # q_mu = p_mu + diff
    pieces = sorted(iv for iv in (down, up) if iv[0] <= iv[1])
    if not pieces:
        raise InfeasibleConstraint(
            f"no p_mu admits |p_mu - q_mu| = {diff} with m={m}"
            + (" and both distributions dominated by mu" if both_dominant else "")
        )
    merged = [pieces[0]]
    for lo, hi in pieces[1:]:
        if lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return merged


def _dirichlet_rows(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    e = rng.standard_exponential((n, k))
    return e / e.sum(axis=1, keepdims=True)


def sample_simplex_rows(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """``n`` independent uniform points on the (m-1)-simplex, one per row."""
    return _dirichlet_rows(rng, n, m)


def capped_simplex_rows(
    rng: np.random.Generator,
    cap: np.ndarray,
    mass: np.ndarray,
    k: int,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    proposal: str = "auto",
) -> tuple[np.ndarray, np.ndarray]:
    """Uniform draws from ``{x in R^k : x >= 0, sum x = mass, x <= cap}``, row-wise.

    ``proposal="direct"`` always proposes from the plain simplex of total
    ``mass``; ``"auto"`` may instead propose ``cap - y`` with ``y`` uniform on
    the simplex of total ``k * cap - mass``, whichever encloses the target
    more tightly.  Returns the draws and the number of proposals per row.
    """
    cap = np.asarray(cap, dtype=float)
    mass = np.asarray(mass, dtype=float)
    n = cap.shape[0]
    out = np.empty((n, k))
    attempts = np.zeros(n, dtype=np.int64)
    if k == 0:
        return out, attempts
    slack = np.maximum(k * cap - mass, 0.0)
    if proposal == "auto":
        mirrored = slack < mass
    elif proposal == "direct":
        mirrored = np.zeros(n, dtype=bool)
    else:
        raise ValueError(f"unknown proposal {proposal!r}")
    pending = np.arange(n)
    while pending.size:
        attempts[pending] += 1
        if attempts[pending].max() > max_attempts:
            raise RejectionBudgetExceeded(
                f"no acceptable draw within {max_attempts} attempts (cap={cap[pending][0]!r})"
            )
        u = _dirichlet_rows(rng, pending.size, k)
        mir = mirrored[pending]
        c = cap[pending, None]
        total = np.where(mir, slack[pending], mass[pending])[:, None]
        y = total * u
        ok = (y <= c).all(axis=1)
        x = np.where(mir[:, None], np.maximum(c - y, 0.0), y)
        out[pending[ok]] = x[ok]
        pending = pending[~ok]
    return out, attempts


def _with_dominant_rows(rng, m, mu, p, max_attempts, proposal="auto"):
    n = p.shape[0]
    others, attempts = capped_simplex_rows(rng, p, 1.0 - p, m - 1, max_attempts, proposal)
    rows = np.empty((n, m))
    rows[:, :mu] = others[:, :mu]
    rows[:, mu] = p
    rows[:, mu + 1 :] = others[:, mu:]
    return rows, attempts


def sample_with_dominant_rows(
    rng: np.random.Generator,
    n: int,
    m: int,
    mu: int,
    p_mu: float,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    proposal: str = "auto",
) -> tuple[np.ndarray, np.ndarray]:
    """Batch form of :func:`sample_with_dominant`; also returns proposals per row."""
    _check_dominant_value(m, p_mu)
    return _with_dominant_rows(rng, m, mu, np.full(n, float(p_mu)), max_attempts, proposal)


def sample_simplex(m: int, rng: np.random.Generator) -> DiscreteDistribution:
    if m < 2:
        raise InfeasibleConstraint(f"need at least 2 classes, got m={m}")
    return DiscreteDistribution._trusted(sample_simplex_rows(rng, 1, m)[0])


def sample_with_dominant(
    m: int,
    mu: int,
    p_mu: float,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> DiscreteDistribution:
    """A uniform draw among distributions with ``probs[mu] == p_mu`` and ``mu`` dominant."""
    rows, _ = sample_with_dominant_rows(rng, 1, m, mu, p_mu, max_attempts)
    return DiscreteDistribution._trusted(rows[0])


def _uniform_on_intervals(rng, intervals_lo, intervals_hi):
    # intervals_*: (n, 2); zero-length pieces get picked only if nothing else is available
    lengths = np.maximum(intervals_hi - intervals_lo, 0.0)
    total = lengths.sum(axis=1)
    u = rng.random(intervals_lo.shape[0]) * total
    first = u <= lengths[:, 0]
    p = np.where(first, intervals_lo[:, 0] + u, intervals_lo[:, 1] + (u - lengths[:, 0]))
    p = np.minimum(p, np.where(first, intervals_hi[:, 0], intervals_hi[:, 1]))
    return np.where(total > 0, p, intervals_lo[:, 0])


def sample_pair_rows(
    config: SamplerConfig,
    rng: np.random.Generator,
    n: int,
    diffs: Optional[np.ndarray] = None,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> tuple[np.ndarray, np.ndarray]:
    """``n`` pairs ``(P, Q)`` as two ``(n, m)`` arrays.

    ``diffs`` overrides ``config.diff`` row by row in dominant-diff mode.
    """
    m = config.m
    if config.mode is Mode.UNCONSTRAINED:
        return _dirichlet_rows(rng, n, m), _dirichlet_rows(rng, n, m)
    mu = config.mu
    if config.mode is Mode.DOMINANT_VALUE:
        P, _ = _with_dominant_rows(rng, m, mu, np.full(n, float(config.p_mu)), max_attempts)
        return P, _dirichlet_rows(rng, n, m)

    if diffs is None:
        diffs = config.diffs_for(0, n)
    diffs = np.asarray(diffs, dtype=float)
    lo = np.empty((n, 2))
    hi = np.empty((n, 2))
    for value in np.unique(diffs):
        sel = diffs == value
        pieces = feasible_p_range(m, float(value), config.both_dominant)
        if len(pieces) == 1:
            pieces = pieces + [(pieces[0][1], pieces[0][1])]
        lo[sel] = [pieces[0][0], pieces[1][0]]
        hi[sel] = [pieces[0][1], pieces[1][1]]
    p = _uniform_on_intervals(rng, lo, hi)

    lo_q = 1.0 / m if config.both_dominant else 0.0
    down_ok = p - diffs >= lo_q
    up_ok = (p + diffs <= 1.0) & (p + diffs >= lo_q)
    pick_up = np.where(down_ok & up_ok, rng.random(n) < 0.5, up_ok)
    q = np.where(pick_up, p + diffs, p - diffs)
    q = np.clip(q, 0.0, 1.0)

    P, _ = _with_dominant_rows(rng, m, mu, p, max_attempts)
    if config.both_dominant:
        Q, _ = _with_dominant_rows(rng, m, mu, q, max_attempts)
    else:
        rest = _dirichlet_rows(rng, n, m - 1) * (1.0 - q)[:, None]
        Q = np.empty((n, m))
        Q[:, :mu] = rest[:, :mu]
        Q[:, mu] = q
        Q[:, mu + 1 :] = rest[:, mu:]
    return P, Q


def sample_pair(
    config: SamplerConfig, rng: np.random.Generator
) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    P, Q = sample_pair_rows(config, rng, 1)
    return DiscreteDistribution._trusted(P[0]), DiscreteDistribution._trusted(Q[0])


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent stream for sample ids ``[block * BLOCK_SIZE, (block + 1) * BLOCK_SIZE)``.

    Derived from ``(seed, block)`` alone, so any block can be generated on any
    worker in any order with identical results.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def diff_grid(start: float = 0.0, stop: float = 1.0, step: float = 0.05) -> list[float]:
    """Evenly spaced dominant-difference values, endpoints included."""
    n = int(round((stop - start) / step))
    return [round(start + i * step, 12) for i in range(n + 1)]


def allocate(count: int, k: int) -> list[int]:
    """Split ``count`` as evenly as possible over ``k`` groups, earlier groups first."""
    base, extra = divmod(count, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


__all__ = [
    "Mode",
    "SamplerConfig",
    "sample_simplex",
    "sample_with_dominant",
    "sample_pair",
    "sample_simplex_rows",
    "sample_with_dominant_rows",
    "sample_pair_rows",
    "capped_simplex_rows",
    "feasible_p_range",
    "block_rng",
    "diff_grid",
    "allocate",
    "BLOCK_SIZE",
]
