"""Delta divergence and the dominant-class heuristics it is compared with.

For distributions ``p`` and ``q`` with dominant classes ``w = argmax p`` and
``wt = argmax q`` the Delta divergence is the total variation distance
computed on the coarse partition ``{w, wt, rest}``, where ``rest`` merges every
nondominant class into one event.  In terms of

    a = q[wt] - p[wt]        b = p[w] - q[w]

it reduces to ``|b|`` when the labels agree, ``max(a, b)`` when they disagree
with both terms nonnegative, and ``|a| + |b|`` when their signs differ (both
negative cannot happen).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .classical import MeasureValue, total_variation
from .errors import InvariantViolation
from .simplex import DominantPair, dominant_pair, validate

TOL = 1e-12


class CaseTag(str, enum.Enum):
    LABEL_AGREEMENT = "LabelAgreement"
    DISAGREE_BOTH_NONNEGATIVE = "DisagreeBothNonnegative"
    DISAGREE_MIXED_SIGN = "DisagreeMixedSign"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DeltaBreakdown:
    """Delta divergence with everything needed to see how it was reached.

    ``pim`` is the dominant-class part and ``group_clutter`` the merged
    nondominant part; they always add up to ``value``.  ``definition_value``
    is the same quantity evaluated from the three-event definition rather
    than the closed form, and ``casewise_group_clutter`` is the clutter term in
    its case-wise form (both-nonnegative disagreement vs. half the unhalved
    dominant-class sum).
    """

    value: float
    case_tag: CaseTag
    a: float
    b: float
    pim: float
    group_clutter: float
    dominant_pair: DominantPair
    definition_value: float
    casewise_group_clutter: float

    def as_dict(self) -> dict:
        pair = self.dominant_pair
        return {
            "value": self.value,
            "case_tag": self.case_tag.value,
            "A": self.a,
            "B": self.b,
            "pim": self.pim,
            "group_clutter": self.group_clutter,
            "casewise_group_clutter": self.casewise_group_clutter,
            "definition_value": self.definition_value,
            "omega": pair.omega,
            "omega_tilde": pair.omega_tilde,
            "nondominant_set": list(pair.nondominant_set),
            "labels_agree": pair.labels_agree,
        }


def _prepare(p, q):
    p, q = validate(p), validate(q)
    return p.probs, q.probs, dominant_pair(p, q)


def _case(pair: DominantPair, a: float, b: float) -> CaseTag:
    if pair.labels_agree:
        return CaseTag.LABEL_AGREEMENT
    if a >= 0 and b >= 0:
        return CaseTag.DISAGREE_BOTH_NONNEGATIVE
    if a < 0 and b < 0:
        raise InvariantViolation(f"both dominant-class terms negative: a={a!r}, b={b!r}")
    return CaseTag.DISAGREE_MIXED_SIGN


def delta_definition(p, q) -> float:
    """Total variation over the events {w, wt, everything else}."""
    pp, qq, pair = _prepare(p, q)
    dom = math.fsum(abs(qq[i] - pp[i]) for i in pair.dominant_set)
    rest = math.fsum(qq[i] - pp[i] for i in pair.nondominant_set)
    return 0.5 * (dom + abs(rest))


def _closed_form(case: CaseTag, a: float, b: float) -> float:
    if case is CaseTag.LABEL_AGREEMENT:
        return abs(b)
    if case is CaseTag.DISAGREE_BOTH_NONNEGATIVE:
        return max(a, b)
    return abs(a) + abs(b)


def delta_divergence(p, q) -> DeltaBreakdown:
    pp, qq, pair = _prepare(p, q)
    w, wt = pair.omega, pair.omega_tilde
    a = qq[wt] - pp[wt]
    b = pp[w] - qq[w]
    case = _case(pair, a, b)
    value = _closed_form(case, a, b)
    definition = delta_definition(p, q)
    if abs(definition - value) > TOL:
        raise InvariantViolation(
            f"closed form {value!r} disagrees with definition {definition!r} for {pp}, {qq}"
        )

    if case is CaseTag.LABEL_AGREEMENT:
        pim = 0.5 * abs(b)
        # complement event has probabilities 1 - p[w] and 1 - q[w]
        group = 0.5 * abs(b)
        unhalved_pim = abs(b)
    else:
        pim = 0.5 * (abs(a) + abs(b))
        group = 0.5 * abs(a - b)
        unhalved_pim = abs(a) + abs(b)
    if case is CaseTag.DISAGREE_BOTH_NONNEGATIVE:
        casewise = 0.5 * abs(qq[wt] + qq[w] - pp[w] - pp[wt])
    else:
        casewise = 0.5 * unhalved_pim

    return DeltaBreakdown(
        value=value,
        case_tag=case,
        a=a,
        b=b,
        pim=pim,
        group_clutter=group,
        dominant_pair=pair,
        definition_value=definition,
        casewise_group_clutter=casewise,
    )


def delta_clutter(p, q) -> tuple[float, float]:
    """Nondominant-class contribution to Delta divergence and to total variation.

    Returns ``(delta_clutter, tv_clutter)``; the first never exceeds the second.
    """
    pp, qq, pair = _prepare(p, q)
    rest = pair.nondominant_set
    merged = 0.5 * abs(math.fsum(pp[i] - qq[i] for i in rest))
    spread = 0.5 * math.fsum(abs(pp[i] - qq[i]) for i in rest)
    return merged, spread


def delta_star(p, q) -> MeasureValue:
    pp, qq, pair = _prepare(p, q)
    w, wt = pair.omega, pair.omega_tilde
    return MeasureValue(0.5 * (abs(pp[w] - qq[w]) + abs(qq[wt] - pp[wt])), "delta-star")


def delta_max_closed_form(p, q) -> float:
    """Case-wise rearranged form of :func:`delta_max`, used as a cross-check."""
    pp, qq, pair = _prepare(p, q)
    w, wt = pair.omega, pair.omega_tilde
    if pair.labels_agree:
        return 0.5 * abs(pp[w] - qq[w])
    half_top = 0.5 * (pp[w] + qq[wt])
    if pp[w] - qq[w] < 0:
        return half_top - pp[wt]
    if qq[wt] - pp[wt] < 0:
        return half_top - qq[w]
    return half_top - min(qq[w], pp[wt])


def delta_max(p, q) -> MeasureValue:
    pp, qq, pair = _prepare(p, q)
    w, wt = pair.omega, pair.omega_tilde
    ind = 0.0 if pair.labels_agree else 1.0
    first = abs(pp[w] - qq[w]) + ind * abs(qq[wt] - qq[w])
    second = abs(qq[wt] - pp[wt]) + ind * abs(pp[w] - pp[wt])
    value = 0.5 * max(first, second)
    check = delta_max_closed_form(p, q)
    if abs(check - value) > TOL:
        raise InvariantViolation(f"delta_max forms disagree: {value!r} vs {check!r}")
    return MeasureValue(value, "delta-max")


@dataclass(frozen=True)
class RelationshipReport:
    delta: float
    delta_star: float
    total_variation: float
    star_below_delta: bool
    delta_below_twice_star: bool
    delta_below_tv: bool
    # None unless m == 2
    delta_equals_tv: Optional[bool]
    case_branch_matches: bool
    strictly_below_tv: bool

    @property
    def all_hold(self) -> bool:
        return (
            self.star_below_delta
            and self.delta_below_twice_star
            and self.delta_below_tv
            and self.delta_equals_tv is not False
            and self.case_branch_matches
        )


def delta_relationships(p, q) -> RelationshipReport:
    """Evaluate the ordering relations between Delta, Delta* and total variation."""
    p, q = validate(p), validate(q)
    br = delta_divergence(p, q)
    star = delta_star(p, q).value
    tv = total_variation(p, q).value
    d = br.value
    if br.case_tag is CaseTag.LABEL_AGREEMENT:
        branch = star
    elif br.case_tag is CaseTag.DISAGREE_BOTH_NONNEGATIVE:
        branch = max(abs(br.a), abs(br.b))
    else:
        branch = 2 * star
    return RelationshipReport(
        delta=d,
        delta_star=star,
        total_variation=tv,
        star_below_delta=star <= d + TOL,
        delta_below_twice_star=d <= 2 * star + TOL,
        delta_below_tv=d <= tv + TOL,
        delta_equals_tv=abs(d - tv) <= TOL if p.m == 2 else None,
        case_branch_matches=abs(d - branch) <= TOL,
        strictly_below_tv=d < tv - TOL,
    )
