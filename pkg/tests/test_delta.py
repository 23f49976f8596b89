import math

import pytest
from hypothesis import given

from deltadiv.classical import total_variation
from deltadiv.simplex import validate
from deltadiv.delta import (
    CaseTag,
    delta_clutter,
    delta_definition,
    delta_divergence,
    delta_max,
    delta_max_closed_form,
    delta_relationships,
    delta_star,
)

from conftest import pairs


def test_identical():
    br = delta_divergence([0.2, 0.3, 0.5], [0.2, 0.3, 0.5])
    assert br.value == 0.0
    assert br.case_tag is CaseTag.LABEL_AGREEMENT


def test_both_nonnegative_case():
    br = delta_divergence([0.6, 0.3, 0.1], [0.2, 0.7, 0.1])
    assert (br.dominant_pair.omega, br.dominant_pair.omega_tilde) == (0, 1)
    assert br.a == pytest.approx(0.4, abs=1e-15)
    assert br.b == pytest.approx(0.4, abs=1e-15)
    assert br.case_tag is CaseTag.DISAGREE_BOTH_NONNEGATIVE
    assert br.value == pytest.approx(0.4, abs=1e-15)
    assert br.definition_value == pytest.approx(0.4, abs=1e-15)


def test_mixed_sign_case():
    br = delta_divergence([0.45, 0.40, 0.15], [0.30, 0.38, 0.32])
    assert (br.dominant_pair.omega, br.dominant_pair.omega_tilde) == (0, 1)
    assert br.a == pytest.approx(-0.02, abs=1e-15)
    assert br.b == pytest.approx(0.15, abs=1e-15)
    assert br.case_tag is CaseTag.DISAGREE_MIXED_SIGN
    # half of (0.02 + 0.15 + |-0.17|)
    assert br.value == pytest.approx(0.17, abs=1e-15)


def test_two_class_equals_tv():
    p, q = [0.7, 0.3], [0.4, 0.6]
    assert delta_divergence(p, q).value == pytest.approx(0.3, abs=1e-15)
    assert delta_divergence(p, q).value == pytest.approx(total_variation(p, q).value, abs=1e-15)


def test_breakdown_parts():
    br = delta_divergence([0.45, 0.40, 0.15], [0.30, 0.38, 0.32])
    assert br.pim + br.group_clutter == pytest.approx(br.value, abs=1e-15)
    d = br.as_dict()
    assert d["case_tag"] == "DisagreeMixedSign"
    assert d["omega"] == 0 and d["omega_tilde"] == 1
    assert d["nondominant_set"] == [2]


def test_clutter_examples():
    assert delta_clutter([0.5, 0.3, 0.2], [0.5, 0.3, 0.2]) == (0.0, 0.0)
    merged, spread = delta_clutter([0.5, 0.3, 0.2], [0.5, 0.2, 0.3])
    assert merged == pytest.approx(0.0, abs=1e-15)
    assert spread == pytest.approx(0.1, abs=1e-15)
    assert delta_clutter([0.7, 0.3], [0.4, 0.6]) == (0.0, 0.0)
    # two classes with agreement: the single nondominant class is its own merged event
    merged, spread = delta_clutter([0.7, 0.3], [0.6, 0.4])
    assert merged == spread == pytest.approx(0.05, abs=1e-15)


def test_delta_star_examples():
    assert delta_star([0.6, 0.3, 0.1], [0.2, 0.7, 0.1]).value == pytest.approx(0.4, abs=1e-15)
    assert delta_star([0.5, 0.3, 0.2], [0.5, 0.2, 0.3]).value == 0.0
    assert delta_star([0.3, 0.7], [0.3, 0.7]).value == 0.0


def test_delta_max_examples():
    p, q = [0.6, 0.3, 0.1], [0.2, 0.7, 0.1]
    assert delta_max(p, q).value == pytest.approx(0.45, abs=1e-15)
    # rearranged form: (0.6 + 0.7) / 2 - 0.2
    assert delta_max_closed_form(p, q) == pytest.approx(0.45, abs=1e-15)
    assert delta_max(p, p).value == 0.0


def test_relationships_examples():
    rep = delta_relationships([0.7, 0.3], [0.4, 0.6])
    assert rep.all_hold and rep.delta_equals_tv is True
    rep = delta_relationships([0.5, 0.2, 0.1, 0.1, 0.05, 0.05], [0.5, 0.1, 0.2, 0.05, 0.1, 0.05])
    assert rep.all_hold
    assert rep.delta_equals_tv is None
    assert rep.strictly_below_tv


def test_equality_when_tail_differences_share_sign():
    # all nondominant differences have the same sign: clutter terms coincide
    rep = delta_relationships([0.5, 0.2, 0.2, 0.1], [0.6, 0.15, 0.15, 0.1])
    assert rep.delta == pytest.approx(rep.total_variation, abs=1e-15)
    assert not rep.strictly_below_tv


@given(pairs())
def test_definition_equals_closed_form(pq):
    p, q = pq
    assert abs(delta_definition(p, q) - delta_divergence(p, q).value) <= 1e-12


@given(pairs())
def test_bounds_and_symmetry(pq):
    p, q = pq
    d = delta_divergence(p, q).value
    assert 0 <= d <= 1
    assert abs(d - delta_divergence(q, p).value) <= 1e-12


@given(pairs())
def test_relations_hold(pq):
    p, q = pq
    assert delta_relationships(*pq).all_hold


@given(pairs())
def test_agreement_branch_is_exact(pq):
    p, q = (validate(x) for x in pq)
    br = delta_divergence(p, q)
    if br.case_tag is CaseTag.LABEL_AGREEMENT:
        w = br.dominant_pair.omega
        assert br.value == abs(p[w] - q[w])


@given(pairs())
def test_sign_lemma(pq):
    br = delta_divergence(*pq)
    if br.case_tag is not CaseTag.LABEL_AGREEMENT:
        assert not (br.a < 0 and br.b < 0)


@given(pairs())
def test_clutter_order_and_breakdown(pq):
    p, q = pq
    merged, spread = delta_clutter(p, q)
    assert merged <= spread + 1e-12
    br = delta_divergence(p, q)
    assert br.group_clutter == pytest.approx(br.casewise_group_clutter, abs=1e-12)
    assert br.pim + br.group_clutter == pytest.approx(br.value, abs=1e-12)


@given(pairs())
def test_delta_max_forms_agree(pq):
    p, q = pq
    assert abs(delta_max(p, q).value - delta_max_closed_form(p, q)) <= 1e-12


@given(pairs(min_m=3, max_m=3))
def test_delta_vs_tv_three_classes(pq):
    p, q = pq
    assert delta_divergence(p, q).value <= total_variation(p, q).value + 1e-12
    assert not math.isnan(delta_star(p, q).value)


@given(pairs(), pairs())
def test_tv_triangle(pq, rs):
    p, q = pq
    r = rs[0]
    if len(r) != len(p):
        return
    assert total_variation(p, r).value <= total_variation(p, q).value + total_variation(q, r).value + 1e-12


@given(pairs(min_m=2, max_m=2), pairs(min_m=2, max_m=2))
def test_two_class_delta_is_metric(pq, rs):
    p, q = pq
    r = rs[0]
    d = lambda x, y: delta_divergence(x, y).value
    assert d(p, r) <= d(p, q) + d(q, r) + 1e-12
    assert (d(p, q) == 0) == (p == q)
