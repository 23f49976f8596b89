import math

import pytest
from hypothesis import given

from deltadiv.errors import (
    DimensionMismatch,
    NegativeEntry,
    NonFinite,
    OutOfRange,
    SumOutOfTolerance,
    TooFewClasses,
)
from deltadiv.simplex import (
    DiscreteDistribution,
    dominant,
    dominant_pair,
    entropy,
    parse_distribution,
    same_size,
    surprisal,
    validate,
)

from conftest import distributions


def test_valid_two_class():
    d = validate([0.5, 0.5])
    assert d.m == 2
    assert d.probs == (0.5, 0.5)


@pytest.mark.parametrize(
    "raw, err",
    [
        ([0.5, 0.6], SumOutOfTolerance),
        ([0.5, -0.1, 0.6], NegativeEntry),
        ([1.0], TooFewClasses),
        ([], TooFewClasses),
        ([0.5, float("nan")], NonFinite),
        ([0.5, float("inf")], NonFinite),
    ],
)
def test_rejects(raw, err):
    with pytest.raises(err):
        validate(raw)


def test_renormalizes_within_tolerance():
    d = validate([0.5 + 4e-10, 0.5])
    assert math.fsum(d.probs) == pytest.approx(1.0, abs=1e-15)


def test_exact_sum_kept_verbatim():
    raw = [0.1, 0.2, 0.7]
    assert validate(raw).probs == tuple(raw)


def test_immutable():
    d = validate([0.3, 0.7])
    with pytest.raises(AttributeError):
        d.foo = 1
    assert validate(d) is d
    assert d == DiscreteDistribution([0.3, 0.7])
    assert hash(d) == hash(DiscreteDistribution([0.3, 0.7]))


def test_parse_comma_and_json():
    assert parse_distribution("0.5,0.3,0.2").probs == (0.5, 0.3, 0.2)
    assert parse_distribution(" [0.25, 0.75] ").probs == (0.25, 0.75)


def test_parse_errors_carry_position():
    with pytest.raises(NonFinite, match="entry 1"):
        parse_distribution("0.5,abc,0.5")
    with pytest.raises(NonFinite, match="position"):
        parse_distribution("[0.5, 0.5")


def test_same_size():
    with pytest.raises(DimensionMismatch):
        same_size(validate([0.5, 0.5]), validate([0.2, 0.3, 0.5]))


@pytest.mark.parametrize(
    "raw, expected", [([0.2, 0.7, 0.1], 1), ([0.4, 0.4, 0.2], 0), ([1.0, 0.0], 0), ([0.1, 0.45, 0.45], 1)]
)
def test_dominant(raw, expected):
    assert dominant(validate(raw)) == expected


def test_dominant_pair_sets():
    pair = dominant_pair(validate([0.6, 0.3, 0.1]), validate([0.2, 0.7, 0.1]))
    assert (pair.omega, pair.omega_tilde) == (0, 1)
    assert not pair.labels_agree
    assert tuple(pair.nondominant_set) == (2,)
    agree = dominant_pair(validate([0.5, 0.3, 0.2]), validate([0.5, 0.2, 0.3]))
    assert agree.labels_agree
    assert tuple(agree.nondominant_set) == (1, 2)


@pytest.mark.parametrize("p, expected", [(1.0, 0.0), (0.0, math.inf), (0.25, 2.0), (0.5, 1.0)])
def test_surprisal(p, expected):
    assert surprisal(p) == expected


@pytest.mark.parametrize("p", [-0.1, 1.1])
def test_surprisal_range(p):
    with pytest.raises(OutOfRange):
        surprisal(p)


def test_surprisal_natural_base():
    assert surprisal(0.5, base=math.e) == pytest.approx(math.log(2), abs=1e-15)


@pytest.mark.parametrize(
    "raw, expected", [([1, 0, 0], 0.0), ([0.5, 0.5], 1.0), ([0.25] * 4, 2.0), ([0.125] * 8, 3.0)]
)
def test_entropy(raw, expected):
    assert entropy(validate(raw)) == pytest.approx(expected, abs=1e-15)


@given(distributions())
def test_entropy_bounds(p):
    d = validate(p)
    h = entropy(d)
    assert -1e-12 <= h <= math.log2(d.m) + 1e-12


@given(distributions())
def test_dominant_is_lowest_max(p):
    d = validate(p)
    i = dominant(d)
    assert d[i] == max(d.probs)
    assert all(d[j] < d[i] for j in range(i))
