from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uqfilter import (
    IGNORE,
    KEEP,
    REASON_ALL_ABSENT,
    REASON_UNCERTAIN_ONLY,
    ClassInterval,
    FilterOutcome,
    ValidationError,
    filter_prediction,
    ternary_assign,
)


def interval(lo: float, hi: float) -> ClassInterval:
    return ClassInterval(mean=(lo + hi) / 2, std=(hi - lo) / 2, z=1.0)


def test_ternary_truth_table():
    thr = 0.5
    assert ternary_assign(interval(0.6, 0.8), thr) == 1  # entirely above
    assert ternary_assign(interval(0.1, 0.3), thr) == 0  # entirely below
    assert ternary_assign(interval(0.4, 0.6), thr) == -1  # straddles
    assert ternary_assign(interval(0.5, 0.7), thr) == -1  # touches from above
    assert ternary_assign(interval(0.3, 0.5), thr) == -1  # touches from below
    assert ternary_assign(interval(0.5, 0.5), thr) == -1  # point on threshold
    point = ClassInterval(mean=0.7, std=0.0, z=2.0)  # point above
    assert ternary_assign(point, thr) == 1


def test_filter_keep_on_confident_class():
    out = filter_prediction(np.array([0, 1, 0]))
    assert out.kind == KEEP
    assert out.reason is None
    assert not out.benefit_of_doubt
    np.testing.assert_array_equal(out.final, [0, 1, 0])


def test_filter_benefit_of_the_doubt():
    out = filter_prediction(np.array([0, -1, 0]))
    assert out.kind == KEEP
    assert out.benefit_of_doubt
    np.testing.assert_array_equal(out.final, [0, 1, 0])
    # A single class counts: one class, verdict -1.
    lone = filter_prediction(np.array([-1]))
    assert lone.kind == KEEP and lone.benefit_of_doubt


def test_filter_mixed_confident_and_uncertain_keeps():
    out = filter_prediction(np.array([1, -1, 0]))
    assert out.kind == KEEP
    assert not out.benefit_of_doubt
    np.testing.assert_array_equal(out.final, [1, 0, 0])  # -1 demoted to 0


def test_filter_ignore_reasons():
    unc = filter_prediction(np.array([-1, -1, 0]))
    assert unc.kind == IGNORE and unc.reason == REASON_UNCERTAIN_ONLY
    assert unc.final is None
    absent = filter_prediction(np.array([0, 0, 0]))
    assert absent.kind == IGNORE and absent.reason == REASON_ALL_ABSENT


def test_filter_rejects_bad_vectors():
    for bad in (np.array([]), np.array([2, 0]), np.array([[1, 0]])):
        with pytest.raises(ValidationError):
            filter_prediction(bad)


def test_outcome_invariants():
    with pytest.raises(ValidationError):
        FilterOutcome(kind=KEEP, final=None, reason=None)
    with pytest.raises(ValidationError):
        FilterOutcome(kind=KEEP, final=np.array([0, 0]), reason=None)
    with pytest.raises(ValidationError):
        FilterOutcome(kind=IGNORE, final=np.array([1]), reason=REASON_ALL_ABSENT)
    with pytest.raises(ValidationError):
        FilterOutcome(kind=IGNORE, final=None, reason="nope")
    with pytest.raises(ValidationError):
        FilterOutcome(kind="maybe", final=None, reason=None)


def rule_table_oracle(verdict: tuple[int, ...]) -> tuple[str, str | None, tuple[int, ...] | None, bool]:
    """Plain-python restatement of the keep/ignore rules, used as an oracle."""
    ones = [i for i, v in enumerate(verdict) if v == 1]
    uncertain = [i for i, v in enumerate(verdict) if v == -1]
    n = len(verdict)
    if len(uncertain) == 1 and not ones:
        final = tuple(1 if i == uncertain[0] else 0 for i in range(n))
        return KEEP, None, final, True
    if ones:
        final = tuple(1 if i in ones else 0 for i in range(n))
        return KEEP, None, final, False
    if uncertain:
        return IGNORE, REASON_UNCERTAIN_ONLY, None, False
    return IGNORE, REASON_ALL_ABSENT, None, False


def test_filter_agrees_with_rule_table_exhaustively():
    checked = 0
    for n in range(1, 6):
        for verdict in product((-1, 0, 1), repeat=n):
            got = filter_prediction(np.array(verdict))
            kind, reason, final, bod = rule_table_oracle(verdict)
            assert got.kind == kind, verdict
            assert got.reason == reason, verdict
            assert got.benefit_of_doubt == bod, verdict
            if final is None:
                assert got.final is None, verdict
            else:
                assert tuple(int(x) for x in got.final) == final, verdict
            checked += 1
    assert checked == 363  # 3 + 9 + 27 + 81 + 243


@given(st.lists(st.sampled_from([-1, 0, 1]), min_size=1, max_size=40))
def test_filter_agrees_with_rule_table_random(verdict):
    got = filter_prediction(np.array(verdict))
    kind, reason, final, bod = rule_table_oracle(tuple(verdict))
    assert (got.kind, got.reason, got.benefit_of_doubt) == (kind, reason, bod)
    if final is not None:
        assert tuple(int(x) for x in got.final) == final
