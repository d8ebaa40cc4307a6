import numpy as np
import pytest

from core.models import SoftConfig
from core.predicates import AnchorRole, Predicate
from execution.geometry import LEFT, RIGHT, counting_score, side_distance, violation
from execution.masks import counting_mask, deterministic_mask


def test_side_distance_is_one_for_adjacent_spans():
    assert side_distance(LEFT, (5, 6), (4, 5)) == 1
    assert side_distance(RIGHT, (5, 6), (6, 7)) == 1
    assert side_distance(LEFT, (5, 6), (6, 7)) is None
    assert side_distance(RIGHT, (5, 7), (6, 7)) is None


def test_left_mask(instance):
    x = instance(" ".join("abcdefghij"), term=(5, 6))
    mask = deterministic_mask(x, AnchorRole.TERM, Predicate.LEFT)
    np.testing.assert_array_equal(mask, [1, 1, 1, 1, 1, 0, 0, 0, 0, 0])


def test_between_mask_excludes_anchors(instance):
    x = instance(" ".join("abcdefghij"), subj=(2, 3), obj=(7, 8))
    mask = deterministic_mask(x, AnchorRole.SUBJECT, Predicate.BETWEEN, other=AnchorRole.OBJECT)
    np.testing.assert_array_equal(mask, [0, 0, 0, 1, 1, 1, 1, 0, 0, 0])


def test_number_of_between(instance):
    x = instance(" ".join("abcdefghij"), subj=(2, 3), obj=(7, 8))
    assert deterministic_mask(x, AnchorRole.SUBJECT, Predicate.NUMBER_OF, other=AnchorRole.OBJECT) == 4


def test_within_mask(instance):
    x = instance(" ".join("abcdefghij"), term=(5, 6))
    mask = deterministic_mask(x, AnchorRole.TERM, Predicate.WITHIN, bound=2)
    np.testing.assert_array_equal(mask, [0, 0, 0, 1, 1, 0, 1, 1, 0, 0])


def test_wide_occurrences_that_run_off_the_end_get_zero(instance):
    x = instance("a b c d", term=(0, 1))
    mask = deterministic_mask(x, AnchorRole.TERM, Predicate.RIGHT, width=2)
    np.testing.assert_array_equal(mask, [0, 1, 1, 0])


@pytest.mark.parametrize("distance, expected", [(2, 1.0), (3, 1.0), (4, 0.5), (5, 0.5), (7, 0.0)])
def test_counting_mask_slack(instance, distance, expected):
    # "precedes OBJECT by no more than 3 words"
    x = instance(" ".join(["w"] * 12), obj=(10, 11))
    cfg = SoftConfig(mu=0.5, slack_width=2)
    mask = counting_mask(x, AnchorRole.OBJECT, LEFT, Predicate.AT_MOST, 3, cfg)
    assert mask[10 - distance] == expected


def test_counting_mask_without_soft_counting_is_strict(instance):
    x = instance(" ".join(["w"] * 12), obj=(10, 11))
    cfg = SoftConfig(mu=0.5, slack_width=2, soft_counting=False)
    mask = counting_mask(x, AnchorRole.OBJECT, LEFT, Predicate.AT_MOST, 3, cfg)
    assert set(np.unique(mask)) <= {0.0, 1.0}
    assert mask[6] == 0.0 and mask[7] == 1.0


def test_violation_and_counting_score():
    assert violation(Predicate.DIRECT, 1) == 0
    assert violation(Predicate.DIRECT, 3) == 2
    assert violation(Predicate.AT_LEAST, 2, 3) == 1
    assert violation(Predicate.LESS_THAN, 3, 3) == 1
    assert counting_score(0, 2, 0.5) == 1.0
    assert counting_score(2, 2, 0.5) == 0.5
    assert counting_score(3, 2, 0.5) == 0.0
    with pytest.raises(ValueError):
        violation(Predicate.LEFT, 1)
