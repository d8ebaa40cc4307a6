"""Token-position relations shared by strict and soft execution.

Spans are end-exclusive (start, end). An occurrence stands for the tokens a
query covers; a reference is an anchor span or an exact string occurrence.
"""
from typing import Optional, Tuple

from core.predicates import Predicate

Span = Tuple[int, int]

LEFT = "left"
RIGHT = "right"


def side_distance(side: str, ref: Span, occ: Span) -> Optional[int]:
    """Distance (>= 1) of `occ` from `ref` on `side`, or None if on the other side or overlapping."""
    if side == LEFT:
        return ref[0] - occ[1] + 1 if occ[1] <= ref[0] else None
    return occ[0] - ref[1] + 1 if occ[0] >= ref[1] else None


def gap(first: Span, second: Span) -> Optional[Span]:
    """The tokens strictly between two spans, in either order; None when they touch or overlap."""
    lo, hi = (first, second) if first[0] <= second[0] else (second, first)
    if lo[1] >= hi[0]:
        return None
    return lo[1], hi[0]


def inside(occ: Span, region: Optional[Span]) -> bool:
    return region is not None and region[0] <= occ[0] and occ[1] <= region[1]


def within(bound: int, ref: Span, occ: Span) -> bool:
    for side in (LEFT, RIGHT):
        d = side_distance(side, ref, occ)
        if d is not None and d <= bound:
            return True
    return False


def violation(predicate: Predicate, value: int, bound: Optional[int] = None) -> int:
    """How far `value` misses the counting constraint; <= 0 means satisfied."""
    if predicate is Predicate.DIRECT:
        return abs(value - 1)
    if predicate is Predicate.AT_MOST:
        return value - bound
    if predicate is Predicate.AT_LEAST:
        return bound - value
    if predicate is Predicate.MORE_THAN:
        return bound + 1 - value
    if predicate is Predicate.LESS_THAN:
        return value - bound + 1
    if predicate is Predicate.EQUALS:
        return abs(value - bound)
    raise ValueError(f"{predicate.value} is not a counting predicate")


def counting_score(miss: int, slack_width: int, mu: float) -> float:
    if miss <= 0:
        return 1.0
    if miss <= slack_width:
        return mu
    return 0.0
