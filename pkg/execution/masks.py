"""Mask sequences for the deterministic function and soft counting modules.

mask[i] scores the occurrence that starts at token i and covers `width`
tokens; starts whose occurrence would run past the sentence get 0.
"""
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from core.models import Instance, SoftConfig
from core.predicates import AnchorRole, COUNTING_PREDICATES, Predicate
from execution.geometry import LEFT, RIGHT, Span, counting_score, gap, inside, side_distance, violation, within


def _resolve(x: Instance, anchor: Union[AnchorRole, Span]) -> Span:
    return x.span(anchor) if isinstance(anchor, AnchorRole) else tuple(anchor)


def _starts(n_tokens: int, width: int) -> Iterable[int]:
    return range(max(n_tokens - width + 1, 0))


def directional_mask(n_tokens: int, refs: Sequence[Span], side: str, width: int = 1,
                     predicate: Optional[Predicate] = None, bound: Optional[int] = None,
                     slack_width: int = 0, mu: float = 0.5) -> np.ndarray:
    """Positions on `side` of any reference; with a counting predicate, scored by distance."""
    mask = np.zeros(n_tokens)
    for i in _starts(n_tokens, width):
        occ = (i, i + width)
        best = 0.0
        for ref in refs:
            d = side_distance(side, ref, occ)
            if d is None:
                continue
            if predicate is None:
                best = 1.0
            else:
                best = max(best, counting_score(violation(predicate, d, bound), slack_width, mu))
        mask[i] = best
    return mask


def between_mask(n_tokens: int, firsts: Sequence[Span], seconds: Sequence[Span], width: int = 1) -> np.ndarray:
    regions = [gap(a, b) for a in firsts for b in seconds]
    mask = np.zeros(n_tokens)
    for i in _starts(n_tokens, width):
        if any(inside((i, i + width), r) for r in regions):
            mask[i] = 1.0
    return mask


def region_mask(n_tokens: int, region: Optional[Span], width: int = 1) -> np.ndarray:
    mask = np.zeros(n_tokens)
    for i in _starts(n_tokens, width):
        if inside((i, i + width), region):
            mask[i] = 1.0
    return mask


def within_mask(n_tokens: int, bound: int, refs: Sequence[Span], width: int = 1) -> np.ndarray:
    mask = np.zeros(n_tokens)
    for i in _starts(n_tokens, width):
        if any(within(bound, ref, (i, i + width)) for ref in refs):
            mask[i] = 1.0
    return mask


def deterministic_mask(x: Instance, anchor: Union[AnchorRole, Span], fn: Predicate,
                       other: Union[AnchorRole, Span, None] = None, bound: Optional[int] = None,
                       width: int = 1) -> Union[np.ndarray, int]:
    """Left/Right/Between/Within as {0,1} masks. NumberOf counts the tokens between
    `anchor` and `other`, or within `bound` tokens of `anchor` when `other` is None."""
    ref = _resolve(x, anchor)
    n = len(x)
    if fn is Predicate.LEFT:
        return directional_mask(n, [ref], LEFT, width)
    if fn is Predicate.RIGHT:
        return directional_mask(n, [ref], RIGHT, width)
    if fn is Predicate.BETWEEN:
        return between_mask(n, [ref], [_resolve(x, other)], width)
    if fn is Predicate.WITHIN:
        return within_mask(n, bound, [ref], width)
    if fn is Predicate.NUMBER_OF:
        if other is not None:
            region = between_mask(n, [ref], [_resolve(x, other)])
        else:
            region = within_mask(n, bound, [ref])
        return int(np.count_nonzero(region == 1.0))
    raise ValueError(f"{fn.value} is not a deterministic function")


def counting_mask(x: Instance, anchor: Union[AnchorRole, Span], side: str, constraint: Predicate,
                  bound: Optional[int], cfg: SoftConfig, width: int = 1) -> np.ndarray:
    """Distance constraint relative to an anchor: 1 when satisfied, μ within the slack range, else 0."""
    if constraint not in COUNTING_PREDICATES:
        raise ValueError(f"{constraint.value} is not a counting predicate")
    return directional_mask(len(x), [_resolve(x, anchor)], side, width, constraint, bound,
                            cfg.effective_slack, cfg.mu)
