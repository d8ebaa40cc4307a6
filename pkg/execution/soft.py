import logging
from dataclasses import dataclass
from typing import Callable, List, Protocol, Sequence, Union

import numpy as np

from core.logical_form import LogicalForm, Node, string_of
from core.models import Instance, MatchResult, SoftConfig
from core.predicates import ANCHOR_PREDICATES, COUNTING_PREDICATES, Predicate
from execution.fuzzy import luk_and, luk_not, luk_or
from execution.geometry import LEFT, RIGHT, Span, counting_score, gap, violation
from execution.masks import between_mask, directional_mask, region_mask, within_mask
from execution.strict import check_anchors
from utils.text import find_occurrences, query_tokens

logger = logging.getLogger("next.execution.soft")


class Matcher(Protocol):
    def string_match_scores(self, x: Instance, query: Sequence[str]) -> np.ndarray:
        ...


@dataclass(frozen=True)
class ScoreSequence:
    """Per-token scores of a query, plus the number of tokens the query covers."""
    scores: np.ndarray
    width: int


MaskFn = Callable[[int], np.ndarray]


@dataclass(frozen=True)
class DirectionalMask:
    side: str
    refs: List[Span]
    n_tokens: int

    def __call__(self, width: int) -> np.ndarray:
        return directional_mask(self.n_tokens, self.refs, self.side, width)


class _SoftEvaluator:
    def __init__(self, x: Instance, matcher: Matcher, cfg: SoftConfig):
        self.x = x
        self.n = len(x)
        self.matcher = matcher
        self.cfg = cfg

    def refs(self, node: Node) -> List[Span]:
        if node.predicate in ANCHOR_PREDICATES:
            return [self.x.span(ANCHOR_PREDICATES[node.predicate])]
        return find_occurrences(self.x.lower_tokens, query_tokens(string_of(node)))

    def string_scores(self, node: Node) -> ScoreSequence:
        tokens = query_tokens(string_of(node))
        return ScoreSequence(np.asarray(self.matcher.string_match_scores(self.x, tokens), dtype=float),
                             len(tokens))

    def query(self, node: Node) -> ScoreSequence:
        p = node.predicate
        if p in ANCHOR_PREDICATES:
            start, end = self.x.span(ANCHOR_PREDICATES[p])
            scores = np.zeros(self.n)
            scores[start] = 1.0
            return ScoreSequence(scores, end - start)
        if p is Predicate.WORD:
            return self.string_scores(node.args[0])
        if p is Predicate.CONTAINS:
            seq = self.string_scores(node.args[1])
            region = self.refs(node.args[0])[0]
            return ScoreSequence(seq.scores * region_mask(self.n, region, seq.width), seq.width)
        if p is Predicate.LINK:
            seq = self.string_scores(node.args[2])
            region = gap(self.refs(node.args[0])[0], self.refs(node.args[1])[0])
            return ScoreSequence(seq.scores * region_mask(self.n, region, seq.width), seq.width)
        raise TypeError(f"{node} is not a query")

    def position(self, node: Node) -> Union[MaskFn, DirectionalMask]:
        p = node.predicate
        if p in (Predicate.LEFT, Predicate.RIGHT):
            return DirectionalMask(LEFT if p is Predicate.LEFT else RIGHT, self.refs(node.args[0]), self.n)
        if p is Predicate.BETWEEN:
            firsts, seconds = self.refs(node.args[0]), self.refs(node.args[1])
            return lambda width: between_mask(self.n, firsts, seconds, width)
        if p is Predicate.WITHIN:
            bound, refs = self.integer(node.args[0]), self.refs(node.args[1])
            return lambda width: within_mask(self.n, bound, refs, width)
        if p in COUNTING_PREDICATES:
            d = self.position(node.args[0])
            bound = self.integer(node.args[1]) if len(node.args) > 1 else None
            slack, mu = self.cfg.effective_slack, self.cfg.mu
            return lambda width: directional_mask(self.n, d.refs, d.side, width, p, bound, slack, mu)
        raise TypeError(f"{node} is not a position")

    def integer(self, node: Node) -> int:
        if node.is_literal:
            return int(node.value)
        if node.predicate is Predicate.INT:
            return int(node.args[0].value)
        if node.predicate is Predicate.NUMBER_OF:
            # counts stay exact: only positions that fully satisfy the range
            mask = self.position(node.args[0])(1)
            return int(np.count_nonzero(mask == 1.0))
        raise TypeError(f"{node} is not an integer")

    def score(self, node: Node) -> float:
        p = node.predicate
        if p is Predicate.TRUE:
            return 1.0
        if p is Predicate.FALSE:
            return 0.0
        if p is Predicate.BECAUSE:
            return self.score(node.args[0])
        if p in (Predicate.AND, Predicate.SEPARATOR):
            return luk_and(self.score(node.args[0]), self.score(node.args[1]))
        if p is Predicate.OR:
            return luk_or(self.score(node.args[0]), self.score(node.args[1]))
        if p is Predicate.NOT:
            return luk_not(self.score(node.args[0]))
        if p is Predicate.OCCUR:
            return _max_pool(self.query(node.args[0]).scores)
        if p is Predicate.IS:
            seq = self.query(node.args[0])
            mask = self.position(node.args[1])(seq.width)
            return _max_pool(seq.scores * mask)
        if p in COUNTING_PREDICATES:
            miss = violation(p, self.integer(node.args[0]), self.integer(node.args[1]))
            return counting_score(miss, self.cfg.effective_slack, self.cfg.mu)
        raise TypeError(f"{node} is not a truth-valued clause")


def _max_pool(values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    return float(np.clip(values.max(), 0.0, 1.0))


def soft_score(form: Union[LogicalForm, Node], x: Instance, matcher: Matcher, cfg: SoftConfig) -> float:
    root = form.root if isinstance(form, LogicalForm) else form
    check_anchors(root, x)
    return _SoftEvaluator(x, matcher, cfg).score(root)


def exec_soft(form: LogicalForm, x: Instance, matcher: Matcher, cfg: SoftConfig) -> MatchResult:
    """Matching score u_s of `x` against `form`, aggregated with Łukasiewicz logic."""
    score = soft_score(form, x, matcher, cfg)
    logger.debug(f"[{x.instance_id}] {form.form_id or form.sexpr}: u_s={score:.4f}")
    return MatchResult(form_id=form.form_id, score=score, label=form.label)
