import logging
from dataclasses import dataclass
from typing import Callable, List, Union

from core.errors import AnchorMissing
from core.logical_form import LogicalForm, Node, anchor_roles, string_of
from core.models import Instance
from core.predicates import ANCHOR_PREDICATES, COUNTING_PREDICATES, Predicate
from execution.geometry import LEFT, RIGHT, Span, gap, inside, side_distance, violation, within
from utils.text import find_occurrences, query_tokens

logger = logging.getLogger("next.execution.strict")

PositionTest = Callable[[Span], bool]


@dataclass(frozen=True)
class Directional:
    """Left/Right of every reference span; usable as a plain position test."""
    side: str
    refs: List[Span]

    def distances(self, occ: Span):
        for ref in self.refs:
            d = side_distance(self.side, ref, occ)
            if d is not None:
                yield d

    def __call__(self, occ: Span) -> bool:
        return any(True for _ in self.distances(occ))


def check_anchors(root: Node, x: Instance) -> None:
    missing = [role.value for role in anchor_roles(root) if role not in x.anchors]
    if missing:
        raise AnchorMissing(f"form {root} references {', '.join(sorted(missing))} "
                            f"absent from instance {x.instance_id or '<unnamed>'}")


class _StrictEvaluator:
    def __init__(self, x: Instance):
        self.x = x
        self.tokens = x.lower_tokens

    def occurrences(self, node: Node) -> List[Span]:
        return find_occurrences(self.tokens, query_tokens(string_of(node)))

    def refs(self, node: Node) -> List[Span]:
        if node.predicate in ANCHOR_PREDICATES:
            return [self.x.span(ANCHOR_PREDICATES[node.predicate])]
        return self.occurrences(node)

    def query(self, node: Node) -> List[Span]:
        """Occurrences that an Is/Occur clause ranges over."""
        p = node.predicate
        if p in ANCHOR_PREDICATES:
            return self.refs(node)
        if p is Predicate.WORD:
            return self.occurrences(node.args[0])
        if p is Predicate.CONTAINS:
            region = self.refs(node.args[0])[0]
            return [o for o in self.occurrences(node.args[1]) if inside(o, region)]
        if p is Predicate.LINK:
            region = gap(self.refs(node.args[0])[0], self.refs(node.args[1])[0])
            return [o for o in self.occurrences(node.args[2]) if inside(o, region)]
        raise TypeError(f"{node} is not a query")

    def position(self, node: Node) -> Union[PositionTest, Directional]:
        p = node.predicate
        if p in (Predicate.LEFT, Predicate.RIGHT):
            return Directional(LEFT if p is Predicate.LEFT else RIGHT, self.refs(node.args[0]))
        if p is Predicate.BETWEEN:
            regions = [gap(a, b) for a in self.refs(node.args[0]) for b in self.refs(node.args[1])]
            return lambda occ: any(inside(occ, r) for r in regions)
        if p is Predicate.WITHIN:
            bound = self.integer(node.args[0])
            refs = self.refs(node.args[1])
            return lambda occ: any(within(bound, ref, occ) for ref in refs)
        if p is Predicate.DIRECT:
            directional = self.position(node.args[0])
            return lambda occ: any(violation(p, d) <= 0 for d in directional.distances(occ))
        if p in COUNTING_PREDICATES:
            directional = self.position(node.args[0])
            bound = self.integer(node.args[1])
            return lambda occ: any(violation(p, d, bound) <= 0 for d in directional.distances(occ))
        raise TypeError(f"{node} is not a position")

    def integer(self, node: Node) -> int:
        if node.is_literal:
            return int(node.value)
        if node.predicate is Predicate.INT:
            return int(node.args[0].value)
        if node.predicate is Predicate.NUMBER_OF:
            test = self.position(node.args[0])
            return sum(1 for i in range(len(self.tokens)) if test((i, i + 1)))
        raise TypeError(f"{node} is not an integer")

    def truth(self, node: Node) -> bool:
        p = node.predicate
        if p is Predicate.TRUE:
            return True
        if p is Predicate.FALSE:
            return False
        if p is Predicate.BECAUSE:
            return self.truth(node.args[0])
        if p in (Predicate.AND, Predicate.SEPARATOR):
            return self.truth(node.args[0]) and self.truth(node.args[1])
        if p is Predicate.OR:
            return self.truth(node.args[0]) or self.truth(node.args[1])
        if p is Predicate.NOT:
            return not self.truth(node.args[0])
        if p is Predicate.OCCUR:
            return bool(self.query(node.args[0]))
        if p is Predicate.IS:
            test = self.position(node.args[1])
            return any(test(occ) for occ in self.query(node.args[0]))
        if p in COUNTING_PREDICATES:
            return violation(p, self.integer(node.args[0]), self.integer(node.args[1])) <= 0
        raise TypeError(f"{node} is not a truth-valued clause")


def exec_strict(form: Union[LogicalForm, Node], x: Instance) -> int:
    """1 iff every clause holds under exact keyword matching and strict positions."""
    root = form.root if isinstance(form, LogicalForm) else form
    check_anchors(root, x)
    return int(_StrictEvaluator(x).truth(root))
