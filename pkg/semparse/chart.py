"""CKY chart parsing over a CCG lexicon.

Preprocessing: quoted spans become NP string literals, digits become NUM,
SKIP words and phrases are dropped, and every maximal run of tokens that no
lexicon surface covers becomes one NP string literal. Combinators are forward
and backward application, forward and backward harmonic composition, and
coordination X CONJ X -> X.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.errors import LogicalFormError, NoParse
from core.logical_form import LogicalForm, Node
from core.predicates import Predicate
from semparse.categories import BACKWARD, FORWARD, Category, atomic, functional
from semparse.lexicon import Lexicon
from semparse.semantics import SemValue, apply, compose, coordinate, lexical_value, value_key
from utils.text import split_quoted

logger = logging.getLogger("next.semparse.chart")

FEATURE_NAMES = ("fapp", "bapp", "fcomp", "bcomp", "coord", "lex")
NUM_FEATURES = len(FEATURE_NAMES)
DEFAULT_MAX_CANDIDATES = 512

NP = atomic("NP")
NUM = atomic("NUM")
S = atomic("S")
CONJ = atomic("CONJ")

Span = Tuple[int, int]


@dataclass(frozen=True)
class Derivation:
    rule: str
    span: Span
    category: str
    children: Tuple["Derivation", ...] = ()
    surface: str = ""

    @property
    def rule_count(self) -> int:
        """Combinator applications (lexical leaves excluded)."""
        own = 0 if self.rule == "lex" else 1
        return own + sum(c.rule_count for c in self.children)

    def rules(self):
        yield self.rule
        for c in self.children:
            yield from c.rules()

    def features(self) -> np.ndarray:
        counts = Counter(self.rules())
        return np.array([counts.get(name, 0) for name in FEATURE_NAMES], dtype=float)

    def __str__(self) -> str:
        if self.rule == "lex":
            return f"{self.category}:{self.surface!r}"
        return f"{self.rule}({', '.join(str(c) for c in self.children)})"


@dataclass(frozen=True)
class ParseCandidate:
    form: LogicalForm
    features: np.ndarray = field(compare=False)
    derivation: Derivation

    @property
    def sexpr(self) -> str:
        return self.form.sexpr


@dataclass(frozen=True)
class _Item:
    category: Category
    value: SemValue
    derivation: Derivation


@dataclass(frozen=True)
class _Unit:
    text: str
    quoted: bool


def _better(a: Derivation, b: Derivation) -> bool:
    return (a.rule_count, str(a)) < (b.rule_count, str(b))


def preprocess(text: str, lexicon: Lexicon) -> List[_Unit]:
    """Split an explanation into parse units with SKIP phrases removed."""
    pieces = [_Unit(t, q) for t, q in split_quoted(text)]
    phrases = sorted(lexicon.skip_phrases, key=len, reverse=True)
    out: List[_Unit] = []
    i = 0
    while i < len(pieces):
        if not pieces[i].quoted:
            matched = next((p for p in phrases
                            if tuple(u.text for u in pieces[i:i + len(p)]) == p
                            and not any(u.quoted for u in pieces[i:i + len(p)])), None)
            if matched:
                i += len(matched)
                continue
        out.append(pieces[i])
        i += 1
    return out


def _lexical_items(units: List[_Unit], lexicon: Lexicon) -> Dict[Span, List[_Item]]:
    items: Dict[Span, List[_Item]] = {}
    covered = [u.quoted or u.text.isdigit() for u in units]
    n = len(units)

    def add(span: Span, category: Category, value: Optional[SemValue], surface: str):
        if value is None:
            return
        d = Derivation("lex", span, str(category), surface=surface)
        items.setdefault(span, []).append(_Item(category, value, d))

    for i, unit in enumerate(units):
        if unit.quoted:
            add((i, i + 1), NP, Node.literal(unit.text), unit.text)
        elif unit.text.isdigit():
            add((i, i + 1), NUM, Node.call(Predicate.INT, int(unit.text)), unit.text)

    for i in range(n):
        for length in range(1, lexicon.max_surface + 1):
            window = units[i:i + length]
            if len(window) < length or any(u.quoted for u in window):
                break
            key = tuple(u.text for u in window)
            for entry in lexicon.lookup(key):
                for k in range(i, i + length):
                    covered[k] = True
                add((i, i + length), entry.parsed_category, lexical_value(entry.template), entry.surface)

    i = 0
    while i < n:
        if covered[i]:
            i += 1
            continue
        j = i
        while j < n and not covered[j]:
            j += 1
        phrase = " ".join(u.text for u in units[i:j])
        add((i, j), NP, Node.literal(phrase), phrase)
        i = j
    return items


def _combine(a: _Item, b: _Item, span: Span) -> List[_Item]:
    out = []
    ca, cb = a.category, b.category

    def emit(rule: str, category: Category, value: Optional[SemValue]):
        if value is not None:
            out.append(_Item(category, value, Derivation(rule, span, str(category), (a.derivation, b.derivation))))

    if not ca.is_atomic and ca.slash == FORWARD:
        if ca.arg == cb:
            emit("fapp", ca.result, apply(a.value, b.value))
        elif not cb.is_atomic and cb.slash == FORWARD and ca.arg == cb.result:
            emit("fcomp", functional(ca.result, FORWARD, cb.arg), compose(a.value, b.value))
    if not cb.is_atomic and cb.slash == BACKWARD:
        if cb.arg == ca:
            emit("bapp", cb.result, apply(b.value, a.value))
        elif not ca.is_atomic and ca.slash == BACKWARD and cb.arg == ca.result:
            emit("bcomp", functional(cb.result, BACKWARD, ca.arg), compose(b.value, a.value))
    return out


def _coordinate(a: _Item, conj: _Item, b: _Item, span: Span) -> Optional[_Item]:
    if a.category != b.category or a.category == CONJ:
        return None
    value = coordinate(conj.value.predicate, a.value, b.value)
    if value is None:
        return None
    d = Derivation("coord", span, str(a.category), (a.derivation, conj.derivation, b.derivation))
    return _Item(a.category, value, d)


def _add(cell: Dict[Tuple[str, str], _Item], item: _Item) -> None:
    key = (str(item.category), value_key(item.value))
    current = cell.get(key)
    if current is None or _better(item.derivation, current.derivation):
        cell[key] = item


def chart_parse(text: str, lexicon: Lexicon, label: str = "",
                max_candidates: int = DEFAULT_MAX_CANDIDATES) -> List[ParseCandidate]:
    """
    Parse an explanation into every logical form the lexicon licenses.

    Args:
        text: Explanation text
        lexicon: CCG lexicon
        label: Label attached to every resulting form
        max_candidates: Cap on the number of returned candidates

    Returns:
        Candidates sorted by serialized form, one per distinct form

    Raises:
        NoParse: If no derivation of category S covers the whole explanation
    """
    units = preprocess(text, lexicon)
    n = len(units)
    if n == 0:
        raise NoParse(f"nothing to parse in {text!r}")

    chart: Dict[Span, Dict[Tuple[str, str], _Item]] = {}
    for span, items in _lexical_items(units, lexicon).items():
        cell = chart.setdefault(span, {})
        for item in items:
            _add(cell, item)

    for length in range(2, n + 1):
        for i in range(n - length + 1):
            j = i + length
            cell = chart.setdefault((i, j), {})
            for k in range(i + 1, j):
                for a in list(chart.get((i, k), {}).values()):
                    for b in list(chart.get((k, j), {}).values()):
                        for item in _combine(a, b, (i, j)):
                            _add(cell, item)
            for k1 in range(i + 1, j - 1):
                for k2 in range(k1 + 1, j):
                    conjs = [c for c in chart.get((k1, k2), {}).values() if c.category == CONJ]
                    if not conjs:
                        continue
                    for a in list(chart.get((i, k1), {}).values()):
                        for b in list(chart.get((k2, j), {}).values()):
                            for c in conjs:
                                item = _coordinate(a, c, b, (i, j))
                                if item is not None:
                                    _add(cell, item)

    best: Dict[str, Tuple[LogicalForm, Derivation]] = {}
    for item in chart.get((0, n), {}).values():
        if item.category != S or not isinstance(item.value, Node):
            continue
        try:
            form = LogicalForm(root=item.value, label=label)
        except LogicalFormError:
            continue
        current = best.get(form.sexpr)
        if current is None or _better(item.derivation, current[1]):
            best[form.sexpr] = (form, item.derivation)

    if not best:
        raise NoParse(f"no complete derivation for {text!r}")
    candidates = [ParseCandidate(form, d.features(), d) for _, (form, d) in sorted(best.items())]
    if len(candidates) > max_candidates:
        logger.warning(f"{len(candidates)} candidate forms for {text!r}; keeping the first {max_candidates}")
        candidates = candidates[:max_candidates]
    logger.debug(f"{len(candidates)} candidate form(s) for {text!r}")
    return candidates
