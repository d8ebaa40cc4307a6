import re
from typing import Iterator, List, Optional, Set, Tuple, Union

from pydantic import BaseModel, ConfigDict, StrictInt, StrictStr, model_validator

from core.errors import LogicalFormError, SexprSyntaxError
from core.predicates import (
    ANCHOR_PREDICATES,
    PREDICATES,
    AnchorRole,
    ModuleClass,
    Predicate,
    ValueType,
)
from utils.text import query_tokens

LiteralValue = Union[StrictInt, StrictStr]


class Node(BaseModel):
    """Expression node: a predicate applied to children, or a literal leaf."""
    model_config = ConfigDict(frozen=True)

    predicate: Optional[Predicate] = None
    args: Tuple["Node", ...] = ()
    value: Optional[LiteralValue] = None

    @classmethod
    def call(cls, predicate: Union[Predicate, str], *args: Union["Node", int, str]) -> "Node":
        """Build a predicate node; raw ints and strings become literal children."""
        children = tuple(a if isinstance(a, Node) else cls.literal(a) for a in args)
        return cls(predicate=Predicate(predicate), args=children)

    @classmethod
    def literal(cls, value: LiteralValue) -> "Node":
        return cls(value=value)

    @property
    def is_literal(self) -> bool:
        return self.predicate is None

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.args:
            yield from child.walk()

    def __str__(self) -> str:
        return to_sexpr(self)


Node.model_rebuild()


# --------------------------------------------------------------------------
# typing
# --------------------------------------------------------------------------

def _infer(node: Node, path: str, errors: List[str]) -> Optional[ValueType]:
    if node.is_literal:
        if isinstance(node.value, bool) or node.value is None:
            errors.append(f"{path}: literal must be a string or an integer")
            return None
        return ValueType.INT if isinstance(node.value, int) else ValueType.STR

    info = PREDICATES[node.predicate]
    if len(node.args) != info.arity:
        errors.append(f"{path}: arity error: {node.predicate.value} expects {info.arity} "
                      f"argument(s), got {len(node.args)}")
        return None

    child_types = [_infer(child, f"{path}.{i}", errors) for i, child in enumerate(node.args)]

    if node.predicate is Predicate.TOKEN and node.args[0].is_literal:
        if isinstance(node.args[0].value, str) and len(query_tokens(node.args[0].value)) != 1:
            errors.append(f"{path}: Token expects a single token, got {node.args[0].value!r}")
    if node.predicate in (Predicate.INT, Predicate.TOKEN, Predicate.STRING) and not node.args[0].is_literal:
        errors.append(f"{path}: {node.predicate.value} wraps a literal")
        return None

    if any(t is None for t in child_types):
        results = {sig.result for sig in info.signatures}
        return results.pop() if len(results) == 1 else None

    for sig in info.signatures:
        if sig.accepts(tuple(child_types)):
            return sig.result

    got = ", ".join(t.value for t in child_types)
    expected = " or ".join(sig.describe() for sig in info.signatures)
    errors.append(f"{path}: type error: {node.predicate.value} cannot take ({got}); expected {expected}")
    return None


def infer_type(node: Node) -> Optional[ValueType]:
    errors: List[str] = []
    result = _infer(node, "root", errors)
    return None if errors else result


def validate(form: Union["LogicalForm", Node]) -> List[str]:
    """Return the arity/type errors of a form; an empty list means well-typed."""
    root = form.root if isinstance(form, LogicalForm) else form
    errors: List[str] = []
    _infer(root, "root", errors)
    return errors


def is_informative(node: Node) -> bool:
    """True when the tree holds a clause about the sentence itself."""
    return any(
        not n.is_literal and PREDICATES[n.predicate].module_class in (ModuleClass.STRING_MATCH,
                                                                      ModuleClass.DETERMINISTIC)
        for n in node.walk()
    )


def anchor_roles(node: Node) -> Set[AnchorRole]:
    return {ANCHOR_PREDICATES[n.predicate] for n in node.walk() if n.predicate in ANCHOR_PREDICATES}


def string_of(node: Node) -> str:
    """Resolve a STR-typed node (bare literal, Token or String) to its text."""
    if node.is_literal:
        return str(node.value)
    return str(node.args[0].value)


def query_strings(node: Node) -> List[str]:
    """Keyword queries handed to the string matcher, in tree order."""
    out = []
    for n in node.walk():
        if n.predicate in (Predicate.WORD, Predicate.CONTAINS, Predicate.LINK):
            text = string_of(n.args[-1])
            if text not in out:
                out.append(text)
    return out


class LogicalForm(BaseModel):
    """A typed, informative expression tree plus the label it votes for."""
    model_config = ConfigDict(frozen=True)

    root: Node
    label: str
    form_id: str = ""

    @model_validator(mode="after")
    def _check(self) -> "LogicalForm":
        errors = validate(self.root)
        if errors:
            raise LogicalFormError(f"ill-typed logical form {to_sexpr(self.root)}: {errors[0]}", errors)
        if infer_type(self.root) is not ValueType.BOOL:
            raise LogicalFormError(f"logical form {to_sexpr(self.root)} does not evaluate to a truth value")
        if not is_informative(self.root):
            raise LogicalFormError(f"logical form {to_sexpr(self.root)} asserts nothing about the sentence")
        return self

    @classmethod
    def from_sexpr(cls, text: str, label: str, form_id: str = "") -> "LogicalForm":
        return cls(root=parse_sexpr(text), label=label, form_id=form_id)

    @property
    def sexpr(self) -> str:
        return to_sexpr(self.root)

    def __str__(self) -> str:
        return self.sexpr


# --------------------------------------------------------------------------
# s-expression codec
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(r'\s*(?:(\()|(\))|("(?:[^"\\]|\\.)*")|(-?\d+)(?=[\s()]|$)|([^\s()"]+))')


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _unquote(token: str) -> str:
    return re.sub(r"\\(.)", r"\1", token[1:-1])


def to_sexpr(node: Node) -> str:
    if node.is_literal:
        return _quote(node.value) if isinstance(node.value, str) else str(node.value)
    if not node.args and PREDICATES[node.predicate].arity == 0:
        return node.predicate.value
    return "(" + " ".join([node.predicate.value] + [to_sexpr(a) for a in node.args]) + ")"


def tokenize_sexpr(text: str) -> List[Tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise SexprSyntaxError(f"unexpected character at offset {pos} in {text!r}")
        pos = m.end()
        if m.group(1):
            tokens.append(("(", "("))
        elif m.group(2):
            tokens.append((")", ")"))
        elif m.group(3):
            tokens.append(("str", _unquote(m.group(3))))
        elif m.group(4):
            tokens.append(("int", m.group(4)))
        else:
            tokens.append(("sym", m.group(5)))
    return tokens


def _symbol(name: str) -> Predicate:
    try:
        return Predicate(name)
    except ValueError:
        raise SexprSyntaxError(f"unknown predicate {name!r}") from None


def parse_sexpr(text: str) -> Node:
    """Parse canonical prefix notation; typing is left to validate()."""
    tokens = tokenize_sexpr(text)
    if not tokens:
        raise SexprSyntaxError("empty s-expression")

    def parse_at(i: int) -> Tuple[Node, int]:
        kind, value = tokens[i]
        if kind == "str":
            return Node.literal(value), i + 1
        if kind == "int":
            return Node.literal(int(value)), i + 1
        if kind == "sym":
            return Node(predicate=_symbol(value)), i + 1
        if kind == ")":
            raise SexprSyntaxError(f"unbalanced ')' in {text!r}")
        if i + 1 >= len(tokens) or tokens[i + 1][0] != "sym":
            raise SexprSyntaxError(f"expected a predicate after '(' in {text!r}")
        predicate = _symbol(tokens[i + 1][1])
        args = []
        j = i + 2
        while True:
            if j >= len(tokens):
                raise SexprSyntaxError(f"missing ')' in {text!r}")
            if tokens[j][0] == ")":
                return Node(predicate=predicate, args=tuple(args)), j + 1
            child, j = parse_at(j)
            args.append(child)

    node, end = parse_at(0)
    if end != len(tokens):
        raise SexprSyntaxError(f"trailing input after expression in {text!r}")
    return node
