"""Lambda-term semantics for lexical entries.

A template such as ``\\p.\\x.(Is (Word x) p)`` is compiled into a curried
function value; the first lambda is the first argument the category consumes.
Fully applied templates yield AST nodes; ill-typed results become None and
the derivation carrying them is dropped.
"""
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

from core.errors import CategoryError, SexprSyntaxError
from core.logical_form import Node, to_sexpr, tokenize_sexpr, validate
from core.predicates import Predicate

_LAMBDA_RE = re.compile(r"\s*\\\s*([a-z][a-z0-9_]*)\s*\.")

CONNECTIVES = (Predicate.AND, Predicate.OR, Predicate.SEPARATOR)


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TConst:
    node: Node


@dataclass(frozen=True)
class TApp:
    head: Union[Predicate, str]
    args: Tuple["Term", ...]


Term = Union[TVar, TConst, TApp]


@dataclass(frozen=True)
class Template:
    params: Tuple[str, ...]
    body: Term
    text: str

    @property
    def arity(self) -> int:
        return len(self.params)


def _body_tokens(text: str) -> List[Tuple[str, str]]:
    try:
        return tokenize_sexpr(text)
    except SexprSyntaxError as e:
        raise CategoryError(f"bad semantics {text!r}: {e}") from None


def compile_template(text: str) -> Template:
    params: List[str] = []
    pos = 0
    while True:
        m = _LAMBDA_RE.match(text, pos)
        if not m:
            break
        params.append(m.group(1))
        pos = m.end()
    if len(set(params)) != len(params):
        raise CategoryError(f"repeated lambda variable in {text!r}")
    tokens = _body_tokens(text[pos:])
    if not tokens:
        raise CategoryError(f"empty semantics body in {text!r}")

    def symbol(name: str) -> Union[Predicate, str]:
        if name in params:
            return name
        try:
            return Predicate(name)
        except ValueError:
            raise CategoryError(f"unknown predicate or unbound variable {name!r} in {text!r}") from None

    def term(i: int) -> Tuple[Term, int]:
        kind, value = tokens[i]
        if kind == "str":
            return TConst(Node.literal(value)), i + 1
        if kind == "int":
            return TConst(Node.literal(int(value))), i + 1
        if kind == "sym":
            head = symbol(value)
            return (TVar(head) if isinstance(head, str) else TConst(Node(predicate=head))), i + 1
        if kind == ")" or i + 1 >= len(tokens) or tokens[i + 1][0] != "sym":
            raise CategoryError(f"malformed semantics {text!r}")
        head = symbol(tokens[i + 1][1])
        args, j = [], i + 2
        while True:
            if j >= len(tokens):
                raise CategoryError(f"missing ')' in semantics {text!r}")
            if tokens[j][0] == ")":
                return TApp(head, tuple(args)), j + 1
            child, j = term(j)
            args.append(child)

    body, end = term(0)
    if end != len(tokens):
        raise CategoryError(f"trailing input in semantics {text!r}")
    # unused variables are allowed: "between" swallows its CONJ argument
    return Template(tuple(params), body, text.strip())


# --------------------------------------------------------------------------
# semantic values
# --------------------------------------------------------------------------

class SemFn:
    """A function-valued meaning; apply() returns None on ill-typed input."""
    key: str

    def apply(self, arg: "SemValue") -> Optional["SemValue"]:
        raise NotImplementedError


SemValue = Union[Node, SemFn]


def value_key(value: SemValue) -> str:
    return to_sexpr(value) if isinstance(value, Node) else value.key


def _checked(node: Node) -> Optional[Node]:
    return None if validate(node) else node


def _instantiate(term: Term, env: Dict[str, SemValue]) -> Optional[SemValue]:
    if isinstance(term, TVar):
        return env[term.name]
    if isinstance(term, TConst):
        return term.node
    args = []
    for a in term.args:
        value = _instantiate(a, env)
        if value is None:
            return None
        args.append(value)
    if isinstance(term.head, str):
        fn = env[term.head]
        for a in args:
            if not isinstance(fn, SemFn):
                return None
            fn = fn.apply(a)
            if fn is None:
                return None
        return fn
    if any(isinstance(a, SemFn) for a in args):
        return None
    return _checked(Node(predicate=term.head, args=tuple(args)))


class LambdaFn(SemFn):
    def __init__(self, template: Template, bound: Tuple[SemValue, ...] = ()):
        self.template = template
        self.bound = bound
        self.key = template.text + "[" + ",".join(value_key(v) for v in bound) + "]"

    def apply(self, arg: SemValue) -> Optional[SemValue]:
        bound = self.bound + (arg,)
        if len(bound) < self.template.arity:
            return LambdaFn(self.template, bound)
        return _instantiate(self.template.body, dict(zip(self.template.params, bound)))


class ComposedFn(SemFn):
    """\\z. f(g(z))"""

    def __init__(self, f: SemFn, g: SemFn):
        self.f, self.g = f, g
        self.key = f"({f.key} . {g.key})"

    def apply(self, arg: SemValue) -> Optional[SemValue]:
        inner = self.g.apply(arg)
        return None if inner is None else self.f.apply(inner)


class CoordinatedFn(SemFn):
    """\\z. conn(f(z), g(z))"""

    def __init__(self, connective: Predicate, f: SemFn, g: SemFn):
        self.connective, self.f, self.g = connective, f, g
        self.key = f"({connective.value} {f.key} {g.key})"

    def apply(self, arg: SemValue) -> Optional[SemValue]:
        left, right = self.f.apply(arg), self.g.apply(arg)
        if left is None or right is None:
            return None
        return coordinate(self.connective, left, right)


def lexical_value(template: Template) -> Optional[SemValue]:
    if template.arity == 0:
        return _instantiate(template.body, {})
    return LambdaFn(template)


def apply(fn: SemValue, arg: SemValue) -> Optional[SemValue]:
    return fn.apply(arg) if isinstance(fn, SemFn) else None


def compose(f: SemValue, g: SemValue) -> Optional[SemValue]:
    if isinstance(f, SemFn) and isinstance(g, SemFn):
        return ComposedFn(f, g)
    return None


def coordinate(connective: Predicate, left: SemValue, right: SemValue) -> Optional[SemValue]:
    if isinstance(left, Node) and isinstance(right, Node):
        return _checked(Node.call(connective, left, right))
    if isinstance(left, SemFn) and isinstance(right, SemFn):
        return CoordinatedFn(connective, left, right)
    return None
