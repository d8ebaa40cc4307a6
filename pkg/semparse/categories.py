"""CCG syntactic categories.

Atomic categories are S, NP, PP, NUM and CONJ. Functional categories are
written X/Y (argument Y to the right) or X\\Y (argument Y to the left);
slashes associate to the left, so (S\\NP)/PP may also be written S\\NP/PP.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

from core.errors import CategoryError

ATOMS = frozenset({"S", "NP", "PP", "NUM", "CONJ"})
SKIP = "SKIP"

FORWARD = "/"
BACKWARD = "\\"


@dataclass(frozen=True)
class Category:
    atom: Optional[str] = None
    result: Optional["Category"] = None
    slash: Optional[str] = None
    arg: Optional["Category"] = None

    @property
    def is_atomic(self) -> bool:
        return self.atom is not None

    @property
    def arity(self) -> int:
        return 0 if self.is_atomic else 1 + self.result.arity

    def __str__(self) -> str:
        if self.is_atomic:
            return self.atom
        left = str(self.result)
        right = str(self.arg) if self.arg.is_atomic else f"({self.arg})"
        return f"{left}{self.slash}{right}"


def atomic(name: str) -> Category:
    return Category(atom=name)


def functional(result: Category, slash: str, arg: Category) -> Category:
    return Category(result=result, slash=slash, arg=arg)


def _tokens(text: str) -> List[str]:
    out, name = [], ""
    for ch in text:
        if ch.isspace():
            continue
        if ch in "()/\\":
            if name:
                out.append(name)
                name = ""
            out.append(ch)
        else:
            name += ch
    if name:
        out.append(name)
    return out


def parse_category(text: str) -> Category:
    tokens = _tokens(text)
    if not tokens:
        raise CategoryError("empty category")

    def primary(i: int) -> Tuple[Category, int]:
        if i >= len(tokens):
            raise CategoryError(f"truncated category {text!r}")
        tok = tokens[i]
        if tok == "(":
            cat, j = expr(i + 1)
            if j >= len(tokens) or tokens[j] != ")":
                raise CategoryError(f"missing ')' in category {text!r}")
            return cat, j + 1
        if tok not in ATOMS:
            raise CategoryError(f"unknown atomic category {tok!r} in {text!r}")
        return atomic(tok), i + 1

    def expr(i: int) -> Tuple[Category, int]:
        cat, i = primary(i)
        while i < len(tokens) and tokens[i] in (FORWARD, BACKWARD):
            slash = tokens[i]
            arg, i = primary(i + 1)
            cat = functional(cat, slash, arg)
        return cat, i

    cat, end = expr(0)
    if end != len(tokens):
        raise CategoryError(f"trailing input in category {text!r}")
    return cat
