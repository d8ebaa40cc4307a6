from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Tuple


class AnchorRole(str, Enum):
    SUBJECT = "SUBJECT"
    OBJECT = "OBJECT"
    TERM = "TERM"


class ModuleClass(str, Enum):
    """Execution module responsible for a predicate."""
    LOGICAL = "Logical"
    DETERMINISTIC = "Deterministic"
    COUNTING = "Counting"
    STRING_MATCH = "StringMatch"
    NONE = "None"


class ValueType(str, Enum):
    BOOL = "Bool"
    QUERY = "Query"
    SPAN = "Span"
    STR = "Str"
    INT = "Int"
    POS = "Pos"
    DIRPOS = "DirPos"


class Predicate(str, Enum):
    BECAUSE = "Because"
    SEPARATOR = "Separator"
    ARG_X = "ArgX"
    ARG_Y = "ArgY"
    ARG = "Arg"
    INT = "Int"
    TOKEN = "Token"
    STRING = "String"
    TRUE = "True"
    FALSE = "False"
    AND = "And"
    OR = "Or"
    NOT = "Not"
    IS = "Is"
    OCCUR = "Occur"
    LEFT = "Left"
    RIGHT = "Right"
    BETWEEN = "Between"
    WITHIN = "Within"
    NUMBER_OF = "NumberOf"
    AT_MOST = "AtMost"
    AT_LEAST = "AtLeast"
    DIRECT = "Direct"
    MORE_THAN = "MoreThan"
    LESS_THAN = "LessThan"
    EQUALS = "Equals"
    WORD = "Word"
    CONTAINS = "Contains"
    LINK = "Link"


@dataclass(frozen=True)
class Signature:
    args: Tuple[FrozenSet[ValueType], ...]
    result: ValueType

    def accepts(self, arg_types: Tuple[ValueType, ...]) -> bool:
        return len(arg_types) == len(self.args) and all(
            t in allowed for t, allowed in zip(arg_types, self.args)
        )

    def describe(self) -> str:
        parts = ["|".join(sorted(t.value for t in allowed)) for allowed in self.args]
        return f"({', '.join(parts)}) -> {self.result.value}"


@dataclass(frozen=True)
class PredicateInfo:
    module_class: ModuleClass
    signatures: Tuple[Signature, ...]

    @property
    def arity(self) -> int:
        return len(self.signatures[0].args)


def _sig(result: ValueType, *args) -> Signature:
    return Signature(tuple(frozenset(a) if isinstance(a, (set, frozenset)) else frozenset({a}) for a in args), result)


B, Q, SP, S, I, P, DP = (ValueType.BOOL, ValueType.QUERY, ValueType.SPAN, ValueType.STR,
                         ValueType.INT, ValueType.POS, ValueType.DIRPOS)
_REF = {SP, S}
_ANY_POS = {P, DP}

_COUNTING_SIGNATURES = (_sig(P, DP, I), _sig(B, I, I))

PREDICATES: Dict[Predicate, PredicateInfo] = {
    Predicate.BECAUSE: PredicateInfo(ModuleClass.NONE, (_sig(B, B),)),
    Predicate.SEPARATOR: PredicateInfo(ModuleClass.NONE, (_sig(B, B, B),)),
    Predicate.ARG_X: PredicateInfo(ModuleClass.NONE, (_sig(SP),)),
    Predicate.ARG_Y: PredicateInfo(ModuleClass.NONE, (_sig(SP),)),
    Predicate.ARG: PredicateInfo(ModuleClass.NONE, (_sig(SP),)),
    Predicate.INT: PredicateInfo(ModuleClass.NONE, (_sig(I, I),)),
    Predicate.TOKEN: PredicateInfo(ModuleClass.NONE, (_sig(S, S),)),
    Predicate.STRING: PredicateInfo(ModuleClass.NONE, (_sig(S, S),)),
    Predicate.TRUE: PredicateInfo(ModuleClass.NONE, (_sig(B),)),
    Predicate.FALSE: PredicateInfo(ModuleClass.NONE, (_sig(B),)),
    Predicate.AND: PredicateInfo(ModuleClass.LOGICAL, (_sig(B, B, B),)),
    Predicate.OR: PredicateInfo(ModuleClass.LOGICAL, (_sig(B, B, B),)),
    Predicate.NOT: PredicateInfo(ModuleClass.LOGICAL, (_sig(B, B),)),
    Predicate.IS: PredicateInfo(ModuleClass.LOGICAL, (_sig(B, {Q, SP}, _ANY_POS),)),
    Predicate.OCCUR: PredicateInfo(ModuleClass.LOGICAL, (_sig(B, Q),)),
    Predicate.LEFT: PredicateInfo(ModuleClass.DETERMINISTIC, (_sig(DP, _REF),)),
    Predicate.RIGHT: PredicateInfo(ModuleClass.DETERMINISTIC, (_sig(DP, _REF),)),
    Predicate.BETWEEN: PredicateInfo(ModuleClass.DETERMINISTIC, (_sig(P, _REF, _REF),)),
    Predicate.WITHIN: PredicateInfo(ModuleClass.DETERMINISTIC, (_sig(P, I, _REF),)),
    Predicate.NUMBER_OF: PredicateInfo(ModuleClass.DETERMINISTIC, (_sig(I, _ANY_POS),)),
    Predicate.AT_MOST: PredicateInfo(ModuleClass.COUNTING, _COUNTING_SIGNATURES),
    Predicate.AT_LEAST: PredicateInfo(ModuleClass.COUNTING, _COUNTING_SIGNATURES),
    Predicate.DIRECT: PredicateInfo(ModuleClass.COUNTING, (_sig(P, DP),)),
    Predicate.MORE_THAN: PredicateInfo(ModuleClass.COUNTING, _COUNTING_SIGNATURES),
    Predicate.LESS_THAN: PredicateInfo(ModuleClass.COUNTING, _COUNTING_SIGNATURES),
    Predicate.EQUALS: PredicateInfo(ModuleClass.COUNTING, _COUNTING_SIGNATURES),
    Predicate.WORD: PredicateInfo(ModuleClass.STRING_MATCH, (_sig(Q, S),)),
    Predicate.CONTAINS: PredicateInfo(ModuleClass.STRING_MATCH, (_sig(Q, SP, S),)),
    Predicate.LINK: PredicateInfo(ModuleClass.STRING_MATCH, (_sig(Q, SP, SP, S),)),
}

ANCHOR_PREDICATES: Dict[Predicate, AnchorRole] = {
    Predicate.ARG_X: AnchorRole.SUBJECT,
    Predicate.ARG_Y: AnchorRole.OBJECT,
    Predicate.ARG: AnchorRole.TERM,
}

COUNTING_PREDICATES = frozenset(p for p, info in PREDICATES.items() if info.module_class is ModuleClass.COUNTING)


def module_class(predicate: Predicate) -> ModuleClass:
    return PREDICATES[predicate].module_class


def arity(predicate: Predicate) -> int:
    return PREDICATES[predicate].arity
