import pytest

from core.errors import LogicalFormError, SexprSyntaxError
from core.logical_form import LogicalForm, Node, parse_sexpr, query_strings, to_sexpr, validate
from core.predicates import PREDICATES, ModuleClass, Predicate


def test_every_predicate_has_one_module_class():
    assert set(PREDICATES) == set(Predicate)
    assert PREDICATES[Predicate.AND].module_class is ModuleClass.LOGICAL
    assert PREDICATES[Predicate.LEFT].module_class is ModuleClass.DETERMINISTIC
    assert PREDICATES[Predicate.DIRECT].module_class is ModuleClass.COUNTING
    assert PREDICATES[Predicate.WORD].module_class is ModuleClass.STRING_MATCH
    assert PREDICATES[Predicate.ARG_X].module_class is ModuleClass.NONE


def test_validate_well_typed_composition():
    node = Node.call("And", Node.call("True"), Node.call("Is", Node.call("Word", "fair"), Node.call("Left", Node.call("Arg"))))
    assert validate(node) == []


def test_validate_arity_error_at_root():
    errors = validate(Node.call("And", Node.call("True")))
    assert len(errors) == 1
    assert errors[0].startswith("root:")
    assert "arity" in errors[0]


def test_validate_type_error_cites_node():
    errors = validate(Node.call("Left", Node.call("Int", 3)))
    assert errors and "type error" in errors[0]
    assert errors[0].startswith("root")


def test_logical_form_rejects_uninformative_tree():
    with pytest.raises(LogicalFormError):
        LogicalForm(root=Node.call("And", Node.call("True"), Node.call("True")), label="x")


def test_logical_form_rejects_non_boolean_root():
    with pytest.raises(LogicalFormError):
        LogicalForm(root=Node.call("Left", Node.call("ArgX")), label="x")


@pytest.mark.parametrize("text", [
    '(Is (Word "fair") (Direct (Left "price")))',
    '(And (Is (Word "kw") (Left ArgX)) (Is ArgY (Right ArgX)))',
    '(AtMost (NumberOf (Between ArgX ArgY)) (Int 3))',
    '(Occur (Link ArgX ArgY "of the"))',
    '(Not (Is (Word "say \\"hi\\"") (Within (Int 2) Arg)))',
])
def test_sexpr_round_trip(text):
    node = parse_sexpr(text)
    assert to_sexpr(node) == text
    assert parse_sexpr(to_sexpr(node)) == node


@pytest.mark.parametrize("text", ["", "(Is", "(Is (Word \"a\")))", "(Frobnicate ArgX)", "()"])
def test_sexpr_syntax_errors(text):
    with pytest.raises(SexprSyntaxError):
        parse_sexpr(text)


def test_query_strings_in_tree_order_without_duplicates():
    node = parse_sexpr('(And (Is (Word "b") (Left "a")) (Or (Occur (Word "b")) (Occur (Contains ArgX "c"))))')
    assert validate(node) == []
    assert query_strings(node) == ["b", "c"]


def test_from_sexpr_keeps_label_and_id():
    form = LogicalForm.from_sexpr('(Occur (Word "x"))', "pos", "f1")
    assert form.label == "pos"
    assert form.form_id == "f1"
    assert form.sexpr == '(Occur (Word "x"))'


def test_token_literal_must_tokenize_to_one_token():
    assert validate(Node.call("Token", "fair")) == []
    assert any("single token" in e for e in validate(Node.call("Token", "didn't")))
