import pytest

from core.errors import AnchorMissing
from core.logical_form import LogicalForm, Node, parse_sexpr
from core.models import CorpusRecord, Instance
from execution.strict import exec_strict
from utils.text import tokenize

FAIR_PRICE = '(Is (Word "fair") (Direct (Left "price")))'


def form(text, label="pos"):
    return LogicalForm.from_sexpr(text, label)


def test_directly_preceded_matches_source_sentence(instance):
    x = instance("it was a very fair price for NYC")
    assert exec_strict(form(FAIR_PRICE), x) == 1


def test_directly_preceded_rejects_intervening_word(instance):
    x = instance("Decent sushi at a fair enough price")
    assert exec_strict(form(FAIR_PRICE), x) == 0


def test_false_leaf_never_matches(instance):
    f = form('(And False (Occur (Word "price")))')
    assert exec_strict(f, instance("a fair price")) == 0


def test_not_complements(instance):
    base = parse_sexpr('(Is (Word "fair") (Left "price"))')
    negated = Node.call("Not", base)
    for text in ("a fair price", "price is fair", "nothing here"):
        x = instance(text)
        assert exec_strict(negated, x) == 1 - exec_strict(base, x)


def test_and_or_are_boolean(instance):
    a = parse_sexpr('(Occur (Word "fair"))')
    b = parse_sexpr('(Occur (Word "cheap"))')
    x = instance("a fair price")
    assert exec_strict(Node.call("And", a, b), x) == min(exec_strict(a, x), exec_strict(b, x))
    assert exec_strict(Node.call("Or", a, b), x) == max(exec_strict(a, x), exec_strict(b, x))


def test_between_anchors(instance):
    x = instance("alice said founded by acme", subj=(0, 1), obj=(4, 5))
    assert exec_strict(form('(Is (Word "founded") (Between ArgX ArgY))'), x) == 1
    assert exec_strict(form('(Is (Word "alice") (Between ArgX ArgY))'), x) == 0


def test_multiword_anchor_span(instance):
    x = instance("the new york times hired bob", subj=(1, 4), obj=(5, 6))
    assert exec_strict(form('(Is (Word "hired") (Direct (Right ArgX)))'), x) == 1
    assert exec_strict(form('(Is (Word "hired") (Direct (Left ArgY)))'), x) == 1


def test_counting_constraints(instance):
    x = instance("bob was born in the city of paris", subj=(0, 1), obj=(7, 8))
    assert exec_strict(form('(Is (Word "born") (AtMost (Left ArgY) (Int 5)))'), x) == 1
    assert exec_strict(form('(Is (Word "born") (AtMost (Left ArgY) (Int 4)))'), x) == 0
    assert exec_strict(form('(Is (Word "born") (MoreThan (Left ArgY) (Int 4)))'), x) == 1
    assert exec_strict(form('(Is (Word "born") (Equals (Left ArgY) (Int 5)))'), x) == 1


def test_number_of_between(instance):
    x = instance("a b c d e f g h i j", subj=(2, 3), obj=(7, 8))
    assert exec_strict(form('(Equals (NumberOf (Between ArgX ArgY)) (Int 4))'), x) == 1
    assert exec_strict(form('(LessThan (NumberOf (Between ArgX ArgY)) (Int 4))'), x) == 0


def test_within_is_edge_inclusive(instance):
    x = instance("a b c d e", term=(2, 3))
    assert exec_strict(form('(Is (Word "a") (Within (Int 2) Arg))'), x) == 1
    assert exec_strict(form('(Is (Word "a") (Within (Int 1) Arg))'), x) == 0


def test_contains_and_link(instance):
    x = instance("apple ceo tim cook spoke", subj=(0, 1), obj=(2, 4))
    assert exec_strict(form('(Occur (Link ArgX ArgY "ceo"))'), x) == 1
    assert exec_strict(form('(Occur (Contains ArgY "cook"))'), x) == 1
    assert exec_strict(form('(Occur (Contains ArgY "ceo"))'), x) == 0


def test_keyword_matching_is_case_insensitive(instance):
    assert exec_strict(form('(Occur (Word "nyc"))'), instance("a fair price for NYC")) == 1


def test_missing_anchor_raises(instance):
    with pytest.raises(AnchorMissing):
        exec_strict(form('(Is (Word "x") (Left ArgX))'), instance("x y z"))


def test_role_tokens_resolve_to_spans():
    x = CorpusRecord(id="r", tokens=["SUBJ-PER", "SUBJ-PER", "works", "for", "OBJ-ORG"]).to_instance()
    f = form('(Is (Word "works") (Between ArgX ArgY))')
    assert exec_strict(f, x) == 1


def test_exec_strict_is_pure(instance):
    f = form(FAIR_PRICE)
    x = instance("it was a very fair price for NYC")
    assert {exec_strict(f, x) for _ in range(5)} == {1}


@pytest.mark.parametrize("keyword, text", [
    ("state-of-the-art", "a state-of-the-art design"),
    ("didn't", "they didn't like it"),
    ("u.s.", "based in the U.S. market"),
])
def test_punctuated_keyword_matches_tokenized_corpus(keyword, text):
    x = Instance(instance_id="x", tokens=tuple(tokenize(text)))
    assert exec_strict(form(f'(Occur (Word "{keyword}"))'), x) == 1
