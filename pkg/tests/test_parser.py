import math
import time

import numpy as np
import pytest

from core.errors import CategoryError, DataFormatError, NoParse
from core.logical_form import LogicalForm
from core.models import Instance, ParserConfig, SyntheticSpec
from execution.strict import exec_strict
from semparse.categories import parse_category
from semparse.chart import NUM_FEATURES, Derivation, ParseCandidate, chart_parse
from semparse.lexicon import Lexicon
from semparse.semantics import compile_template
from semparse.ranker import (
    AnnotatedExplanation,
    ParseExample,
    ParserModel,
    accuracy_proxy,
    best_parse,
    build_examples,
    compile_explanations,
    is_consistent,
    parser_objective,
    score_candidates,
    train_parser,
)
from utils.gradcheck import numeric_grad, relative_error
from utils.synthetic import explanation_variants, generate_synthetic

PRECEDES = ("precedes", "(S\\NP)/NP", r"\y.\x.(Is (Word x) (Left y))")
# A second reading of "precedes price" that points the wrong way and skips one combinator.
PRECEDES_PRICE = ("precedes price", "S\\NP", r'\x.(Is (Word x) (Right "price"))')
PRICE = ("price", "NP", '"price"')


@pytest.fixture
def shipped_lexicon(lexicon_path):
    return Lexicon.load(lexicon_path)


def fake_candidate(sexpr, features):
    return ParseCandidate(LogicalForm.from_sexpr(sexpr, "y"), np.asarray(features, dtype=float),
                          Derivation("lex", (0, 1), "S"))


def annotated(text, tokens, label="pos", item_id="e"):
    return AnnotatedExplanation(id=item_id, text=text, label=label,
                                source=Instance(instance_id=f"src-{item_id}", tokens=tuple(tokens.split())))


# --------------------------------------------------------------------------
# categories and lexicon
# --------------------------------------------------------------------------

@pytest.mark.parametrize("text, arity", [("NP", 0), ("S\\NP", 1), ("(S\\NP)/PP", 2), ("S\\NP/PP", 2),
                                         ("((PP/NP)/CONJ)/NP", 3)])
def test_parse_category(text, arity):
    assert parse_category(text).arity == arity


@pytest.mark.parametrize("bad", ["", "XP", "(S/NP", "S/", "S NP"])
def test_bad_categories(bad):
    with pytest.raises(CategoryError):
        parse_category(bad)


def test_lexicon_rejects_arity_mismatch():
    with pytest.raises(CategoryError):
        Lexicon.from_rows([("before", "PP/NP", r"\a.\b.(Left a)")])


def test_template_string_literals_unescape():
    template = compile_template(r'\x.(Is (Word x) (Left "a \"b\""))')
    assert template.arity == 1
    assert template.body.args[1].args[0].node.value == 'a "b"'


@pytest.mark.parametrize("bad", [r"\x.(Left x", r'\x.(Left "x)', r"\x.\x.(Left x)"])
def test_malformed_templates(bad):
    with pytest.raises(CategoryError):
        compile_template(bad)


def test_lexicon_load_reports_line_number(tmp_path):
    path = tmp_path / "lexicon.tsv"
    path.write_text("# header\nbefore\tPP/NP\t\\y.(Left y)\nafter\tPP/QQ\t\\y.(Right y)\n", encoding="utf-8")
    with pytest.raises(DataFormatError, match=":3:"):
        Lexicon.load(str(path))


def test_shipped_lexicon_loads(shipped_lexicon):
    assert len(shipped_lexicon) >= 60
    assert shipped_lexicon.lookup(("directly", "before"))
    assert "word" in shipped_lexicon.skip_words


# --------------------------------------------------------------------------
# chart parsing
# --------------------------------------------------------------------------

def test_fair_precedes_object(shipped_lexicon, instance):
    x = instance("it was a very fair price for NYC", obj=(5, 6))
    candidates = chart_parse("the word 'fair' precedes OBJECT", shipped_lexicon, "pos")
    assert any(exec_strict(c.form, x) == 1 for c in candidates)
    assert all(c.form.label == "pos" for c in candidates)


def test_empty_text_does_not_parse(shipped_lexicon):
    with pytest.raises(NoParse):
        chart_parse("", shipped_lexicon)


def test_out_of_lexicon_text_does_not_parse(shipped_lexicon):
    with pytest.raises(NoParse):
        chart_parse("zebra giraffe", shipped_lexicon)


def test_candidates_are_sorted_and_deduplicated(shipped_lexicon):
    candidates = chart_parse("'fair' is before OBJECT or 'good' is after SUBJECT", shipped_lexicon)
    sexprs = [c.sexpr for c in candidates]
    assert sexprs == sorted(set(sexprs))


def test_chart_parse_is_deterministic(shipped_lexicon):
    text = "the word 'born' is within 2 words after OBJECT"
    first = [(c.sexpr, tuple(c.features)) for c in chart_parse(text, shipped_lexicon)]
    assert first == [(c.sexpr, tuple(c.features)) for c in chart_parse(text, shipped_lexicon)]


def test_features_are_reproducible_from_derivation(shipped_lexicon):
    for text in ("'fair' precedes OBJECT", "the word 'a' is between SUBJECT and OBJECT",
                 "'x' is before SUBJECT and OBJECT is after SUBJECT"):
        for c in chart_parse(text, shipped_lexicon):
            assert len(c.features) == NUM_FEATURES
            np.testing.assert_array_equal(c.features, c.derivation.features())
            assert c.features[:-1].sum() == c.derivation.rule_count


# --------------------------------------------------------------------------
# ranking
# --------------------------------------------------------------------------

def test_single_candidate_has_probability_one(shipped_lexicon):
    model = ParserModel.create(shipped_lexicon)
    model.theta = np.arange(NUM_FEATURES, dtype=float)
    np.testing.assert_allclose(score_candidates(model, [fake_candidate('(Occur (Word "a"))', [1, 0, 0, 0, 0, 2])]), [1.0])


def test_zero_weights_give_uniform(shipped_lexicon):
    model = ParserModel.create(shipped_lexicon)
    cands = [fake_candidate(f'(Occur (Word "{w}"))', np.eye(NUM_FEATURES)[i]) for i, w in enumerate("abcd")]
    np.testing.assert_allclose(score_candidates(model, cands), 0.25)


def test_displayed_softmax(shipped_lexicon):
    model = ParserModel.create(shipped_lexicon)
    model.theta = np.zeros(NUM_FEATURES)
    model.theta[0] = math.log(2)
    p = score_candidates(model, [fake_candidate('(Occur (Word "a"))', [1, 0, 0, 0, 0, 0]),
                                 fake_candidate('(Occur (Word "b"))', [0, 0, 0, 0, 0, 0])])
    np.testing.assert_allclose(p, [2 / 3, 1 / 3], atol=1e-12)


def test_scores_sum_to_one(shipped_lexicon, rng):
    model = ParserModel.create(shipped_lexicon)
    for _ in range(50):
        model.theta = rng.normal(size=NUM_FEATURES)
        cands = chart_parse("'fair' is before OBJECT and 'cheap' is after SUBJECT", shipped_lexicon)
        p = score_candidates(model, cands)
        assert abs(p.sum() - 1.0) <= 1e-9
        assert np.all((p > 0) & (p <= 1))


def test_is_consistent_requires_label_and_match():
    item = annotated("x", "a fair price here")
    good = LogicalForm.from_sexpr('(Is (Word "fair") (Left "price"))', "pos")
    assert is_consistent(good, item)
    assert not is_consistent(good.model_copy(update={"label": "neg"}), item)
    assert not is_consistent(LogicalForm.from_sexpr('(Is (Word "fair") (Right "price"))', "pos"), item)
    assert not is_consistent(LogicalForm.from_sexpr('(Is (Word "fair") (Left ArgX))', "pos"), item)


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

def toy_items():
    return [annotated(f"'{kw}' precedes price", f"a {kw} price here", item_id=kw)
            for kw in ("fair", "good", "cheap")]


def test_two_readings_train_toward_the_consistent_one():
    model = ParserModel.create(Lexicon.from_rows([PRECEDES, PRECEDES_PRICE, PRICE]))
    items = toy_items()
    for item in items:
        assert len(model.parse(item.text, item.label)) == 2
    trained, report = train_parser(model, items, epochs=50, lr=0.1)
    assert report.usable == 3
    for item in items:
        candidates = trained.parse(item.text, item.label)
        p = score_candidates(trained, candidates)
        good = [i for i, c in enumerate(candidates) if is_consistent(c.form, item)]
        assert len(good) == 1
        assert p[good[0]] > 0.9
    assert all(b >= a - 1e-8 for a, b in zip(report.objective, report.objective[1:]))


def test_single_candidate_objective_is_zero():
    model = ParserModel.create(Lexicon.from_rows([PRECEDES]))
    trained, report = train_parser(model, toy_items(), epochs=5)
    assert report.objective[0] == pytest.approx(0.0, abs=1e-12)
    assert accuracy_proxy(trained, toy_items()) == 1.0


def test_empty_dataset_returns_model_unchanged(shipped_lexicon):
    model = ParserModel.create(shipped_lexicon)
    model.theta = np.full(NUM_FEATURES, 0.3)
    trained, report = train_parser(model, [])
    np.testing.assert_array_equal(trained.theta, model.theta)
    assert report.total == 0


def test_unparseable_and_inconsistent_items_are_reported(shipped_lexicon):
    model = ParserModel.create(shipped_lexicon)
    items = [annotated("zebra giraffe", "a b", item_id="bad"),
             annotated("'fair' is after 'price'", "a fair price", item_id="wrong"),
             annotated("'fair' is before 'price'", "a fair price", item_id="ok")]
    _, report = train_parser(model, items, epochs=1)
    assert set(report.unparseable) == {"bad"}
    assert set(report.inconsistent) == {"wrong"}
    assert report.usable == 1


def test_parser_objective_gradient():
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(100):
        dataset = []
        for _ in range(int(rng.integers(1, 4))):
            k = int(rng.integers(2, 6))
            mask = rng.random(k) < 0.5
            mask[int(rng.integers(k))] = True
            dataset.append(ParseExample(rng.integers(0, 4, size=(k, NUM_FEATURES)).astype(float), mask))
        theta = rng.normal(size=NUM_FEATURES)
        analytic = parser_objective(theta, dataset)[1]
        numeric = numeric_grad(lambda t: parser_objective(t, dataset)[0], theta)
        worst = max(worst, relative_error(analytic, numeric))
    assert worst < 1e-4


def test_build_examples_masks_match_consistency(shipped_lexicon):
    model = ParserModel.create(shipped_lexicon)
    item = annotated("'fair' precedes 'price'", "a fair price")
    (example,) = build_examples(model, [item])
    assert example.consistent.any()
    assert example.features.shape[1] == NUM_FEATURES


# --------------------------------------------------------------------------
# best parse
# --------------------------------------------------------------------------

def test_best_parse_of_directly_preceded(shipped_lexicon, instance):
    form = best_parse(ParserModel.create(shipped_lexicon), "the word price is directly preceded by fair", "pos")
    assert exec_strict(form, instance("it was a very fair price for NYC")) == 1


def test_best_parse_tie_goes_to_first_serialization():
    model = ParserModel.create(Lexicon.from_rows([PRECEDES, PRECEDES_PRICE, PRICE]))
    candidates = model.parse("'fair' precedes price")
    assert len(candidates) == 2
    assert best_parse(model, "'fair' precedes price").sexpr == min(c.sexpr for c in candidates)


def test_best_parse_propagates_no_parse(shipped_lexicon):
    with pytest.raises(NoParse):
        best_parse(ParserModel.create(shipped_lexicon), "zebra")


def test_compile_explanations_uses_explanation_ids():
    model = ParserModel.create(Lexicon.from_rows([PRECEDES]))
    items = toy_items() + [annotated("nonsense", "a b", item_id="junk")]
    forms = compile_explanations(model, items)
    assert [f.form_id for f in forms] == ["fair", "good", "cheap"]


# --------------------------------------------------------------------------
# fidelity on held-out phrasings
# --------------------------------------------------------------------------

def _keywords(rng, n):
    consonants = list("bcdfghjklmnpqrstvwxz")
    return ["".join(rng.choice(consonants, size=6)) for _ in range(n)]


def _annotated_variants(seed, keywords):
    data = generate_synthetic(SyntheticSpec(seed=seed, size=50, test_size=0, paraphrase_rate=0.0,
                                            synonyms={kw: [kw + "x"] for kw in keywords}))
    items = []
    for k, form in enumerate(data.forms):
        source = next(x for x in data.corpus if exec_strict(form, x) == 1 and data.gold[x.instance_id] == form.label)
        for j, text in enumerate(explanation_variants(keywords[k], k)):
            items.append(AnnotatedExplanation(id=f"{seed}-{k}-{j}", text=text, label=form.label, source=source))
    return items


def test_parser_fidelity_on_held_out_phrasings(shipped_lexicon):
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    train_items = _annotated_variants(1, _keywords(rng, 5))
    model, _ = train_parser(ParserModel.create(shipped_lexicon, ParserConfig(epochs=50)), train_items)
    held_out = [item for seed in (2, 3, 4) for item in _annotated_variants(seed, _keywords(rng, 5))]
    assert accuracy_proxy(model, held_out) >= 0.9
    assert time.perf_counter() - start < 30
