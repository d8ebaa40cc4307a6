import os

import numpy as np
import pytest

from core.models import LabelSet, PretrainConfig, SoftConfig, SyntheticSpec, TrainConfig
from execution.strict import exec_strict
from matching.losses import build_query_sets
from matching.matcher import MatcherModel
from matching.pretrain import pretrain_matcher
from training.classifier import LogisticClassifier
from training.joint import train_joint, train_supervised
from training.partition import partition_corpus
from training.pseudo_label import pseudo_label
from utils.file_utils import read_corpus, read_forms
from utils.synthetic import SYNTHETIC_FILES, generate_synthetic

PRETRAIN = PretrainConfig(lr=0.5, epochs=10, gamma=5.0, batch_size=100)


def queries_of(data):
    return [(tuple(q.text.split()), q.label) for q in data.queries]


def test_no_paraphrases_means_everything_matches():
    data = generate_synthetic(SyntheticSpec(seed=1, size=100, test_size=0, paraphrase_rate=0.0))
    part = partition_corpus(data.corpus, data.forms)
    assert part.n_a == 100 and part.n_u == 0
    assert part.conflicts == 0
    for li in part.labeled:
        assert li.label == data.gold[li.instance.instance_id]


def test_paraphrase_rate_controls_strict_coverage():
    data = generate_synthetic(SyntheticSpec(seed=2, size=100, test_size=10, paraphrase_rate=0.4))
    part = partition_corpus(data.corpus, data.forms)
    assert part.n_a == 60
    assert {x.instance_id for x in part.unlabeled} == set(data.paraphrased)
    assert len(data.test_corpus) == 10


def test_explanations_point_at_matching_sources():
    data = generate_synthetic(SyntheticSpec(seed=3, size=50, test_size=0))
    corpus = {x.instance_id: x for x in data.corpus}
    for form, expl in zip(data.forms, data.explanations):
        assert expl.id == form.form_id and expl.label == form.label
        assert exec_strict(form, corpus[expl.source_id]) == 1


def test_queries_cover_keywords_and_synonyms():
    spec = SyntheticSpec(seed=4, size=20, test_size=0, num_forms=2,
                         synonyms={"bought": ["acquired", "purchased"], "sold": ["divested"]})
    data = generate_synthetic(spec)
    assert [f.label for f in data.forms] == ["rel_bought", "rel_sold"]
    assert {q.label for q in data.queries} == {"rel_bought", "rel_sold"}
    assert sorted(q.text for q in data.queries if q.label == "rel_sold") == ["divested", "sold"]


def test_synonyms_start_dissimilar():
    data = generate_synthetic(SyntheticSpec(seed=5, size=20, test_size=0, synonym_similarity=0.25))
    matcher = MatcherModel(data.embeddings)
    queries = queries_of(data)
    same, cross = [], []
    for i, (q1, l1) in enumerate(queries):
        for q2, l2 in queries[i + 1:]:
            (same if l1 == l2 else cross).append(matcher.query_similarity(q1, q2)[0])
    assert abs(np.mean(same) - 0.25) < 0.15
    assert np.mean(cross) < np.mean(same)


def test_same_seed_writes_identical_files(tmp_path):
    spec = SyntheticSpec(seed=6, size=40, test_size=10)
    generate_synthetic(spec, str(tmp_path / "a"))
    generate_synthetic(spec, str(tmp_path / "b"))
    for name in SYNTHETIC_FILES.values():
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes(), name
    corpus = read_corpus(os.path.join(tmp_path, "a", "corpus.jsonl"))
    assert len(corpus) == 40
    assert len(read_forms(os.path.join(tmp_path, "a", "forms.jsonl"))) == 5


def test_soft_labels_expand_coverage():
    data = generate_synthetic(SyntheticSpec(seed=0, size=1000, test_size=0, paraphrase_rate=0.4))
    part = partition_corpus(data.corpus, data.forms)
    strict = {li.instance.instance_id for li in part.labeled}
    matcher = pretrain_matcher(data.corpus, queries_of(data), MatcherModel(data.embeddings), PRETRAIN)

    soft = set()
    for x in data.corpus:
        label = pseudo_label(x, data.forms, matcher, None, SoftConfig())
        if label.label == data.gold[x.instance_id] and label.u > 0.5:
            soft.add(x.instance_id)

    assert strict < soft
    assert (len(soft) - len(strict)) / len(data.corpus) >= 0.4 * 0.5


@pytest.mark.slow
def test_joint_training_beats_labeled_only_baseline():
    gains = []
    for seed in range(5):
        data = generate_synthetic(SyntheticSpec(seed=seed, size=600, test_size=200, paraphrase_rate=0.4))
        part = partition_corpus(data.corpus, data.forms)
        labels = LabelSet.from_labels([f.label for f in data.forms], "no_relation")
        matcher = pretrain_matcher(data.corpus, queries_of(data), MatcherModel(data.embeddings),
                                   PRETRAIN.model_copy(update={"seed": seed}))
        sims = build_query_sets(queries_of(data))
        cfg = TrainConfig(seed=seed, entropy_threshold=0.0)
        gold = [data.test_gold[x.instance_id] for x in data.test_corpus]

        joint = train_joint(part, data.forms, matcher, LogisticClassifier(labels, data.embeddings), cfg,
                            SoftConfig(), sims)
        baseline = train_supervised(part, matcher, LogisticClassifier(labels, data.embeddings), cfg)
        gains.append(joint.classifier.accuracy(data.test_corpus, gold)
                     - baseline.classifier.accuracy(data.test_corpus, gold))
    assert np.mean(gains) >= 0.02
