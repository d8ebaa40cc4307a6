import logging
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.logical_form import LogicalForm
from core.models import ExplanationRecord, Instance, QueryRecord, SyntheticSpec
from core.predicates import AnchorRole
from matching.embeddings import EmbeddingTable

from .file_utils import (
    ensure_directory_exists,
    write_corpus,
    write_explanations,
    write_forms,
    write_labels,
    write_queries,
)

logger = logging.getLogger("next.synthetic")

# Dimensions reserved for the per-class direction shared by a keyword and its synonyms.
CLASS_BLOCK = 10

DEFAULT_RELATIONS: Tuple[Tuple[str, str, Tuple[str, ...]], ...] = (
    ("founded_by", "founded", ("established", "launched")),
    ("works_for", "employed", ("hired", "recruited")),
    ("born_in", "born", ("raised", "native")),
    ("spouse_of", "married", ("wed", "espoused")),
    ("member_of", "joined", ("enlisted", "entered")),
)

FILLERS = (
    "the", "a", "company", "said", "on", "monday", "in", "report", "city", "new",
    "year", "first", "last", "group", "it", "was", "also", "which", "that", "has",
    "been", "its", "for", "with", "from", "told", "reporters", "during", "week", "local",
)
SUBJECTS = ("alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi", "ivan", "judy")
OBJECTS = ("acme", "globex", "initech", "umbrella", "hooli", "stark", "wayne", "wonka", "tyrell", "cyberdyne")

# One gold form shape per relation slot. `{kw}` is the keyword literal.
FORM_TEMPLATES = (
    '(Is (Word "{kw}") (Between ArgX ArgY))',
    '(Is (Word "{kw}") (Direct (Left ArgY)))',
    '(Is (Word "{kw}") (AtMost (Right ArgY) (Int 2)))',
    '(And (Is (Word "{kw}") (Left ArgX)) (Is ArgY (Right ArgX)))',
    '(Is (Word "{kw}") (Direct (Right ArgX)))',
)

# Phrasings that the bundled lexicon parses into the matching form above.
EXPLANATION_TEMPLATES: Tuple[Tuple[str, ...], ...] = (
    ("the word '{kw}' is between SUBJECT and OBJECT",
     "'{kw}' appears between SUBJECT and OBJECT",
     "the word '{kw}' occurs between SUBJECT and OBJECT"),
    ("the word '{kw}' is directly before OBJECT",
     "'{kw}' is right before OBJECT",
     "the word '{kw}' directly precedes OBJECT",
     "OBJECT is directly preceded by '{kw}'"),
    ("the word '{kw}' is within 2 words after OBJECT",
     "'{kw}' appears no more than 2 words after OBJECT",
     "the word '{kw}' is at most two words after OBJECT"),
    ("the word '{kw}' is before SUBJECT and OBJECT is after SUBJECT",
     "'{kw}' precedes SUBJECT and OBJECT follows SUBJECT"),
    ("the word '{kw}' is directly after SUBJECT",
     "'{kw}' is right after SUBJECT",
     "'{kw}' directly follows SUBJECT",
     "SUBJECT is directly followed by '{kw}'"),
)


@dataclass
class SyntheticDataset:
    """Everything `gen` writes, kept in memory."""
    corpus: List[Instance]
    gold: Dict[str, str]
    forms: List[LogicalForm]
    explanations: List[ExplanationRecord]
    queries: List[QueryRecord]
    embeddings: EmbeddingTable
    test_corpus: List[Instance] = field(default_factory=list)
    test_gold: Dict[str, str] = field(default_factory=dict)
    paraphrased: List[str] = field(default_factory=list)


def relations_for(spec: SyntheticSpec) -> List[Tuple[str, str, Tuple[str, ...]]]:
    """(label, keyword, synonyms) per gold form."""
    if spec.synonyms:
        relations = [(f"rel_{kw}", kw.lower(), tuple(s.lower() for s in syns))
                     for kw, syns in spec.synonyms.items()]
    else:
        relations = list(DEFAULT_RELATIONS)
    if len(relations) < spec.num_forms:
        raise ValueError(f"synonym table has {len(relations)} keyword(s), need {spec.num_forms}")
    relations = relations[:spec.num_forms]
    for _, kw, syns in relations:
        if not syns:
            raise ValueError(f"keyword {kw!r} has no synonyms")
    return relations


class _SentenceBuilder:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def fill(self, lo: int, hi: int) -> List[str]:
        n = int(self.rng.integers(lo, hi + 1))
        return [FILLERS[i] for i in self.rng.integers(0, len(FILLERS), size=n)]

    def build(self, shape: int, keyword: str) -> Tuple[List[str], int, int]:
        """Tokens plus subject/object positions for one of the five layouts."""
        s = SUBJECTS[int(self.rng.integers(len(SUBJECTS)))]
        o = OBJECTS[int(self.rng.integers(len(OBJECTS)))]
        f = self.fill
        layouts: Dict[int, Callable[[], List[object]]] = {
            0: lambda: [f(0, 2), "S", f(1, 2), keyword, f(1, 2), "O", f(0, 2)],
            1: lambda: [f(0, 2), "S", f(1, 3), keyword, "O", f(0, 2)],
            2: lambda: [f(0, 2), "S", f(1, 2), "O", f(0, 1), keyword, f(0, 2)],
            3: lambda: [f(0, 2), keyword, f(1, 2), "S", f(1, 2), "O", f(0, 2)],
            4: lambda: [f(0, 2), "S", keyword, f(1, 3), "O", f(0, 2)],
        }
        tokens: List[str] = []
        s_pos = o_pos = -1
        for part in layouts[shape]():
            if part == "S":
                s_pos = len(tokens)
                tokens.append(s)
            elif part == "O":
                o_pos = len(tokens)
                tokens.append(o)
            elif isinstance(part, list):
                tokens.extend(part)
            else:
                tokens.append(part)
        return tokens, s_pos, o_pos


def _build_embeddings(relations, spec: SyntheticSpec, rng: np.random.Generator) -> EmbeddingTable:
    """
    Keywords and their synonyms share a unit class direction in the first
    CLASS_BLOCK dimensions and differ by word-specific noise elsewhere, sized so
    that the raw cosine between two same-class words is about synonym_similarity.
    Other words carry noise only.
    """
    dim = spec.dim
    basis, _ = np.linalg.qr(rng.normal(size=(CLASS_BLOCK, CLASS_BLOCK)))
    noise_norm = float(np.sqrt(1.0 / spec.synonym_similarity - 1.0))
    total_norm = float(np.sqrt(1.0 + noise_norm ** 2))

    def noise(norm: float) -> np.ndarray:
        vec = np.zeros(dim)
        tail = rng.normal(size=dim - CLASS_BLOCK)
        vec[CLASS_BLOCK:] = tail / np.linalg.norm(tail) * norm
        return vec

    vectors: Dict[str, np.ndarray] = {}
    for c, (_, kw, syns) in enumerate(relations):
        for word in (kw, *syns):
            vec = noise(noise_norm)
            vec[:CLASS_BLOCK] = basis[:, c]
            vectors[word] = vec
    for word in (*FILLERS, *SUBJECTS, *OBJECTS):
        if word not in vectors:
            vectors[word] = noise(total_norm)
    return EmbeddingTable(vectors, dim)


def _generate_split(prefix: str, size: int, relations, spec: SyntheticSpec, rng: np.random.Generator):
    builder = _SentenceBuilder(rng)
    shapes = rng.permutation([i % spec.num_forms for i in range(size)])
    n_para = int(round(spec.paraphrase_rate * size))
    para = set(int(i) for i in rng.choice(size, size=n_para, replace=False)) if n_para else set()

    instances, gold, paraphrased, shape_of = [], {}, [], {}
    for i, shape in enumerate(shapes):
        shape = int(shape)
        label, kw, syns = relations[shape]
        word = kw
        if i in para:
            word = syns[int(rng.integers(len(syns)))]
        tokens, s_pos, o_pos = builder.build(shape, word)
        instance_id = f"{prefix}{i:05d}"
        instances.append(Instance(instance_id=instance_id, tokens=tuple(tokens),
                                  anchors={AnchorRole.SUBJECT: (s_pos, s_pos + 1),
                                           AnchorRole.OBJECT: (o_pos, o_pos + 1)}))
        gold[instance_id] = label
        shape_of[instance_id] = shape
        if i in para:
            paraphrased.append(instance_id)
    return instances, gold, paraphrased, shape_of


def generate_synthetic(spec: SyntheticSpec, output_dir: Optional[str] = None) -> SyntheticDataset:
    """
    Generate a paraphrase corpus whose gold labels come from known logical forms.

    Exactly round(paraphrase_rate * size) instances have their keyword swapped
    for a synonym; those fail strict matching against every form.

    Args:
        spec: Generator recipe
        output_dir: When given, every artifact is also written there

    Returns:
        The generated dataset
    """
    rng = np.random.default_rng(spec.seed)
    relations = relations_for(spec)

    forms = [LogicalForm.from_sexpr(FORM_TEMPLATES[k].format(kw=kw), label, f"f{k}")
             for k, (label, kw, _) in enumerate(relations)]

    corpus, gold, paraphrased, shape_of = _generate_split("s", spec.size, relations, spec, rng)
    test_corpus, test_gold, _, _ = _generate_split("t", spec.test_size, relations, spec, rng)

    explanations = []
    para_ids = set(paraphrased)
    for k, (label, kw, _) in enumerate(relations):
        sources = [x.instance_id for x in corpus if shape_of[x.instance_id] == k]
        clean = [s for s in sources if s not in para_ids]
        if not clean:
            logger.warning(f"form f{k} has no unparaphrased instance; its explanation will not be consistent")
        source = (clean or sources or [""])[0]
        explanations.append(ExplanationRecord(id=f"f{k}", text=EXPLANATION_TEMPLATES[k][0].format(kw=kw),
                                              label=label, source_id=source))

    queries = []
    for k, (label, kw, syns) in enumerate(relations):
        for j, word in enumerate((kw, *syns)):
            queries.append(QueryRecord(id=f"q{k}-{j}", text=word, label=label))

    embeddings = _build_embeddings(relations, spec, rng)

    dataset = SyntheticDataset(corpus=corpus, gold=gold, forms=forms, explanations=explanations,
                               queries=queries, embeddings=embeddings, test_corpus=test_corpus,
                               test_gold=test_gold, paraphrased=paraphrased)
    logger.info(f"Generated {len(corpus)} instance(s), {len(paraphrased)} paraphrased, "
                f"{len(forms)} form(s), {len(test_corpus)} test instance(s)")
    if output_dir:
        write_synthetic(dataset, output_dir)
    return dataset


SYNTHETIC_FILES = {
    "corpus": "corpus.jsonl",
    "gold": "gold.jsonl",
    "forms": "forms.jsonl",
    "explanations": "explanations.jsonl",
    "queries": "queries.jsonl",
    "embeddings": "embeddings.txt",
    "test_corpus": "test_corpus.jsonl",
    "test_gold": "test_gold.jsonl",
}


def write_synthetic(dataset: SyntheticDataset, output_dir: str) -> Dict[str, str]:
    ensure_directory_exists(output_dir)
    paths = {key: os.path.join(output_dir, name) for key, name in SYNTHETIC_FILES.items()}
    write_corpus(paths["corpus"], dataset.corpus)
    write_labels(paths["gold"], dataset.gold)
    write_forms(paths["forms"], dataset.forms)
    write_explanations(paths["explanations"], dataset.explanations)
    write_queries(paths["queries"], dataset.queries)
    dataset.embeddings.save(paths["embeddings"])
    write_corpus(paths["test_corpus"], dataset.test_corpus)
    write_labels(paths["test_gold"], dataset.test_gold)
    logger.info(f"Wrote synthetic dataset to {output_dir}")
    return paths


def explanation_variants(kw: str, shape: int) -> Sequence[str]:
    return [t.format(kw=kw) for t in EXPLANATION_TEMPLATES[shape]]
