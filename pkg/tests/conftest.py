import os
from typing import Dict, Optional, Tuple

import numpy as np
import pytest

from core.models import Instance
from core.predicates import AnchorRole
from matching.embeddings import EmbeddingTable
from utils.config_loader import ConfigManager

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
LEXICON_PATH = os.path.join(ROOT, "config", "lexicon.tsv")


def make_instance(text: str, subj: Optional[Tuple[int, int]] = None, obj: Optional[Tuple[int, int]] = None,
                  term: Optional[Tuple[int, int]] = None, instance_id: str = "x") -> Instance:
    anchors: Dict[AnchorRole, Tuple[int, int]] = {}
    for role, span in ((AnchorRole.SUBJECT, subj), (AnchorRole.OBJECT, obj), (AnchorRole.TERM, term)):
        if span is not None:
            anchors[role] = span
    return Instance(instance_id=instance_id, tokens=tuple(text.split()), anchors=anchors)


@pytest.fixture
def instance():
    return make_instance


@pytest.fixture(autouse=True)
def config_manager():
    ConfigManager.reset()
    ConfigManager.initialize(os.path.join(ROOT, "config", "config.json"),
                             os.path.join(ROOT, "config", "profiles.json"))
    yield ConfigManager
    ConfigManager.reset()


@pytest.fixture
def lexicon_path():
    return LEXICON_PATH


@pytest.fixture
def small_embeddings():
    words = ["a", "very", "fair", "price", "for", "nyc", "decent", "sushi", "at", "enough",
             "good", "cheap", "food", "the", "place", "is"]
    return EmbeddingTable.random(words, 8, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
