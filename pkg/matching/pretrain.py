import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.models import Instance, PretrainConfig
from matching.losses import FindExample, QueryClassSets, build_query_sets, l_string
from matching.matcher import MatcherModel
from training.optimizer import Adagrad
from utils.text import find_occurrences

logger = logging.getLogger("next.matching.pretrain")

NEGATIVE_ATTEMPTS = 10


def find_targets(x: Instance, query: Sequence[str]) -> np.ndarray:
    targets = np.zeros(len(x))
    for start, _ in find_occurrences(x.lower_tokens, query):
        targets[start] = 1.0
    return targets


def synthesize_find_examples(corpus: Sequence[Instance], max_window: int,
                             rng: np.random.Generator) -> List[FindExample]:
    """One extracted-span positive per sentence, plus one negative from another sentence
    that does not contain the span (skipped if none is found quickly)."""
    usable = [x for x in corpus if len(x) > 0]
    examples: List[FindExample] = []
    for idx, x in enumerate(usable):
        n = len(x)
        length = int(rng.integers(1, min(max_window, n) + 1))
        start = int(rng.integers(0, n - length + 1))
        query = x.lower_tokens[start:start + length]
        examples.append(FindExample(x, query, find_targets(x, query)))
        if len(usable) < 2:
            continue
        for _ in range(NEGATIVE_ATTEMPTS):
            other = usable[int(rng.integers(0, len(usable)))]
            if other is not x and not find_occurrences(other.lower_tokens, query):
                examples.append(FindExample(other, query, np.zeros(len(other))))
                break
    return examples


def pretrain_matcher(corpus: Sequence[Instance], queries: Sequence[Tuple[Tuple[str, ...], str]],
                     model: MatcherModel, cfg: Optional[PretrainConfig] = None,
                     history: Optional[List[float]] = None) -> MatcherModel:
    """
    Pretrain the matcher on L_find over synthesized find tasks plus gamma * L_sim
    over the labeling-function queries.

    Args:
        corpus: Sentences to extract random query spans from
        queries: (query tokens, label) pairs taken from the logical forms
        model: Initial matcher; not modified
        cfg: Pretraining hyperparameters
        history: Optional list that receives the full-set loss before training and after each epoch

    Returns:
        A new matcher holding the best-seen parameters
    """
    cfg = cfg or PretrainConfig()
    model = model.copy()
    if cfg.epochs == 0 or not corpus:
        return model

    rng = np.random.default_rng(cfg.seed)
    examples = synthesize_find_examples(corpus, model.cfg.max_window, rng)
    sim_items: List[QueryClassSets] = build_query_sets(queries)
    logger.info(f"Pretraining matcher on {len(examples)} find examples and "
                f"{len(sim_items)} query sets for {cfg.epochs} epoch(s)")

    def full_loss() -> float:
        return l_string(examples, sim_items, model, cfg.gamma)[0]

    best_loss = full_loss()
    best_params = model.params()
    if history is not None:
        history.append(best_loss)
    optimizer = Adagrad(len(best_params), cfg.lr)

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(examples))
        for b in range(0, len(order), cfg.batch_size):
            batch = [examples[i] for i in order[b:b + cfg.batch_size]]
            _, grad = l_string(batch, sim_items, model, cfg.gamma)
            model.set_params(optimizer.step(model.params(), grad.flat()))
        loss = full_loss()
        logger.info(f"pretrain epoch {epoch + 1}/{cfg.epochs}: L_string={loss:.6f}")
        if loss < best_loss:
            best_loss, best_params = loss, model.params()
        if history is not None:
            history.append(best_loss)

    model.set_params(best_params)
    return model
