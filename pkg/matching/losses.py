"""Matcher objectives: L_find (binary cross-entropy on synthetic find tasks),
L_sim (contrastive query similarity) and L_string = L_find + gamma * L_sim.

Every loss returns (value, MatcherGrad) with analytic gradients w.r.t. d and v.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from core.models import Instance
from matching.matcher import MatcherGrad, MatcherModel

EPS = 1e-7


@dataclass(frozen=True)
class FindExample:
    """Sentence, keyword query and per-token targets (1 where the query was extracted)."""
    instance: Instance
    query: Tuple[str, ...]
    targets: np.ndarray

    def __post_init__(self):
        if len(self.targets) != len(self.instance):
            raise ValueError(f"{len(self.targets)} targets for {len(self.instance)} tokens")


class QueryClassSets(BaseModel):
    """Same-class (positive) and cross-class (negative) queries for one query."""
    model_config = ConfigDict(frozen=True)

    query: Tuple[str, ...]
    positives: Tuple[Tuple[str, ...], ...] = ()
    negatives: Tuple[Tuple[str, ...], ...] = ()

    @model_validator(mode="after")
    def _check(self) -> "QueryClassSets":
        if self.query in self.positives:
            raise ValueError("a query cannot be its own positive")
        if set(self.positives) & set(self.negatives):
            raise ValueError("positive and negative query sets overlap")
        return self


def bce(p: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Per-token binary cross-entropy; `p` must already be clamped into (0, 1)."""
    return -(k * np.log(p) + (1.0 - k) * np.log(1.0 - p))


def _find_one(example: FindExample, model: MatcherModel) -> Tuple[float, MatcherGrad]:
    n = len(example.instance)
    if n == 0:
        return 0.0, MatcherGrad.zeros(model)
    trace = model.trace(example.instance, example.query)
    p = np.clip(trace.raw, EPS, 1.0 - EPS)
    k = example.targets
    loss = float(bce(p, k).mean())
    # clipping blocks the gradient wherever it is active
    passes = (trace.raw > EPS) & (trace.raw < 1.0 - EPS)
    dl_dp = np.where(passes, (p - k) / (p * (1.0 - p)), 0.0) / n
    grad_v = trace.cos.T @ dl_dp
    grad_d = np.einsum("i,j,ijk->k", dl_dp, model.v, trace.dcos_dd)
    return loss, MatcherGrad(grad_d, grad_v)


def l_find(batch: Sequence[FindExample], model: MatcherModel) -> Tuple[float, MatcherGrad]:
    """Mean over examples of the per-token mean BCE between scores and targets."""
    if not batch:
        raise ValueError("l_find needs a non-empty batch")
    total, grad = 0.0, MatcherGrad.zeros(model)
    for example in batch:
        loss, g = _find_one(example, model)
        total += loss
        grad = grad + g
    return total / len(batch), grad.scale(1.0 / len(batch))


def l_sim(sets: QueryClassSets, model: MatcherModel) -> Tuple[float, MatcherGrad]:
    """max over Q+ of (tau - cos)_+^2 plus max over Q- of (cos)_+^2; an empty set contributes 0."""
    tau = model.cfg.tau
    loss, grad_d = 0.0, np.zeros_like(model.d)
    if sets.positives:
        sims = [model.query_similarity(sets.query, q) for q in sets.positives]
        hinges = [max(tau - cos, 0.0) for cos, _ in sims]
        best = int(np.argmax(hinges))
        if hinges[best] > 0:
            loss += hinges[best] ** 2
            grad_d -= 2.0 * hinges[best] * sims[best][1]
    if sets.negatives:
        sims = [model.query_similarity(sets.query, q) for q in sets.negatives]
        hinges = [max(cos, 0.0) for cos, _ in sims]
        best = int(np.argmax(hinges))
        if hinges[best] > 0:
            loss += hinges[best] ** 2
            grad_d += 2.0 * hinges[best] * sims[best][1]
    return loss, MatcherGrad(grad_d, np.zeros_like(model.v))


def mean_l_sim(items: Sequence[QueryClassSets], model: MatcherModel) -> Tuple[float, MatcherGrad]:
    if not items:
        return 0.0, MatcherGrad.zeros(model)
    total, grad = 0.0, MatcherGrad.zeros(model)
    for sets in items:
        loss, g = l_sim(sets, model)
        total += loss
        grad = grad + g
    return total / len(items), grad.scale(1.0 / len(items))


def l_string(find_batch: Sequence[FindExample], sim_items: Sequence[QueryClassSets],
             model: MatcherModel, gamma: float, use_find: bool = True,
             use_sim: bool = True) -> Tuple[float, MatcherGrad]:
    """L_find + gamma * L_sim, with L_sim averaged over `sim_items`."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    loss, grad = 0.0, MatcherGrad.zeros(model)
    if use_find and find_batch:
        loss, grad = l_find(find_batch, model)
    if use_sim and gamma > 0 and sim_items:
        sim, sim_grad = mean_l_sim(sim_items, model)
        loss += gamma * sim
        grad = grad + sim_grad.scale(gamma)
    return loss, grad


def build_query_sets(queries: Sequence[Tuple[Tuple[str, ...], str]]) -> List[QueryClassSets]:
    """Q+/Q- for every (query tokens, label) pair: same label vs different label."""
    unique = sorted(set(queries))
    out = []
    for q, label in unique:
        positives = tuple(sorted({p for p, l in unique if l == label and p != q}))
        negatives = tuple(sorted({p for p, l in unique if l != label and p != q} - set(positives)))
        out.append(QueryClassSets(query=q, positives=positives, negatives=negatives))
    return out
