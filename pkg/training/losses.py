"""Classifier objectives for joint training.

L_a     mean NLL over a labeled batch
L_u     sum_j omega_j * NLL_j over a pseudo-labeled batch
L_total L_a + alpha * L_u + beta * L_string

Pseudo-labels and their weights omega are constants: no gradient flows
through them into the matcher.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.special import softmax

from core.models import LabeledInstance, PseudoLabeledBatch
from matching.matcher import MatcherGrad
from training.classifier import LogisticClassifier


def normalize_scores(u: Sequence[float], theta_t: float) -> np.ndarray:
    """omega_j = exp(theta_t * u_j) / sum_k exp(theta_t * u_k)."""
    u = np.asarray(u, dtype=float)
    if u.size == 0:
        raise ValueError("normalize_scores needs at least one score")
    if theta_t < 0:
        raise ValueError(f"theta_t must be >= 0, got {theta_t}")
    return softmax(theta_t * u)


def labeled_loss(batch: Sequence[LabeledInstance], classifier: LogisticClassifier) -> Tuple[float, np.ndarray]:
    if not batch:
        raise ValueError("labeled_loss needs a non-empty batch")
    weights = np.full(len(batch), 1.0 / len(batch))
    return classifier.loss_and_grad([b.instance for b in batch], [b.label for b in batch], weights)


def unlabeled_loss(batch: PseudoLabeledBatch, classifier: LogisticClassifier) -> Tuple[float, np.ndarray]:
    if not batch.items:
        return 0.0, np.zeros_like(classifier.W)
    return classifier.loss_and_grad([i.instance for i in batch.items], [i.label for i in batch.items],
                                    [i.omega for i in batch.items])


@dataclass
class TotalLoss:
    value: float
    l_a: float
    l_u: float
    l_string: float
    classifier_grad: np.ndarray
    matcher_grad: MatcherGrad


def total_loss(l_a: Tuple[float, np.ndarray], l_u: Tuple[float, np.ndarray],
               l_string: Tuple[float, MatcherGrad], alpha: float, beta: float) -> TotalLoss:
    """Combine the three objectives; the matcher only sees beta * grad(L_string)."""
    (a, ga), (u, gu), (s, gs) = l_a, l_u, l_string
    return TotalLoss(
        value=a + alpha * u + beta * s,
        l_a=a,
        l_u=u,
        l_string=s,
        classifier_grad=ga + alpha * gu,
        matcher_grad=gs.scale(beta),
    )
