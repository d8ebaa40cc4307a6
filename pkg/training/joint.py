"""Joint training of the downstream classifier and the string matcher.

Each iteration samples a labeled batch B_a (size n) from the strictly matched
instances and an unlabeled batch B_u (size m) from the rest, pseudo-labels B_u
with soft execution, and takes one Adagrad step on
L_total = L_a + alpha * L_u + beta * L_string.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from core.errors import ConfigError, DegeneratePartition
from core.logical_form import LogicalForm
from core.models import Instance, Partition, PseudoLabeledBatch, SoftConfig, TrainConfig
from matching.exact import ExactMatcher
from matching.losses import FindExample, QueryClassSets, l_string
from matching.matcher import MatcherModel
from matching.pretrain import synthesize_find_examples
from training.classifier import LogisticClassifier
from training.losses import labeled_loss, total_loss, unlabeled_loss
from training.optimizer import Adagrad
from training.pseudo_label import pseudo_label_batch

logger = logging.getLogger("next.training.joint")


@dataclass(frozen=True)
class MetricsRow:
    iteration: int
    L_a: float
    L_u: float
    L_string: float
    L_total: float
    dev_accuracy: float


@dataclass
class JointResult:
    classifier: LogisticClassifier
    matcher: MatcherModel
    metrics: List[MetricsRow] = field(default_factory=list)


def _resolve_config(cfg: Union[TrainConfig, dict]) -> TrainConfig:
    if isinstance(cfg, TrainConfig):
        return cfg
    try:
        return TrainConfig(**cfg)
    except ValidationError as e:
        raise ConfigError(f"invalid training config: {e}") from e


def train_joint(partition: Partition, forms: Sequence[LogicalForm], matcher: MatcherModel,
                classifier: LogisticClassifier, cfg: Union[TrainConfig, dict],
                soft_cfg: Optional[SoftConfig] = None,
                sim_items: Sequence[QueryClassSets] = (),
                dev: Optional[Tuple[Sequence[Instance], Sequence[str]]] = None) -> JointResult:
    """
    Run joint training from a strict-match partition.

    Args:
        partition: Labeled and unlabeled instances
        forms: Labeling functions used for pseudo-labeling
        matcher: Pretrained matcher; not modified
        classifier: Initial classifier; not modified
        cfg: Training hyperparameters
        soft_cfg: Soft execution settings
        sim_items: Query class sets for the L_sim term of L_string
        dev: Optional (instances, gold labels) evaluated after every iteration

    Returns:
        Trained classifier and matcher plus one metrics row per iteration

    Raises:
        ConfigError: If the configuration is invalid or a form label is unknown to the classifier
        DegeneratePartition: If no instance was strictly matched
    """
    cfg = _resolve_config(cfg)
    soft_cfg = soft_cfg or SoftConfig()
    unknown = sorted({f.label for f in forms} - set(classifier.labels.labels))
    if unknown:
        raise ConfigError(f"form label(s) {unknown} missing from the label set")
    if partition.n_a == 0:
        raise DegeneratePartition("no instance strictly matches any form; nothing to train on")
    if not forms and partition.n_u and cfg.alpha > 0:
        raise ConfigError("pseudo-labeling needs at least one form")

    rng = np.random.default_rng(cfg.seed)
    classifier = classifier.copy()
    matcher = matcher.copy()
    threshold = cfg.threshold_for(len(classifier.labels))
    corpus = [li.instance for li in partition.labeled] + list(partition.unlabeled)
    find_pool: List[FindExample] = synthesize_find_examples(corpus, matcher.cfg.max_window, rng)
    exact = ExactMatcher() if matcher.cfg.exact_matching else None

    clf_opt = Adagrad(classifier.W.size, cfg.lr)
    matcher_opt = Adagrad(len(matcher.params()), cfg.lr)
    per_epoch = math.ceil(partition.n_a / cfg.labeled_batch)
    logger.info(f"Joint training: {cfg.epochs} epoch(s) x {per_epoch} iteration(s), "
                f"N_a={partition.n_a}, N_u={partition.n_u}, alpha={cfg.alpha}, beta={cfg.beta}")

    metrics: List[MetricsRow] = []
    iteration = 0
    for epoch in range(cfg.epochs):
        for _ in range(per_epoch):
            iteration += 1
            a_idx = rng.choice(partition.n_a, size=min(cfg.labeled_batch, partition.n_a), replace=False)
            batch_a = [partition.labeled[i] for i in a_idx]
            if partition.n_u:
                u_idx = rng.choice(partition.n_u, size=min(cfg.unlabeled_batch, partition.n_u), replace=False)
                batch_u_x = [partition.unlabeled[i] for i in u_idx]
            else:
                batch_u_x = []
            s_idx = rng.choice(len(find_pool), size=min(cfg.string_batch, len(find_pool)), replace=False) \
                if find_pool else []
            find_batch = [find_pool[i] for i in s_idx]

            # with alpha = 0 L_u carries no gradient, so B_u is drawn but not scored
            if cfg.alpha > 0:
                pseudo = pseudo_label_batch(batch_u_x, forms, exact or matcher, classifier, soft_cfg, cfg.theta_t,
                                            threshold)
            else:
                pseudo = PseudoLabeledBatch(items=[])
            loss = total_loss(
                labeled_loss(batch_a, classifier),
                unlabeled_loss(pseudo, classifier),
                l_string(find_batch, sim_items, matcher, cfg.gamma, cfg.use_find, cfg.use_sim),
                cfg.alpha,
                cfg.beta,
            )
            classifier.set_params(clf_opt.step(classifier.params(), loss.classifier_grad.ravel()))
            matcher.set_params(matcher_opt.step(matcher.params(), loss.matcher_grad.flat()))

            dev_acc = classifier.accuracy(*dev) if dev is not None else float("nan")
            metrics.append(MetricsRow(iteration, loss.l_a, loss.l_u, loss.l_string, loss.value, dev_acc))
            logger.debug(f"iter {iteration}: L_a={loss.l_a:.4f} L_u={loss.l_u:.4f} "
                         f"L_string={loss.l_string:.4f} L_total={loss.value:.4f} dev={dev_acc:.4f}")
        logger.info(f"epoch {epoch + 1}/{cfg.epochs}: L_total={metrics[-1].L_total:.4f}")
    return JointResult(classifier, matcher, metrics)


def train_supervised(partition: Partition, matcher: MatcherModel, classifier: LogisticClassifier,
                     cfg: Union[TrainConfig, dict], **kwargs) -> JointResult:
    """Baseline on the strictly matched instances only (alpha = beta = 0)."""
    cfg = _resolve_config(cfg).model_copy(update={"alpha": 0.0, "beta": 0.0})
    return train_joint(partition, [], matcher, classifier, cfg, **kwargs)
