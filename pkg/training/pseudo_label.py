import logging
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import entr

from core.errors import AnchorMissing
from core.logical_form import LogicalForm
from core.models import Instance, PseudoLabel, PseudoLabeledBatch, PseudoLabeledItem, SoftConfig
from execution.soft import Matcher, soft_score
from training.classifier import LogisticClassifier
from training.losses import normalize_scores
from training.partition import ordered_forms

logger = logging.getLogger("next.training.pseudo_label")


def soft_scores(x: Instance, forms: Sequence[LogicalForm], matcher: Matcher, soft_cfg: SoftConfig) -> np.ndarray:
    scores = np.zeros(len(forms))
    for k, form in enumerate(forms):
        try:
            scores[k] = soft_score(form, x, matcher, soft_cfg)
        except AnchorMissing:
            scores[k] = 0.0
    return scores


def prediction_entropy(p: np.ndarray) -> float:
    return float(entr(p).sum())


def pseudo_label(x: Instance, forms: Sequence[LogicalForm], matcher: Matcher,
                 classifier: Optional[LogisticClassifier], soft_cfg: SoftConfig,
                 entropy_threshold: float = 0.0) -> PseudoLabel:
    """
    Label an instance with its best-scoring form.

    Args:
        x: Unlabeled instance
        forms: Labeling functions; ties go to the lowest form id
        matcher: Soft string matcher
        classifier: Downstream model consulted for the None-label rule
        soft_cfg: Soft execution settings
        entropy_threshold: If the classifier's prediction entropy is below this,
            the None label is emitted with u = the classifier's top probability;
            values <= 0 disable the rule

    Returns:
        The pseudo-label with its raw confidence u
    """
    if not forms:
        raise ValueError("pseudo_label needs at least one form")
    forms = ordered_forms(forms)
    if classifier is not None and entropy_threshold > 0:
        p = classifier.predict_proba(x)
        if prediction_entropy(p) < entropy_threshold:
            return PseudoLabel(instance_id=x.instance_id, label=classifier.labels.none_label,
                               u=float(p.max()), from_entropy_rule=True)
    scores = soft_scores(x, forms, matcher, soft_cfg)
    best = int(np.argmax(scores))
    return PseudoLabel(instance_id=x.instance_id, label=forms[best].label, u=float(scores[best]),
                       form_id=forms[best].form_id)


def pseudo_label_batch(xs: Sequence[Instance], forms: Sequence[LogicalForm], matcher: Matcher,
                       classifier: Optional[LogisticClassifier], soft_cfg: SoftConfig,
                       theta_t: float, entropy_threshold: float = 0.0) -> PseudoLabeledBatch:
    """Pseudo-label every instance and attach the normalized weights omega."""
    if not xs:
        return PseudoLabeledBatch(items=[])
    labels: List[PseudoLabel] = [pseudo_label(x, forms, matcher, classifier, soft_cfg, entropy_threshold)
                                 for x in xs]
    omega = normalize_scores([l.u for l in labels], theta_t)
    items = [PseudoLabeledItem(instance=x, label=l.label, u=l.u, omega=float(w))
             for x, l, w in zip(xs, labels, omega)]
    return PseudoLabeledBatch(items=items)
