from typing import Dict, Mapping

from pydantic import BaseModel

from core.errors import DataFormatError


class ClassScores(BaseModel):
    precision: float
    recall: float
    f1: float
    support: int


class EvaluationReport(BaseModel):
    precision: float
    recall: float
    f1: float
    per_class: Dict[str, ClassScores]


def _prf(tp: int, fp: int, fn: int):
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def evaluate(predictions: Mapping[str, str], gold: Mapping[str, str], none_label: str) -> EvaluationReport:
    """
    Micro and per-class precision, recall and F1.

    The None label is never a positive class: predicting it is abstaining, and
    gold None instances only count against predictions of real classes.

    Args:
        predictions: instance id -> predicted label
        gold: instance id -> gold label
        none_label: Catch-all class name

    Returns:
        Evaluation report
    """
    if set(predictions) != set(gold):
        missing = sorted(set(gold) - set(predictions))[:5]
        extra = sorted(set(predictions) - set(gold))[:5]
        raise DataFormatError(f"prediction and gold ids differ (missing {missing}, extra {extra})")

    classes = sorted(({*gold.values(), *predictions.values()}) - {none_label})
    if not classes:
        # Nothing but the None label on either side: every abstention is correct.
        return EvaluationReport(precision=1.0, recall=1.0, f1=1.0, per_class={})
    counts = {c: [0, 0, 0] for c in classes}  # tp, fp, fn
    for key, g in gold.items():
        p = predictions[key]
        if p == g and g != none_label:
            counts[g][0] += 1
            continue
        if p != none_label:
            counts[p][1] += 1
        if g != none_label:
            counts[g][2] += 1

    per_class = {}
    for c, (tp, fp, fn) in counts.items():
        p, r, f = _prf(tp, fp, fn)
        per_class[c] = ClassScores(precision=p, recall=r, f1=f, support=tp + fn)
    tp, fp, fn = (sum(v[i] for v in counts.values()) for i in range(3))
    p, r, f = _prf(tp, fp, fn)
    return EvaluationReport(precision=p, recall=r, f1=f, per_class=per_class)
