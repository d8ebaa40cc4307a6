"""Log-linear ranking of parse candidates and marginal-likelihood training.

P(f | e) = exp(theta . phi(f)) / sum_f' exp(theta . phi(f')), with phi(f) the
combinator counts of the derivation. Training maximizes, over annotated
explanations, the log of the total probability of candidates that strictly
match the source sentence.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import logsumexp, softmax

from core.errors import AnchorMissing, NoConsistentParse, NoParse
from core.logical_form import LogicalForm
from core.models import Instance, ParserConfig
from execution.strict import exec_strict
from semparse.chart import NUM_FEATURES, ParseCandidate, chart_parse
from semparse.lexicon import Lexicon

logger = logging.getLogger("next.semparse.ranker")


@dataclass
class ParserModel:
    lexicon: Lexicon
    theta: np.ndarray
    cfg: ParserConfig

    @classmethod
    def create(cls, lexicon: Lexicon, cfg: Optional[ParserConfig] = None) -> "ParserModel":
        return cls(lexicon, np.zeros(NUM_FEATURES), cfg or ParserConfig())

    def copy(self, theta: Optional[np.ndarray] = None) -> "ParserModel":
        return ParserModel(self.lexicon, (self.theta if theta is None else theta).copy(), self.cfg)

    def parse(self, text: str, label: str = "") -> List[ParseCandidate]:
        return chart_parse(text, self.lexicon, label, self.cfg.max_candidates)


class AnnotatedExplanation(BaseModel):
    """An explanation e with its label y and the sentence x it was written about."""
    model_config = ConfigDict(frozen=True)

    id: str
    text: str
    label: str
    source: Instance


class ParseReport(BaseModel):
    total: int = 0
    unparseable: Dict[str, str] = {}
    inconsistent: Dict[str, str] = {}
    objective: List[float] = []
    accuracy_proxy: Optional[float] = None

    @property
    def usable(self) -> int:
        return self.total - len(self.unparseable) - len(self.inconsistent)


@dataclass(frozen=True)
class ParseExample:
    features: np.ndarray   # (k, d)
    consistent: np.ndarray  # (k,) bool


def score_candidates(model: ParserModel, candidates: Sequence[ParseCandidate]) -> np.ndarray:
    """Softmax of theta . phi over the candidate set."""
    if not candidates:
        raise ValueError("score_candidates needs at least one candidate")
    return softmax(np.vstack([c.features for c in candidates]) @ model.theta)


def is_consistent(form: LogicalForm, item: AnnotatedExplanation) -> bool:
    try:
        return form.label == item.label and exec_strict(form, item.source) == 1
    except AnchorMissing:
        return False


def build_examples(model: ParserModel, annotated: Sequence[AnnotatedExplanation],
                   report: Optional[ParseReport] = None) -> List[ParseExample]:
    """Candidate feature matrices and consistency masks; failures go to `report`."""
    report = report if report is not None else ParseReport()
    report.total = len(annotated)
    examples = []
    for item in annotated:
        try:
            candidates = model.parse(item.text, item.label)
        except NoParse as e:
            report.unparseable[item.id] = str(e)
            logger.warning(f"Explanation {item.id} does not parse: {e}")
            continue
        mask = np.array([is_consistent(c.form, item) for c in candidates])
        if not mask.any():
            err = NoConsistentParse(f"none of {len(candidates)} parse(s) of {item.text!r} "
                                    f"matches its source {item.source.instance_id}")
            report.inconsistent[item.id] = str(err)
            logger.warning(str(err))
            continue
        examples.append(ParseExample(np.vstack([c.features for c in candidates]), mask))
    return examples


def parser_objective(theta: np.ndarray, dataset: Sequence[ParseExample]) -> Tuple[float, np.ndarray]:
    """sum_i log sum_{f consistent} P(f | e_i) and its gradient w.r.t. theta."""
    value, grad = 0.0, np.zeros_like(theta, dtype=float)
    for ex in dataset:
        logits = ex.features @ theta
        good = logits[ex.consistent]
        value += float(logsumexp(good) - logsumexp(logits))
        grad += softmax(good) @ ex.features[ex.consistent] - softmax(logits) @ ex.features
    return value, grad


def train_parser(model: ParserModel, annotated: Sequence[AnnotatedExplanation],
                 epochs: Optional[int] = None, lr: Optional[float] = None) -> Tuple[ParserModel, ParseReport]:
    """
    Fit theta by gradient ascent on the marginal log-likelihood of consistent parses.

    Args:
        model: Starting parser; not modified
        annotated: Labeled explanations with their source sentences
        epochs: Defaults to the model's ParserConfig
        lr: Defaults to the model's ParserConfig

    Returns:
        The parser with the best-seen theta, and a report of skipped items and
        the best-seen objective after each epoch
    """
    epochs = model.cfg.epochs if epochs is None else epochs
    lr = model.cfg.lr if lr is None else lr
    report = ParseReport()
    dataset = build_examples(model, annotated, report)
    logger.info(f"Training parser on {len(dataset)}/{len(annotated)} explanations for {epochs} epoch(s)")
    if not dataset:
        return model.copy(), report

    theta = model.theta.copy()
    best_value, _ = parser_objective(theta, dataset)
    best_theta = theta.copy()
    report.objective.append(best_value)
    for epoch in range(epochs):
        _, grad = parser_objective(theta, dataset)
        theta = theta + lr * grad
        value, _ = parser_objective(theta, dataset)
        if value > best_value:
            best_value, best_theta = value, theta.copy()
        report.objective.append(best_value)
        logger.debug(f"parser epoch {epoch + 1}/{epochs}: objective={value:.6f}")
    logger.info(f"Parser objective {report.objective[0]:.4f} -> {best_value:.4f}")
    return model.copy(best_theta), report


def best_parse(model: ParserModel, text: str, label: str = "") -> LogicalForm:
    """Argmax-probability form; exact ties go to the lexicographically first serialization."""
    candidates = model.parse(text, label)
    logits = np.vstack([c.features for c in candidates]) @ model.theta
    return candidates[int(np.argmax(logits))].form


def accuracy_proxy(model: ParserModel, annotated: Sequence[AnnotatedExplanation]) -> float:
    """Share of explanations whose best parse strictly matches its source with the right label.

    This stands in for human judgement of parse correctness.
    """
    if not annotated:
        return 0.0
    hits = 0
    for item in annotated:
        try:
            hits += is_consistent(best_parse(model, item.text, item.label), item)
        except NoParse:
            pass
    return hits / len(annotated)


def compile_explanations(model: ParserModel, annotated: Sequence[AnnotatedExplanation],
                         report: Optional[ParseReport] = None) -> List[LogicalForm]:
    """Best parse of every explanation, with the explanation id as form id; failures are dropped."""
    forms = []
    for item in annotated:
        try:
            form = best_parse(model, item.text, item.label)
        except NoParse as e:
            if report is not None:
                report.unparseable[item.id] = str(e)
            logger.warning(f"Dropping explanation {item.id}: {e}")
            continue
        forms.append(form.model_copy(update={"form_id": item.id}))
    logger.info(f"Compiled {len(forms)}/{len(annotated)} explanations into logical forms")
    return forms
