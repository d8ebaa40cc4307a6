import json
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.special import log_softmax, softmax

from core.errors import DataFormatError
from core.models import Instance, LabelSet
from core.predicates import AnchorRole
from matching.embeddings import EmbeddingTable
from training.optimizer import Adagrad

logger = logging.getLogger("next.training.classifier")

PROB_EPS = 1e-12
CHECKPOINT_VERSION = 1
ANCHOR_ORDER = (AnchorRole.SUBJECT, AnchorRole.OBJECT, AnchorRole.TERM)


class LogisticClassifier:
    """Multinomial logistic regression over
    [mean token embedding; mean SUBJECT; mean OBJECT; mean TERM; 1].

    Missing anchors contribute zero blocks.
    """

    def __init__(self, labels: LabelSet, embeddings: EmbeddingTable, weights: Optional[np.ndarray] = None):
        self.labels = labels
        self.embeddings = embeddings
        self.n_features = 4 * embeddings.dim + 1
        shape = (len(labels), self.n_features)
        self.W = np.zeros(shape) if weights is None else np.asarray(weights, dtype=float).reshape(shape).copy()
        self._features: Dict[Tuple, np.ndarray] = {}

    def copy(self) -> "LogisticClassifier":
        clone = LogisticClassifier(self.labels, self.embeddings, self.W)
        clone._features = self._features
        return clone

    def params(self) -> np.ndarray:
        return self.W.ravel().copy()

    def set_params(self, flat: np.ndarray) -> None:
        self.W = np.asarray(flat, dtype=float).reshape(self.W.shape).copy()

    def featurize(self, x: Instance) -> np.ndarray:
        key = (x.lower_tokens, tuple(sorted((r.value, s) for r, s in x.anchors.items())))
        cached = self._features.get(key)
        if cached is not None:
            return cached
        dim = self.embeddings.dim
        emb = self.embeddings.lookup_many(x.lower_tokens)
        blocks = [emb.mean(axis=0) if len(x) else np.zeros(dim)]
        for role in ANCHOR_ORDER:
            if role in x.anchors:
                start, end = x.anchors[role]
                blocks.append(emb[start:end].mean(axis=0))
            else:
                blocks.append(np.zeros(dim))
        blocks.append(np.ones(1))
        f = np.concatenate(blocks)
        f.setflags(write=False)
        self._features[key] = f
        return f

    def feature_matrix(self, xs: Sequence[Instance]) -> np.ndarray:
        if not xs:
            return np.zeros((0, self.n_features))
        return np.vstack([self.featurize(x) for x in xs])

    def predict_proba(self, x: Instance) -> np.ndarray:
        p = softmax(self.W @ self.featurize(x))
        return (p + PROB_EPS) / (1.0 + len(p) * PROB_EPS)

    def predict(self, x: Instance) -> str:
        return self.labels.labels[int(np.argmax(self.W @ self.featurize(x)))]

    def loss_and_grad(self, xs: Sequence[Instance], labels: Sequence[str],
                      weights: Sequence[float]) -> Tuple[float, np.ndarray]:
        """sum_i w_i * -log p(y_i | x_i) and its gradient w.r.t. W (same shape as W)."""
        if not xs:
            return 0.0, np.zeros_like(self.W)
        X = self.feature_matrix(xs)
        y = np.array([self.labels.index(l) for l in labels])
        w = np.asarray(weights, dtype=float)
        logp = log_softmax(X @ self.W.T, axis=1)
        loss = float(-(w * logp[np.arange(len(y)), y]).sum())
        delta = np.exp(logp)
        delta[np.arange(len(y)), y] -= 1.0
        grad = (delta * w[:, None]).T @ X
        return loss, grad

    def fit(self, xs: Sequence[Instance], labels: Sequence[str], epochs: int = 200, lr: float = 0.5,
            weights: Optional[Sequence[float]] = None) -> List[float]:
        """Full-batch Adagrad on the weighted NLL (uniform mean by default); returns the loss per epoch."""
        if weights is None:
            weights = np.full(len(xs), 1.0 / max(len(xs), 1))
        optimizer = Adagrad(self.W.size, lr)
        history = []
        for _ in range(epochs):
            loss, grad = self.loss_and_grad(xs, labels, weights)
            history.append(loss)
            self.set_params(optimizer.step(self.params(), grad.ravel()))
        return history

    def accuracy(self, xs: Sequence[Instance], gold: Sequence[str]) -> float:
        if not xs:
            return float("nan")
        return float(np.mean([self.predict(x) == g for x, g in zip(xs, gold)]))

    # ------------------------------------------------------------ checkpoint

    def save(self, path: str) -> None:
        ckpt = ClassifierCheckpoint(labels=list(self.labels.labels), none_label=self.labels.none_label,
                                    dim=self.embeddings.dim, weights=self.W.tolist())
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(ckpt.model_dump_json() + "\n")
        logger.info(f"Saved classifier checkpoint to {path}")

    @classmethod
    def load(cls, path: str, embeddings: EmbeddingTable) -> "LogisticClassifier":
        with open(path, "r", encoding="utf-8") as f:
            try:
                ckpt = ClassifierCheckpoint(**json.load(f))
            except (ValueError, TypeError) as e:
                raise DataFormatError(f"{path}: not a classifier checkpoint: {e}") from e
        if ckpt.version != CHECKPOINT_VERSION:
            raise DataFormatError(f"{path}: unsupported checkpoint version {ckpt.version}")
        if ckpt.dim != embeddings.dim:
            raise DataFormatError(f"{path}: trained on {ckpt.dim}-d embeddings, got {embeddings.dim}-d")
        labels = LabelSet(labels=tuple(ckpt.labels), none_label=ckpt.none_label)
        return cls(labels, embeddings, np.array(ckpt.weights))


class ClassifierCheckpoint(BaseModel):
    version: int = CHECKPOINT_VERSION
    labels: List[str]
    none_label: str
    dim: int
    weights: List[List[float]]
