"""Trainable string matcher.

Each token i gets N_c context vectors z_ij, one per sliding-window shape. With
query encoding z_q, trainable diagonal D (stored as the vector d) and window
weights v:

    M_ij = cos(z_ij * d, z_q * d)        s_i = clip(sum_j v_j M_ij, 0, 1)

Word embeddings stay frozen; only d and v are trained.
"""
import json
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from core.errors import DataFormatError, EmptyQuery
from core.models import Instance, MatcherConfig
from matching.embeddings import EmbeddingTable
from matching.encoders import ContextEncoder, EncoderFactory

logger = logging.getLogger("next.matching.matcher")

CHECKPOINT_VERSION = 1


def window_shapes(max_window: int) -> List[Tuple[int, int]]:
    """(offset, length) of each window relative to token i: [w_i] first, then for
    k = 2..W the window ending at i and the window starting at i."""
    shapes = [(0, 1)]
    for k in range(2, max_window + 1):
        shapes.append((-(k - 1), k))
        shapes.append((0, k))
    return shapes


def window_members(i: int, n_tokens: int, shape: Tuple[int, int]) -> range:
    """Token indices of a window; windows running off the sentence are clamped to its edges."""
    offset, length = shape
    start = max(i + offset, 0)
    end = min(i + offset + length, n_tokens)
    return range(start, end)


class MatcherCheckpoint(BaseModel):
    version: int = CHECKPOINT_VERSION
    encoder: str
    max_window: int
    d: List[float]
    v: List[float]


@dataclass
class MatcherGrad:
    d: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, model: "MatcherModel") -> "MatcherGrad":
        return cls(np.zeros_like(model.d), np.zeros_like(model.v))

    def __add__(self, other: "MatcherGrad") -> "MatcherGrad":
        return MatcherGrad(self.d + other.d, self.v + other.v)

    def scale(self, factor: float) -> "MatcherGrad":
        return MatcherGrad(self.d * factor, self.v * factor)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.d, self.v])


@dataclass
class ScoreTrace:
    """Intermediate values of one scoring pass, kept for backpropagation."""
    raw: np.ndarray        # (n,) M v before clipping
    cos: np.ndarray        # (n, N_c)
    dcos_dd: np.ndarray    # (n, N_c, dim)


def _cosine_and_grad(zc: np.ndarray, zq: np.ndarray, d: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """cos(zc*d, zq*d) for a stack of contexts and its gradient w.r.t. d.

    Zero-norm sides give cosine 0 with zero gradient.
    """
    a_vec = zc * d
    b_vec = zq * d
    a = np.linalg.norm(a_vec, axis=-1)
    b = np.linalg.norm(b_vec)
    valid = (a > 0) & (b > 0)
    safe_a = np.where(valid, a, 1.0)
    safe_b = b if b > 0 else 1.0
    cos = np.where(valid, (a_vec @ b_vec) / (safe_a * safe_b), 0.0)
    grad = (2.0 * zc * zq * d) / (safe_a * safe_b)[..., None] - cos[..., None] * (
        (zc ** 2) * d / (safe_a ** 2)[..., None] + (zq ** 2) * d / safe_b ** 2
    )
    grad = np.where(valid[..., None], grad, 0.0)
    return cos, grad


class MatcherModel:
    """Soft string matcher with trainable diagonal D and window weights v."""

    def __init__(self, embeddings: EmbeddingTable, cfg: Optional[MatcherConfig] = None,
                 encoder: Optional[ContextEncoder] = None,
                 d: Optional[np.ndarray] = None, v: Optional[np.ndarray] = None):
        self.embeddings = embeddings
        self.cfg = cfg or MatcherConfig()
        self.encoder = encoder or EncoderFactory.create_encoder(self.cfg.encoder)
        self.shapes = window_shapes(self.cfg.max_window)
        self.d = np.ones(embeddings.dim) if d is None else np.asarray(d, dtype=float).copy()
        self.v = self.initial_v() if v is None else np.asarray(v, dtype=float).copy()
        if self.d.shape != (embeddings.dim,):
            raise ValueError(f"d has shape {self.d.shape}, expected ({embeddings.dim},)")
        if self.v.shape != (self.n_windows,):
            raise ValueError(f"v has shape {self.v.shape}, expected ({self.n_windows},)")
        self._context_cache: Dict[Tuple[str, ...], np.ndarray] = {}
        self._warned_queries: set = set()

    @property
    def n_windows(self) -> int:
        return len(self.shapes)

    def initial_v(self) -> np.ndarray:
        """Point on the simplex: `unigram_weight` on [w_i], the rest spread evenly."""
        if self.n_windows == 1:
            return np.ones(1)
        rest = (1.0 - self.cfg.unigram_weight) / (self.n_windows - 1)
        return np.array([self.cfg.unigram_weight] + [rest] * (self.n_windows - 1))

    def copy(self) -> "MatcherModel":
        clone = MatcherModel(self.embeddings, self.cfg, self.encoder, self.d, self.v)
        clone._context_cache = self._context_cache
        return clone

    # ---------------------------------------------------------------- params

    def params(self) -> np.ndarray:
        return np.concatenate([self.d, self.v])

    def set_params(self, flat: np.ndarray) -> None:
        dim = len(self.d)
        self.d = np.asarray(flat[:dim], dtype=float).copy()
        self.v = np.asarray(flat[dim:], dtype=float).copy()

    # -------------------------------------------------------------- encoding

    def encode_contexts(self, x: Instance) -> np.ndarray:
        """Context vectors z_ij as an (n, N_c, dim) array, before D is applied."""
        key = x.lower_tokens
        cached = self._context_cache.get(key)
        if cached is not None:
            return cached
        n = len(key)
        emb = self.embeddings.lookup_many(key)
        out = np.zeros((n, self.n_windows, self.embeddings.dim))
        for i in range(n):
            for j, shape in enumerate(self.shapes):
                out[i, j] = self.encoder.encode(emb[list(window_members(i, n, shape))])
        out.setflags(write=False)
        self._context_cache[key] = out
        return out

    def encode_query(self, query: Sequence[str]) -> np.ndarray:
        tokens = [t.lower() for t in query]
        if not tokens:
            raise EmptyQuery("empty keyword query")
        return self.encoder.encode(self.embeddings.lookup_many(tokens))

    def _all_oov(self, query: Sequence[str]) -> bool:
        if any(t in self.embeddings for t in query):
            return False
        key = " ".join(query)
        if key not in self._warned_queries:
            self._warned_queries.add(key)
            logger.warning(f"every token of query {key!r} is OOV; scoring it as zeros")
        return True

    # --------------------------------------------------------------- scoring

    def trace(self, x: Instance, query: Sequence[str]) -> ScoreTrace:
        zq = self.encode_query(query)
        zc = self.encode_contexts(x)
        cos, grad = _cosine_and_grad(zc, zq, self.d)
        return ScoreTrace(raw=cos @ self.v, cos=cos, dcos_dd=grad)

    def string_match_scores(self, x: Instance, query: Sequence[str]) -> np.ndarray:
        """Per-token scores s_i in [0, 1] of `query` against `x`."""
        if not query:
            raise EmptyQuery(f"empty keyword query against instance {x.instance_id or '<unnamed>'}")
        if len(x) == 0 or self._all_oov(query):
            return np.zeros(len(x))
        return np.clip(self.trace(x, query).raw, 0.0, 1.0)

    def query_similarity(self, q1: Sequence[str], q2: Sequence[str]) -> Tuple[float, np.ndarray]:
        """cos(z_q1 D, z_q2 D) and its gradient w.r.t. d."""
        cos, grad = _cosine_and_grad(self.encode_query(q1)[None, :], self.encode_query(q2), self.d)
        return float(cos[0]), grad[0]

    # ------------------------------------------------------------ checkpoint

    def save(self, path: str) -> None:
        ckpt = MatcherCheckpoint(encoder=self.encoder.name, max_window=self.cfg.max_window,
                                 d=self.d.tolist(), v=self.v.tolist())
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(ckpt.model_dump_json(indent=2) + "\n")
        logger.info(f"Saved matcher checkpoint to {path}")

    @classmethod
    def load(cls, path: str, embeddings: EmbeddingTable, cfg: Optional[MatcherConfig] = None) -> "MatcherModel":
        with open(path, "r", encoding="utf-8") as f:
            try:
                ckpt = MatcherCheckpoint(**json.load(f))
            except (ValueError, TypeError) as e:
                raise DataFormatError(f"{path}: not a matcher checkpoint: {e}") from e
        if ckpt.version != CHECKPOINT_VERSION:
            raise DataFormatError(f"{path}: unsupported checkpoint version {ckpt.version}")
        base = cfg or MatcherConfig()
        cfg = base.model_copy(update={"encoder": ckpt.encoder, "max_window": ckpt.max_window})
        return cls(embeddings, cfg, d=np.array(ckpt.d), v=np.array(ckpt.v))
