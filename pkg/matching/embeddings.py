import logging
from typing import Dict, Iterable, Optional, Sequence, Set

import numpy as np

from core.errors import DataFormatError

logger = logging.getLogger("next.matching.embeddings")


class EmbeddingTable:
    """Frozen word vectors; unknown tokens map to the zero vector."""

    def __init__(self, vectors: Dict[str, np.ndarray], dim: Optional[int] = None):
        if not vectors and dim is None:
            raise ValueError("an empty embedding table needs an explicit dimension")
        self.dim = dim if dim is not None else len(next(iter(vectors.values())))
        self._index: Dict[str, int] = {}
        rows = []
        for token, vec in vectors.items():
            vec = np.asarray(vec, dtype=float)
            if vec.shape != (self.dim,):
                raise DataFormatError(f"vector for {token!r} has shape {vec.shape}, expected ({self.dim},)")
            self._index[token.lower()] = len(rows)
            rows.append(vec)
        self.matrix = np.vstack(rows) if rows else np.zeros((0, self.dim))
        self.matrix.setflags(write=False)
        self._zero = np.zeros(self.dim)
        self._zero.setflags(write=False)
        self._warned: Set[str] = set()

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, token: str) -> bool:
        return token.lower() in self._index

    @property
    def vocab(self) -> Sequence[str]:
        return list(self._index)

    def lookup(self, token: str) -> np.ndarray:
        idx = self._index.get(token.lower())
        if idx is None:
            if token not in self._warned:
                self._warned.add(token)
                logger.warning(f"OOV token {token!r}: using the zero vector")
            return self._zero
        return self.matrix[idx]

    def lookup_many(self, tokens: Iterable[str]) -> np.ndarray:
        rows = [self.lookup(t) for t in tokens]
        return np.vstack(rows) if rows else np.zeros((0, self.dim))

    @classmethod
    def load(cls, path: str) -> "EmbeddingTable":
        """Read the word-vector text format: `token v1 ... v_dim` per line.

        A leading `count dim` header line (word2vec style) is skipped.
        """
        vectors: Dict[str, np.ndarray] = {}
        dim = None
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                parts = line.rstrip("\n").split(" ")
                if not parts or not parts[0]:
                    continue
                if line_no == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                    continue
                try:
                    vec = np.array([float(p) for p in parts[1:] if p], dtype=float)
                except ValueError as e:
                    raise DataFormatError(f"{path}:{line_no}: bad vector for {parts[0]!r}") from e
                if dim is None:
                    dim = len(vec)
                elif len(vec) != dim:
                    raise DataFormatError(f"{path}:{line_no}: expected {dim} values, got {len(vec)}")
                vectors[parts[0]] = vec
        if dim is None:
            raise DataFormatError(f"{path}: no vectors found")
        logger.info(f"Loaded {len(vectors)} vectors of dimension {dim} from {path}")
        return cls(vectors, dim)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for token, idx in self._index.items():
                f.write(token + " " + " ".join(repr(float(v)) for v in self.matrix[idx]) + "\n")

    @classmethod
    def random(cls, vocab: Iterable[str], dim: int, seed: int = 0) -> "EmbeddingTable":
        rng = np.random.default_rng(seed)
        return cls({t: rng.normal(size=dim) for t in sorted(set(vocab))}, dim)
