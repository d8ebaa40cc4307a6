import logging
from typing import Callable, Dict, List, Protocol

import numpy as np

from core.errors import ConfigError

logger = logging.getLogger("next.matching.encoders")


class ContextEncoder(Protocol):
    name: str

    def encode(self, members: np.ndarray) -> np.ndarray:
        """Map a (k, dim) stack of member embeddings to one dim-vector."""
        ...


class MeanEncoder:
    name = "mean"

    def encode(self, members: np.ndarray) -> np.ndarray:
        return members.mean(axis=0)


class MaxEncoder:
    """Elementwise max over the window; a cheap non-linear alternative."""
    name = "max"

    def encode(self, members: np.ndarray) -> np.ndarray:
        return members.max(axis=0)


_ENCODERS: Dict[str, Callable[[], ContextEncoder]] = {
    "mean": MeanEncoder,
    "max": MaxEncoder,
}


class EncoderFactory:
    """Factory for context encoders"""

    @staticmethod
    def create_encoder(name: str) -> ContextEncoder:
        """
        Create a context encoder by name

        Args:
            name: Registered encoder name

        Returns:
            A context encoder instance

        Raises:
            ConfigError: If the encoder is not registered
        """
        logger.debug(f"Creating context encoder: {name}")
        if name not in _ENCODERS:
            raise ConfigError(f"Unsupported encoder: {name} (available: {', '.join(sorted(_ENCODERS))})")
        return _ENCODERS[name]()

    @staticmethod
    def register(name: str, builder: Callable[[], ContextEncoder]) -> None:
        """
        Make a new encoder available under `name`, e.g. a neural window encoder

        Args:
            name: Encoder name used in the matcher config
            builder: Zero-argument callable returning the encoder
        """
        _ENCODERS[name] = builder

    @staticmethod
    def available() -> List[str]:
        return sorted(_ENCODERS)
