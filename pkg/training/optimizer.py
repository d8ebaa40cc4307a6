import numpy as np


class Adagrad:
    """Per-parameter adaptive steps: G += g*g; p -= lr * g / (sqrt(G) + eps).

    Works on one flat parameter vector; callers flatten and unflatten.
    """

    def __init__(self, size: int, lr: float, eps: float = 1e-10):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        self.lr = lr
        self.eps = eps
        self.accum = np.zeros(size)

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Return the updated parameters; `params` itself is left untouched."""
        if grad.shape != self.accum.shape:
            raise ValueError(f"gradient shape {grad.shape} != {self.accum.shape}")
        self.accum += grad * grad
        return params - self.lr * grad / (np.sqrt(self.accum) + self.eps)
