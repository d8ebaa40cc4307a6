from typing import Callable

import numpy as np


def numeric_grad(func: Callable[[np.ndarray], float], x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences (f(x + eps e_i) - f(x - eps e_i)) / 2 eps."""
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        orig = x.flat[i]
        x.flat[i] = orig + eps
        up = func(x)
        x.flat[i] = orig - eps
        down = func(x)
        x.flat[i] = orig
        grad.flat[i] = (up - down) / (2.0 * eps)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """||a - n|| / max(||a|| + ||n||, floor)."""
    analytic, numeric = np.ravel(analytic), np.ravel(numeric)
    denom = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), floor)
    return float(np.linalg.norm(analytic - numeric) / denom)
