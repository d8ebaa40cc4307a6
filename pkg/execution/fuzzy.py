"""Łukasiewicz connectives used by the logical calculation module."""
from core.errors import DomainError

TOLERANCE = 1e-12


def _check(p: float) -> float:
    if not -TOLERANCE <= p <= 1.0 + TOLERANCE:
        raise DomainError(f"truth value {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def luk_and(p1: float, p2: float) -> float:
    return max(_check(p1) + _check(p2) - 1.0, 0.0)


def luk_or(p1: float, p2: float) -> float:
    return min(_check(p1) + _check(p2), 1.0)


def luk_not(p: float) -> float:
    return 1.0 - _check(p)
