import numpy as np
import pytest

from core.errors import DomainError
from execution.fuzzy import luk_and, luk_not, luk_or

N = 10_000
TOL = 1e-12


@pytest.fixture
def samples():
    rng = np.random.default_rng(0)
    return rng.random((N, 3))


def test_displayed_values():
    assert luk_and(0.6, 0.7) == pytest.approx(0.3, abs=TOL)
    assert luk_or(0.6, 0.7) == 1.0
    assert luk_not(0.25) == 0.75


def test_boolean_restriction():
    for p in (0.0, 1.0):
        for q in (0.0, 1.0):
            assert luk_and(p, q) == float(bool(p) and bool(q))
            assert luk_or(p, q) == float(bool(p) or bool(q))
        assert luk_not(p) == 1.0 - p


def test_laws(samples):
    for p, q, r in samples:
        assert luk_and(p, q) == luk_and(q, p)
        assert luk_or(p, q) == luk_or(q, p)
        assert abs(luk_and(p, 1.0) - p) <= TOL
        assert abs(luk_or(p, 0.0) - p) <= TOL
        assert abs(luk_not(luk_not(p)) - p) <= TOL
        assert abs(luk_not(luk_and(p, q)) - luk_or(luk_not(p), luk_not(q))) <= TOL
        lo, hi = min(q, r), max(q, r)
        assert luk_and(p, lo) <= luk_and(p, hi) + TOL
        assert luk_or(p, lo) <= luk_or(p, hi) + TOL
        for value in (luk_and(p, q), luk_or(p, q), luk_not(p)):
            assert 0.0 <= value <= 1.0


@pytest.mark.parametrize("bad", [-0.1, 1.5, float("nan")])
def test_domain_error(bad):
    with pytest.raises(DomainError):
        luk_and(bad, 0.5)
    with pytest.raises(DomainError):
        luk_not(bad)


def test_tolerance_is_clamped():
    assert luk_not(1.0 + 1e-13) == 0.0
