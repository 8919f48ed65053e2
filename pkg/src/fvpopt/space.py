"""Finite-dimensional real inner-product space primitives.

Vectors are plain 1-D ``numpy.float64`` arrays; ``as_vector`` is the single
validation funnel. Everything else in the package builds on the handful of
operations here.
"""

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import DimensionMismatchError, UsageError

__all__ = [
    "as_vector",
    "inner",
    "norm",
    "expand_sum_square",
    "RealSequenceTerm",
    "lemma1_limit_check",
]


def as_vector(x) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float64 array.

    Raises
    ------
    UsageError
        If the input is not 1-D or contains NaN/Inf entries.
    """
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise UsageError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise UsageError("vector has non-finite coordinates")
    return v


def _check_dims(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise DimensionMismatchError(
            f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}"
        )


def inner(x, y) -> float:
    """Euclidean inner product of two vectors of equal dimension."""
    x, y = as_vector(x), as_vector(y)
    _check_dims(x, y)
    return float(np.dot(x, y))


def norm(x) -> float:
    """Euclidean norm, ``sqrt(inner(x, x))``."""
    x = as_vector(x)
    return float(np.linalg.norm(x))


def expand_sum_square(u, v) -> tuple:
    """Return the three terms ``(||u||^2, ||v||^2, 2<u, v>)``.

    Their sum equals ``||u + v||^2`` exactly in real arithmetic; tests
    assert the identity to tight floating-point tolerance.
    """
    u, v = as_vector(u), as_vector(v)
    _check_dims(u, v)
    return (float(np.dot(u, u)), float(np.dot(v, v)), 2.0 * float(np.dot(u, v)))


@dataclass(frozen=True)
class RealSequenceTerm:
    """One term of a nonnegative recursive sequence.

    ``a`` is the sequence value itself; it may be omitted (``None``) for
    terms past the first when the recursion is simulated generatively.
    """

    a: Optional[float] = None
    b: float = 0.0
    h: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        if self.a is not None and self.a < 0:
            raise UsageError(f"sequence value a={self.a} must be nonnegative")
        if not 0.0 <= self.b <= 1.0:
            raise UsageError(f"coefficient b={self.b} must lie in [0, 1]")
        if self.c < 0:
            raise UsageError(f"summable term c={self.c} must be nonnegative")


def lemma1_limit_check(terms: Iterable[RealSequenceTerm], horizon: int,
                       tol: float = 1e-3) -> str:
    """Consistency oracle for the recursion ``a_{n+1} <= (1-b_n)a_n + b_n h_n + c_n``.

    Two modes, selected by the supplied terms:

    * generative: only the first term carries ``a`` (the seed a_0); the
      recursion is simulated with equality, clipped at zero, and the verdict
      is ``"consistent"`` iff the value falls below ``tol`` by ``horizon``.
    * checking: every term carries its own ``a``; each step is checked
      against the recursion inequality termwise, and the final value must
      fall below ``tol``.

    This is a falsifier / consistency tool for test suites, never a
    convergence certificate.

    Returns
    -------
    str
        ``"consistent"`` or ``"violated"``.
    """
    if horizon < 0:
        raise UsageError("horizon must be nonnegative")
    it = iter(terms)
    try:
        first = next(it)
    except StopIteration:
        raise UsageError("empty term stream") from None
    if first.a is None:
        raise UsageError("first term must carry the seed value a_0")
    second = next(it, None)

    slack = 1e-12
    if second is not None and second.a is not None:
        # checking mode: terms carry an externally produced a_n sequence
        a_last = float(first.a)
        prev = first
        steps = 0
        for t in _chain_one(second, it):
            if steps >= horizon:
                break
            if t.a is None:
                raise UsageError("mixed stream: missing a_n in checking mode")
            bound = (1.0 - prev.b) * prev.a + prev.b * prev.h + prev.c
            if t.a > bound + slack:
                return "violated"
            a_last = float(t.a)
            prev = t
            steps += 1
        return "consistent" if a_last <= tol else "violated"

    # generative mode: simulate the recursion with equality, clipped at 0;
    # term n supplies the coefficients producing a_{n+1}
    tail = it if second is None else _chain_one(second, it)
    a = float(first.a)
    steps = 0
    coeffs = first
    while steps < horizon:
        a = max(0.0, (1.0 - coeffs.b) * a + coeffs.b * coeffs.h + coeffs.c)
        steps += 1
        if a <= tol:
            return "consistent"
        coeffs = next(tail, None)
        if coeffs is None:
            break
    return "consistent" if a <= tol else "violated"


def _chain_one(head, rest):
    yield head
    yield from rest
