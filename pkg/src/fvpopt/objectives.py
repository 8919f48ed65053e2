"""Strongly convex differentiable objectives with certified constants.

Constants (strong-convexity modulus ``rho``, gradient Lipschitz constant
``lipschitz_k``) are declared by construction; ``estimate_constants`` exists
only as an empirical cross-check, because the admissible gradient-step
interval depends on trustworthy constants.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import UsageError
from .space import as_vector

__all__ = [
    "ObjectiveSpec",
    "make_quadratic",
    "make_separable_sum",
    "check_gradient",
    "estimate_constants",
]


@dataclass(frozen=True)
class ObjectiveSpec:
    """A differentiable objective with strong-convexity / Lipschitz constants.

    ``minimizer`` is the unconstrained minimizer when it is known in closed
    form; problem oracles use it but nothing in the iteration requires it.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    rho: float
    lipschitz_k: float
    dim: int
    minimizer: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.rho <= 0 or self.lipschitz_k <= 0:
            raise UsageError("constants rho and lipschitz_k must be positive")
        if self.rho > self.lipschitz_k + 1e-12:
            raise UsageError(
                f"rho={self.rho} exceeds lipschitz_k={self.lipschitz_k}"
            )
        if self.dim < 1:
            raise UsageError("dimension must be positive")


def make_quadratic(Q, b, constant: float = 0.0) -> ObjectiveSpec:
    """Quadratic ``f(x) = 0.5 <x, Qx> - <b, x> + constant`` with exact
    constants.

    ``rho`` and ``lipschitz_k`` are the extreme eigenvalues of the symmetric
    positive-definite matrix ``Q``; the unconstrained minimizer solves
    ``Qx = b``. The additive constant lets shifted forms like
    ``0.5 * ||x - c||^2`` evaluate to zero at their target.
    """
    Q = np.asarray(Q, dtype=np.float64)
    b = as_vector(b)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise UsageError(f"Q must be square, got shape {Q.shape}")
    if Q.shape[0] != b.shape[0]:
        raise UsageError("Q and b dimensions disagree")
    if np.max(np.abs(Q - Q.T)) > 1e-10:
        raise UsageError("Q must be symmetric")
    eigs = np.linalg.eigvalsh(Q)
    if eigs[0] <= 0:
        raise UsageError(f"Q must be positive definite (lambda_min={eigs[0]})")
    minimizer = np.linalg.solve(Q, b)

    def value(x):
        return 0.5 * float(x @ Q @ x) - float(b @ x) + constant

    def gradient(x):
        return Q @ x - b

    return ObjectiveSpec(
        value=value,
        gradient=gradient,
        rho=float(eigs[0]),
        lipschitz_k=float(eigs[-1]),
        dim=b.shape[0],
        minimizer=minimizer,
    )


def make_separable_sum(locals_: Sequence[ObjectiveSpec]) -> ObjectiveSpec:
    """Sum of per-agent objectives acting blockwise on the stacked space."""
    locals_ = list(locals_)
    if not locals_:
        raise UsageError("need at least one local objective")
    d = locals_[0].dim
    if any(spec.dim != d for spec in locals_):
        raise UsageError("all local objectives must share the local dimension")
    m = len(locals_)

    def value(x):
        blocks = np.asarray(x, dtype=np.float64).reshape(m, d)
        return float(sum(spec.value(blocks[i]) for i, spec in enumerate(locals_)))

    def gradient(x):
        blocks = np.asarray(x, dtype=np.float64).reshape(m, d)
        out = np.empty_like(blocks)
        for i, spec in enumerate(locals_):
            out[i] = spec.gradient(blocks[i])
        return out.reshape(m * d)

    minimizer = None
    if all(spec.minimizer is not None for spec in locals_):
        minimizer = np.concatenate([spec.minimizer for spec in locals_])

    return ObjectiveSpec(
        value=value,
        gradient=gradient,
        rho=min(spec.rho for spec in locals_),
        lipschitz_k=max(spec.lipschitz_k for spec in locals_),
        dim=m * d,
        minimizer=minimizer,
    )


def check_gradient(spec: ObjectiveSpec, x, h: float = 1e-5) -> float:
    """Max relative error of the declared gradient vs central differences.

    The relative error denominator is ``max(1, |df/dx_i|)`` per coordinate.
    """
    if h <= 0:
        raise UsageError("finite-difference step must be positive")
    x = as_vector(x)
    g = as_vector(spec.gradient(x))
    worst = 0.0
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        fd = (spec.value(x + e) - spec.value(x - e)) / (2.0 * h)
        err = abs(fd - g[i]) / max(1.0, abs(g[i]))
        worst = max(worst, err)
    return worst


def estimate_constants(spec: ObjectiveSpec, samples: int,
                       rng: np.random.Generator,
                       scale: float = 1.0) -> tuple:
    """Empirical (rho_hat, k_hat) from sampled point pairs.

    rho_hat is the smallest monotonicity quotient and k_hat the largest
    Lipschitz quotient over the sampled pairs; they bracket the true
    constants from inside, so ``rho_hat >= rho`` and ``k_hat <= lipschitz_k``
    up to declaration error.
    """
    if samples < 2:
        raise UsageError("need at least two samples")
    rho_hat = np.inf
    k_hat = 0.0
    used = 0
    for _ in range(samples):
        x = rng.standard_normal(spec.dim) * scale
        y = rng.standard_normal(spec.dim) * scale
        diff = x - y
        sq = float(diff @ diff)
        if sq == 0.0:
            continue
        gdiff = spec.gradient(x) - spec.gradient(y)
        rho_hat = min(rho_hat, float(diff @ gdiff) / sq)
        k_hat = max(k_hat, float(np.linalg.norm(gdiff)) / np.sqrt(sq))
        used += 1
    if used == 0:
        raise UsageError("all sampled pairs were coincident")
    return float(rho_hat), float(k_hat)


def validate_constants(spec: ObjectiveSpec, samples: int,
                       rng: np.random.Generator, tol: float = 1e-8) -> None:
    """Fail if the empirical constants contradict the declared ones."""
    rho_hat, k_hat = estimate_constants(spec, samples, rng)
    if rho_hat < spec.rho - tol:
        raise UsageError(
            f"declared rho={spec.rho} too large: sampled quotient {rho_hat}"
        )
    if k_hat > spec.lipschitz_k + tol:
        raise UsageError(
            f"declared lipschitz_k={spec.lipschitz_k} too small: "
            f"sampled quotient {k_hat}"
        )
