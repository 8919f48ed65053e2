"""Random operators with known fixed-value-point sets.

A random operator is a sampleable family ``{T(omega, .)}`` over a finite
sample space, together with declared fixed-value-point witnesses (points
fixed by every realization simultaneously) and an optional membership
predicate for the full fixed-value-point set.

The catalogue built here covers halfspace / ball projectors (nonexpansive),
a subgradient-level-set projector (quasi-nonexpansive but in general not
nonexpansive), random selection among pieces, and a gossip averaging
operator acting on stacked multi-agent states.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateOracleError, UsageError
from .space import as_vector

__all__ = [
    "SampleSpace",
    "RandomOperator",
    "AveragedOperator",
    "make_halfspace_projector",
    "make_ball_projector",
    "make_subgradient_projector",
    "make_random_selection",
    "make_gossip_operator",
    "ring_edge_sets",
    "edges_connect",
    "average",
]

FIXEDNESS_TOL = 1e-10


@dataclass(frozen=True)
class SampleSpace:
    """Finite label set with a categorical sampling distribution.

    Sampling is a pure function of the supplied RNG, so callers own
    reproducibility by owning the RNG stream.
    """

    labels: tuple
    weights: np.ndarray

    def __post_init__(self):
        if len(self.labels) < 1:
            raise UsageError("sample space needs at least one label")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (len(self.labels),):
            raise UsageError("weights must match labels one-to-one")
        if np.any(w < 0):
            raise UsageError("weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise UsageError(f"weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return len(self.labels)

    def sample_index(self, rng: np.random.Generator) -> int:
        return int(rng.choice(self.size, p=self.weights))

    def sample_indices(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(self.size, size=n, p=self.weights)


@dataclass(frozen=True)
class RandomOperator:
    """Family ``{T(omega, .)}`` indexed by a finite sample space.

    ``apply_by_index`` receives the *index* of a label in ``space.labels``
    and a point; witnesses are points fixed by every realization.
    """

    space: SampleSpace
    apply_by_index: Callable[[int, np.ndarray], np.ndarray]
    fvp_witnesses: tuple = ()
    fvp_membership: Optional[Callable[[np.ndarray], bool]] = None

    def apply(self, index: int, x: np.ndarray) -> np.ndarray:
        if not 0 <= index < self.space.size:
            raise UsageError(f"label index {index} outside sample space")
        return self.apply_by_index(index, x)

    def verify_witnesses(self, tol: float = FIXEDNESS_TOL) -> None:
        """Check every declared witness is fixed by every realization."""
        for w in self.fvp_witnesses:
            w = as_vector(w)
            for i in range(self.space.size):
                moved = float(np.linalg.norm(self.apply_by_index(i, w) - w))
                if moved > tol:
                    raise UsageError(
                        f"witness {w} moved by {moved:.3e} under label "
                        f"{self.space.labels[i]!r}"
                    )


@dataclass(frozen=True)
class AveragedOperator:
    """Convex combination ``(1 - eta) * x + eta * T(omega, x)``.

    Shares its fixed value points with the base operator. ``eta`` may be 1
    here (the combination degenerates to the base operator); the iteration
    engine restricts to the open interval separately.
    """

    base: RandomOperator
    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise UsageError(f"eta={self.eta} must lie in (0, 1]")

    @property
    def space(self) -> SampleSpace:
        return self.base.space

    @property
    def fvp_witnesses(self) -> tuple:
        return self.base.fvp_witnesses

    def apply(self, index: int, x: np.ndarray) -> np.ndarray:
        return (1.0 - self.eta) * x + self.eta * self.base.apply(index, x)


def average(base: RandomOperator, eta: float) -> AveragedOperator:
    """Averaged operator with ``eta`` in the open interval (0, 1).

    The closed endpoint eta = 1 is admissible for the averaged-operator
    identities but not for the iteration engine, so it is rejected here.
    """
    if not 0.0 < eta < 1.0:
        raise UsageError(f"eta={eta} must lie in the open interval (0, 1)")
    return AveragedOperator(base=base, eta=eta)


# --- deterministic operator pieces ---------------------------------------

def make_halfspace_projector(a, b: float) -> Callable[[np.ndarray], np.ndarray]:
    """Metric projection onto the halfspace ``{x : <a, x> <= b}``."""
    a = as_vector(a)
    sq = float(np.dot(a, a))
    if sq == 0.0:
        raise UsageError("halfspace normal must be nonzero")

    def project(x: np.ndarray) -> np.ndarray:
        viol = float(np.dot(a, x)) - b
        if viol <= 0.0:
            return np.array(x, dtype=np.float64, copy=True)
        return x - (viol / sq) * a

    return project


def make_ball_projector(center, r: float) -> Callable[[np.ndarray], np.ndarray]:
    """Metric projection onto the closed ball of radius ``r``."""
    center = as_vector(center)
    if r <= 0:
        raise UsageError(f"ball radius {r} must be positive")

    def project(x: np.ndarray) -> np.ndarray:
        d = x - center
        dist = float(np.linalg.norm(d))
        if dist <= r:
            return np.array(x, dtype=np.float64, copy=True)
        return center + (r / dist) * d

    return project


def make_subgradient_projector(g: Callable[[np.ndarray], float],
                               subgrad: Callable[[np.ndarray], np.ndarray],
                               level: float) -> Callable[[np.ndarray], np.ndarray]:
    """Subgradient projector onto the sublevel set ``{g <= level}``.

    Quasi-nonexpansive with fixed points exactly the sublevel set, but in
    general not nonexpansive, which is the whole point of carrying it in
    the catalogue.
    """

    def project(x: np.ndarray) -> np.ndarray:
        gx = float(g(x))
        if gx <= level:
            return np.array(x, dtype=np.float64, copy=True)
        u = as_vector(subgrad(x))
        sq = float(np.dot(u, u))
        if sq == 0.0:
            raise DegenerateOracleError(
                f"zero subgradient at infeasible point (g = {gx} > {level})"
            )
        return x - ((gx - level) / sq) * u

    return project


# --- random operator constructors -----------------------------------------

def make_random_selection(pieces: Sequence[Callable],
                          weights: Sequence[float],
                          witnesses: Sequence = (),
                          membership: Optional[Callable] = None,
                          labels: Optional[Sequence] = None) -> RandomOperator:
    """Random operator choosing one deterministic piece per step.

    The fixed-value-point set is the intersection of the pieces' fixed-point
    sets. Weights must be strictly positive so every label recurs infinitely
    often under i.i.d. sampling.
    """
    pieces = list(pieces)
    if not pieces:
        raise UsageError("need at least one operator piece")
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w <= 0):
        raise UsageError("selection weights must be strictly positive")
    if labels is None:
        labels = tuple(range(len(pieces)))
    space = SampleSpace(labels=tuple(labels), weights=w)
    if space.size != len(pieces):
        raise UsageError("labels must match pieces one-to-one")

    op = RandomOperator(
        space=space,
        apply_by_index=lambda i, x: pieces[i](x),
        fvp_witnesses=tuple(as_vector(v) for v in witnesses),
        fvp_membership=membership,
    )
    op.verify_witnesses()
    return op


def ring_edge_sets(m: int) -> list:
    """Single-edge activations over the ring graph on ``m`` nodes."""
    if m < 2:
        raise UsageError("ring needs at least two nodes")
    return [((i, (i + 1) % m),) for i in range(m)]


def make_gossip_operator(m: int, d: int,
                         edge_sets: Sequence[Sequence[tuple]],
                         mixing: float = 1.0,
                         weights: Optional[Sequence[float]] = None,
                         witnesses: Sequence = ()) -> RandomOperator:
    """Random pairwise-averaging operator on the stacked space R^(m*d).

    Each sampled realization is an undirected edge set; every activated
    pair (i, j) moves both agents toward their average with step
    ``mixing / 2``. The induced mixing matrix is symmetric and doubly
    stochastic, so consensus states are fixed by every realization.
    """
    if m < 2 or d < 1:
        raise UsageError("need m >= 2 agents and d >= 1 local dimensions")
    if not 0.0 < mixing <= 1.0:
        raise UsageError(f"mixing={mixing} must lie in (0, 1]")
    edge_sets = [tuple(tuple(sorted(e)) for e in es) for es in edge_sets]
    for es in edge_sets:
        for i, j in es:
            if not (0 <= i < m and 0 <= j < m) or i == j:
                raise UsageError(f"invalid edge ({i}, {j}) for {m} agents")
    if weights is None:
        weights = np.full(len(edge_sets), 1.0 / len(edge_sets))

    half = 0.5 * mixing

    def apply_edges(index: int, x: np.ndarray) -> np.ndarray:
        y = np.array(x, dtype=np.float64, copy=True).reshape(m, d)
        for i, j in edge_sets[index]:
            delta = half * (y[i] - y[j])
            y[i] = y[i] - delta
            y[j] = y[j] + delta
        return y.reshape(m * d)

    def consensus_membership(x: np.ndarray, tol: float = 1e-9) -> bool:
        blocks = np.asarray(x, dtype=np.float64).reshape(m, d)
        return bool(np.max(np.abs(blocks - blocks[0])) <= tol)

    witnesses = tuple(as_vector(v) for v in witnesses)
    if not witnesses:
        witnesses = (np.zeros(m * d),)

    op = RandomOperator(
        space=SampleSpace(labels=tuple(edge_sets), weights=np.asarray(weights)),
        apply_by_index=apply_edges,
        fvp_witnesses=witnesses,
        fvp_membership=consensus_membership,
    )
    op.verify_witnesses()
    return op


def edges_connect(m: int, edge_sets: Sequence[Sequence[tuple]]) -> bool:
    """True iff the union of all edges connects the m agents."""
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for es in edge_sets:
        for i, j in es:
            parent[find(i)] = find(j)
    return len({find(i) for i in range(m)}) == 1
