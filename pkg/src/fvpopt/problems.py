"""End-to-end problem families with independent solution oracles.

Each builder pairs an objective and a random operator with an oracle for
the constrained optimum computed by a method independent of the stochastic
iteration (projected gradient, analytic mean, or grid search plus local
refinement), so convergence acceptance is never circular.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .engine import vi_residual
from .errors import ConfigError, UsageError
from .objectives import ObjectiveSpec, make_quadratic, make_separable_sum
from .operators import (
    RandomOperator,
    SampleSpace,
    edges_connect,
    make_gossip_operator,
    make_halfspace_projector,
    make_random_selection,
    make_subgradient_projector,
    ring_edge_sets,
)
from .space import as_vector

__all__ = [
    "ProblemInstance",
    "build_random_projection_qp",
    "build_consensus_problem",
    "build_sublevel_problem",
    "build_broken_fixture",
]


@dataclass(frozen=True)
class ProblemInstance:
    objective: ObjectiveSpec
    operator: RandomOperator
    oracle_solution: Optional[np.ndarray]
    oracle_method: str


# --- oracle machinery ------------------------------------------------------

def _project_polyhedron(x0: np.ndarray, halfspaces, tol: float = 1e-13,
                        max_sweeps: int = 10_000) -> np.ndarray:
    """Dykstra's algorithm for the metric projection onto an intersection
    of halfspaces. Exact for a single halfspace; converges for any finite
    intersection."""
    if not halfspaces:
        return np.array(x0, copy=True)
    normals = [as_vector(a) for a, _ in halfspaces]
    offsets = [float(b) for _, b in halfspaces]
    sqs = [float(a @ a) for a in normals]
    x = np.array(x0, dtype=np.float64, copy=True)
    corrections = [np.zeros_like(x) for _ in halfspaces]
    for _ in range(max_sweeps):
        x_prev = x
        for i, (a, b, sq) in enumerate(zip(normals, offsets, sqs)):
            y = x + corrections[i]
            viol = float(a @ y) - b
            if viol > 0.0:
                x_new = y - (viol / sq) * a
            else:
                x_new = y
            corrections[i] = y - x_new
            x = x_new
        sweep_change = float(np.linalg.norm(x - x_prev))
        worst = max(float(a @ x) - b for a, b in zip(normals, offsets))
        # feasibility alone is not convergence; require the sweep to settle
        if worst <= tol and sweep_change <= tol:
            return x
    return x


def _projected_gradient(obj: ObjectiveSpec, project, x0,
                        step_tol: float = 1e-12,
                        max_iters: int = 500_000) -> np.ndarray:
    """Plain projected gradient with step 1/K, run to a tight fixed point."""
    step = 1.0 / obj.lipschitz_k
    x = as_vector(x0).copy()
    for _ in range(max_iters):
        x_next = project(x - step * obj.gradient(x))
        if float(np.linalg.norm(x_next - x)) <= step_tol:
            return x_next
        x = x_next
    return x


def _validate_oracle(objective, operator, oracle, fixed_tol=1e-8,
                     vi_tol=1e-8, probe_count=32, rng=None):
    """Light construction-time validation of an oracle solution."""
    oracle = as_vector(oracle)
    for i in range(operator.space.size):
        moved = float(np.linalg.norm(operator.apply(i, oracle) - oracle))
        if moved > fixed_tol:
            raise ConfigError(
                f"oracle moved by {moved:.3e} under label "
                f"{operator.space.labels[i]!r}; not a fixed value point"
            )
    probes = list(operator.fvp_witnesses)
    if rng is not None and operator.fvp_membership is not None:
        for _ in range(probe_count):
            cand = oracle + rng.standard_normal(oracle.shape[0])
            if operator.fvp_membership(cand):
                probes.append(cand)
    if probes:
        r = vi_residual(oracle, objective, probes)
        if r < -vi_tol:
            raise ConfigError(
                f"oracle fails the optimality residual: {r:.3e} < -{vi_tol}"
            )


# --- problem families -------------------------------------------------------

def build_random_projection_qp(dim: int, halfspaces: Sequence,
                               Q, c, seed: int = 0) -> ProblemInstance:
    """Quadratic program whose constraint set is an intersection of
    halfspaces, reached through randomly selected projections.

    ``halfspaces`` is a sequence of (a, b) pairs for constraints
    ``<a, x> <= b``. The oracle is an independent projected-gradient solve
    on the full deterministic constraint set.
    """
    objective = make_quadratic(Q, c)
    if objective.dim != dim:
        raise ConfigError(f"Q/c dimension {objective.dim} != declared {dim}")
    halfspaces = [(as_vector(a), float(b)) for a, b in halfspaces]

    oracle = _projected_gradient(
        objective,
        lambda x: _project_polyhedron(x, halfspaces),
        np.zeros(dim),
    )
    worst = max(
        (float(a @ oracle) - b for a, b in halfspaces), default=0.0
    )
    if worst > 1e-8:
        raise ConfigError(
            f"halfspace intersection appears infeasible (violation {worst:.3e})"
        )

    if halfspaces:
        pieces = [make_halfspace_projector(a, b) for a, b in halfspaces]
        weights = np.full(len(pieces), 1.0 / len(pieces))

        def membership(x, tol=1e-9):
            return all(float(a @ x) - b <= tol for a, b in halfspaces)

        operator = make_random_selection(
            pieces, weights, witnesses=(oracle,), membership=membership
        )
        method = "projected gradient with Dykstra polyhedron projection"
    else:
        operator = make_random_selection(
            [lambda x: np.array(x, copy=True)], [1.0],
            witnesses=(oracle,), membership=lambda x: True,
        )
        oracle = objective.minimizer
        method = "unconstrained closed form (solve Qx = c)"

    rng = np.random.default_rng(seed)
    _validate_oracle(objective, operator, oracle, rng=rng)
    return ProblemInstance(objective, operator, as_vector(oracle), method)


def build_consensus_problem(m: int, d: int, local_targets: Sequence,
                            edge_sets: Optional[Sequence] = None,
                            mixing: float = 1.0,
                            seed: int = 0) -> ProblemInstance:
    """Distributed least-squares consensus over a randomly activated network.

    Each agent carries the local cost ``0.5 * ||x_i - c_i||^2``; the gossip
    operator's fixed value points are the consensus subspace, so the optimum
    puts every agent at the mean target.
    """
    targets = [as_vector(t) for t in local_targets]
    if len(targets) != m or any(t.shape[0] != d for t in targets):
        raise ConfigError(f"need {m} targets of local dimension {d}")
    if edge_sets is None:
        edge_sets = ring_edge_sets(m)
    if not edges_connect(m, edge_sets):
        groups = _components(m, edge_sets)
        raise ConfigError(
            f"supported edges leave the network disconnected: {groups}"
        )

    # local cost 0.5 * ||x_i - c_i||^2, zero at the agent's own target
    locals_ = [make_quadratic(np.eye(d), t, constant=0.5 * float(t @ t))
               for t in targets]
    objective = make_separable_sum(locals_)
    mean = np.mean(np.stack(targets), axis=0)
    oracle = np.tile(mean, m)
    operator = make_gossip_operator(
        m, d, edge_sets, mixing=mixing, witnesses=(oracle,)
    )
    rng = np.random.default_rng(seed)
    _validate_oracle(objective, operator, oracle, rng=rng)
    return ProblemInstance(
        objective, operator, oracle, "analytic mean of local targets"
    )


def _components(m, edge_sets):
    comp = list(range(m))
    changed = True
    while changed:
        changed = False
        for es in edge_sets:
            for i, j in es:
                lo = min(comp[i], comp[j])
                if comp[i] != lo or comp[j] != lo:
                    comp[i] = comp[j] = lo
                    changed = True
    groups = {}
    for i, c in enumerate(comp):
        groups.setdefault(c, []).append(i)
    return sorted(groups.values())


def build_sublevel_problem(g: Callable, subgrad: Callable, level: float,
                           Q, c, seed: int = 0,
                           grid_halfwidth: float = 4.0,
                           grid_points: int = 41) -> ProblemInstance:
    """Quadratic minimization over a convex sublevel set ``{g <= level}``.

    The operator randomly alternates the subgradient projector of ``g`` with
    the identity, keeping the fixed-value-point set equal to the sublevel
    set while making the sampling genuinely random. The operator is
    quasi-nonexpansive but in general not nonexpansive.

    The oracle is a dense grid search around the unconstrained minimizer
    refined by projected gradient with feasibility restoration through
    repeated subgradient projections; supported for dim <= 3.
    """
    objective = make_quadratic(Q, c)
    dim = objective.dim
    if dim > 3:
        raise ConfigError("sublevel oracle supports dim <= 3 only")

    sub_proj = make_subgradient_projector(g, subgrad, level)

    def restore(x, tol=1e-12, max_iters=10_000):
        y = np.array(x, copy=True)
        for _ in range(max_iters):
            if float(g(y)) <= level + tol:
                return y
            y = sub_proj(y)
        return y

    # dense grid search for the best feasible point
    center = objective.minimizer
    axes = [np.linspace(v - grid_halfwidth, v + grid_halfwidth, grid_points)
            for v in center]
    best, best_val = None, np.inf
    for point in np.stack(np.meshgrid(*axes), axis=-1).reshape(-1, dim):
        if float(g(point)) <= level:
            val = objective.value(point)
            if val < best_val:
                best, best_val = point, val
    if best is None:
        raise ConfigError(
            f"sublevel set {{g <= {level}}} has no feasible grid point"
        )

    oracle = _projected_gradient(objective, restore, best)

    pieces = [sub_proj, lambda x: np.array(x, copy=True)]
    operator = make_random_selection(
        pieces, [0.5, 0.5],
        witnesses=(oracle,),
        membership=lambda x, tol=1e-9: float(g(x)) <= level + tol,
    )
    rng = np.random.default_rng(seed)
    _validate_oracle(objective, operator, oracle, rng=rng)
    return ProblemInstance(
        objective, operator, oracle,
        "grid search refined by projected gradient with subgradient "
        "feasibility restoration",
    )


def build_broken_fixture(dim: int = 2, factor: float = 2.0) -> ProblemInstance:
    """Deliberately non-quasi-nonexpansive operator (pure test fixture).

    Scales every point by ``factor`` while claiming the origin as witness;
    the property checkers must fail on it.
    """
    if factor <= 1.0:
        raise UsageError("a broken fixture needs an expansion factor > 1")
    # the linear term kicks the iterate off the (fixed) origin so the
    # expansion actually manifests when starting from zeros
    objective = make_quadratic(np.eye(dim), np.ones(dim))
    operator = RandomOperator(
        space=SampleSpace(labels=(0,), weights=np.array([1.0])),
        apply_by_index=lambda i, x: factor * x,
        fvp_witnesses=(np.zeros(dim),),
        fvp_membership=lambda x: bool(np.all(x == 0.0)),
    )
    return ProblemInstance(
        objective, operator, np.zeros(dim), "origin (fixture)"
    )
