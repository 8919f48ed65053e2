"""The stochastic hybrid iteration and its per-step diagnostics.

One step blends a gradient step on the objective with an averaged
fixed-point step of the random operator:

    x_{n+1} = alpha_n * (x_n - beta * grad_f(x_n))
              + (1 - alpha_n) * ((1 - eta) * x_n + eta * T(omega_n, x_n))

with a diminishing step schedule alpha_n in [0, 1], gradient step
beta in (0, 2 * rho / K^2) and averaging weight eta in (0, 1).
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import AdmissibilityError, ConfigError, DivergenceError, UsageError
from .objectives import ObjectiveSpec
from .operators import AveragedOperator, RandomOperator, average
from .space import as_vector

__all__ = [
    "StepSchedule",
    "AlgorithmConfig",
    "IterateState",
    "RunRecord",
    "beta_interval",
    "default_beta",
    "contraction_factor",
    "validate_beta",
    "step",
    "run",
    "vi_residual",
    "occurrence_report",
    "record_indices",
]

DIVERGENCE_GUARD = 1e12


@dataclass(frozen=True)
class StepSchedule:
    """Diminishing step schedule alpha_n.

    ``power`` schedules use alpha_n = 1 / (1 + n)^zeta with zeta in (0, 1],
    which satisfies alpha_n -> 0 and sum alpha_n = infinity by construction.
    Custom schedules must carry a caller attestation that those two
    conditions hold for the generating formula.
    """

    kind: str = "power"
    zeta: float = 1.0
    values: Optional[tuple] = None
    attested: bool = False

    def __post_init__(self):
        if self.kind == "power":
            if not 0.0 < self.zeta <= 1.0:
                raise AdmissibilityError(
                    f"zeta={self.zeta} must lie in (0, 1]"
                )
        elif self.kind == "custom":
            if not self.values:
                raise ConfigError("custom schedule needs values")
            if not self.attested:
                raise ConfigError(
                    "custom schedules must be attested to satisfy "
                    "alpha_n -> 0 and sum alpha_n = infinity"
                )
            if any(not 0.0 <= a <= 1.0 for a in self.values):
                raise ConfigError("custom alpha values must lie in [0, 1]")
        else:
            raise ConfigError(f"unknown schedule kind {self.kind!r}")

    def alpha(self, n: int) -> float:
        if self.kind == "power":
            return (1.0 + n) ** (-self.zeta)
        return self.values[min(n, len(self.values) - 1)]

    def alphas(self, n: int) -> np.ndarray:
        if self.kind == "power":
            return (1.0 + np.arange(n, dtype=np.float64)) ** (-self.zeta)
        vals = np.asarray(self.values, dtype=np.float64)
        if n <= vals.shape[0]:
            return vals[:n]
        pad = np.full(n - vals.shape[0], vals[-1])
        return np.concatenate([vals, pad])


@dataclass(frozen=True)
class AlgorithmConfig:
    beta: float
    eta: float = 0.5
    schedule: StepSchedule = StepSchedule()
    max_iters: int = 10_000
    seed: int = 0
    record_every: int = 0  # 0 selects the geometric recording grid

    def __post_init__(self):
        if self.beta <= 0:
            raise AdmissibilityError(f"beta={self.beta} must be positive")
        if not 0.0 < self.eta < 1.0:
            raise AdmissibilityError(
                f"eta={self.eta} must lie in the open interval (0, 1)"
            )
        if self.max_iters < 0:
            raise ConfigError("max_iters must be nonnegative")
        if self.record_every < 0:
            raise ConfigError("record_every must be nonnegative")


@dataclass(frozen=True)
class IterateState:
    """One iterate with its per-step diagnostics."""

    n: int
    x: np.ndarray
    residual: float = 0.0
    c_n: Optional[float] = None
    omega_index: Optional[int] = None


@dataclass
class RunRecord:
    """Per-realization trajectory diagnostics on the recording grid."""

    realization_id: int
    recorded_indices: list
    errors: list           # ||x_n - x*|| per recorded index; empty w/o oracle
    residuals: list        # ||x_n - T(omega_n, x_n)|| per recorded index
    c_values: list         # 0.5 * ||x_n - x*||^2; empty without oracle
    final_x: np.ndarray
    seed: int
    omega_log: list = field(default_factory=list)


def beta_interval(rho: float, k: float) -> tuple:
    """Open admissible interval (0, 2 * rho / k^2) for the gradient step."""
    if rho <= 0 or k <= 0:
        raise UsageError("rho and k must be positive")
    return (0.0, 2.0 * rho / (k * k))


def default_beta(rho: float, k: float) -> float:
    """Midpoint rho / k^2 of the admissible interval (maximizes gamma)."""
    return rho / (k * k)


def validate_beta(beta: float, rho: float, k: float) -> None:
    lo, hi = beta_interval(rho, k)
    if not lo < beta < hi:
        raise AdmissibilityError(
            f"beta={beta} outside the admissible open interval "
            f"({lo}, {hi}) = (0, 2*rho/K^2)"
        )


def contraction_factor(rho: float, k: float, beta: float) -> float:
    """gamma = 1 - sqrt(1 - beta * (2 * rho - beta * k^2)).

    The map x -> x - beta * grad_f(x) is (1 - gamma)-Lipschitz for any
    beta > 0; gamma lies in (0, 1] exactly when beta is inside the
    admissible interval (0, 2 * rho / k^2), which ``validate_beta`` enforces
    at the configuration boundary.
    """
    if not 0.0 < rho <= k:
        raise UsageError("need 0 < rho <= k")
    if beta <= 0.0:
        raise UsageError(f"beta={beta} must be positive")
    disc = 1.0 - beta * (2.0 * rho - beta * k * k)
    if disc < 0.0:
        # only roundoff can push the discriminant below zero for
        # beta near rho / k^2
        disc = 0.0
    return 1.0 - math.sqrt(disc)


def _advance(x: np.ndarray, obj: ObjectiveSpec, tavg: AveragedOperator,
             alpha: float, beta: float, omega_index: int) -> tuple:
    """One iteration: returns (x_next, residual against the base operator)."""
    tx = tavg.base.apply(omega_index, x)
    residual = float(np.linalg.norm(x - tx))
    that = (1.0 - tavg.eta) * x + tavg.eta * tx
    x_next = alpha * (x - beta * obj.gradient(x)) + (1.0 - alpha) * that
    return x_next, residual


def step(state: IterateState, obj: ObjectiveSpec, tavg: AveragedOperator,
         alpha: float, beta: float, rng: np.random.Generator,
         oracle: Optional[np.ndarray] = None) -> IterateState:
    """Advance one iteration, sampling omega from the operator's space."""
    if not 0.0 <= alpha <= 1.0:
        raise UsageError(f"alpha={alpha} must lie in [0, 1]")
    idx = tavg.space.sample_index(rng)
    x_next, residual = _advance(state.x, obj, tavg, alpha, beta, idx)
    if not np.all(np.isfinite(x_next)):
        raise DivergenceError(
            f"non-finite iterate at step {state.n}", n=state.n, x=x_next
        )
    c_n = None
    if oracle is not None:
        d = x_next - oracle
        c_n = 0.5 * float(d @ d)
    return IterateState(
        n=state.n + 1, x=x_next, residual=residual, c_n=c_n, omega_index=idx
    )


def record_indices(max_iters: int, record_every: int = 0) -> list:
    """Recording grid: every k-th index, or a geometric grid when k = 0.

    The geometric grid is {0..9, 10, 20, .., 90, 100, 200, ...} plus the
    final index, keeping records small over long runs.
    """
    if record_every > 0:
        idx = list(range(0, max_iters + 1, record_every))
        if idx[-1] != max_iters:
            idx.append(max_iters)
        return idx
    grid = set(range(0, min(10, max_iters + 1)))
    decade = 10
    while decade <= max_iters:
        grid.update(range(decade, min(10 * decade, max_iters + 1), decade))
        decade *= 10
    grid.add(max_iters)
    return sorted(grid)


def run(obj: ObjectiveSpec, operator: RandomOperator, config: AlgorithmConfig,
        oracle: Optional[np.ndarray] = None,
        x0: Optional[np.ndarray] = None,
        rng: Optional[np.random.Generator] = None,
        realization_id: int = 0,
        keep_omega_log: bool = False) -> RunRecord:
    """Run the iteration for ``config.max_iters`` steps.

    The initial point defaults to the zero vector (the theory guarantees
    global convergence from any start). The run is deterministic given the
    config seed, or the supplied RNG stream when one is passed explicitly.
    """
    validate_beta(config.beta, obj.rho, obj.lipschitz_k)
    if not operator.fvp_witnesses and operator.fvp_membership is None:
        raise ConfigError(
            "operator declares no fixed-value-point witnesses or membership "
            "predicate; feasibility cannot be asserted"
        )
    if rng is None:
        rng = np.random.default_rng(config.seed)
    x = np.zeros(obj.dim) if x0 is None else as_vector(x0).copy()
    if x.shape[0] != obj.dim:
        raise ConfigError(
            f"initial point dimension {x.shape[0]} != objective dim {obj.dim}"
        )
    if oracle is not None:
        oracle = as_vector(oracle)

    n_steps = config.max_iters
    tavg = average(operator, config.eta)
    eta = config.eta
    beta = config.beta
    alphas = config.schedule.alphas(n_steps)
    omega_indices = (operator.space.sample_indices(rng, n_steps)
                     if n_steps > 0 else np.empty(0, dtype=np.int64))
    grid = record_indices(n_steps, config.record_every)
    grid_set = set(grid)

    apply_op = operator.apply_by_index
    grad = obj.gradient
    recorded, errors, residuals, c_values = [], [], [], []
    last_residual = 0.0

    def record(n, x, residual):
        recorded.append(n)
        residuals.append(residual)
        if oracle is not None:
            d = x - oracle
            err = float(np.sqrt(d @ d))
            errors.append(err)
            c_values.append(0.5 * err * err)

    for n in range(n_steps):
        idx = int(omega_indices[n])
        tx = apply_op(idx, x)
        diff = x - tx
        residual = float(np.sqrt(diff @ diff))
        alpha = alphas[n]
        x_next = (alpha * (x - beta * grad(x))
                  + (1.0 - alpha) * (x - eta * diff))
        if n in grid_set:
            record(n, x, residual)
        sq = float(x_next @ x_next)
        if not np.isfinite(sq) or sq > DIVERGENCE_GUARD ** 2:
            raise DivergenceError(
                f"iterate norm exceeded {DIVERGENCE_GUARD:g} at step {n}; "
                "suspect misdeclared constants or a non-quasi-nonexpansive "
                "operator", n=n, x=x_next,
            )
        x = x_next
        last_residual = residual
    # final state reuses the last step's residual (0.0 for an empty run)
    record(n_steps, x, last_residual)

    return RunRecord(
        realization_id=realization_id,
        recorded_indices=recorded,
        errors=errors,
        residuals=residuals,
        c_values=c_values,
        final_x=x,
        seed=config.seed,
        omega_log=list(omega_indices) if keep_omega_log else [],
    )


def vi_residual(x_candidate, obj: ObjectiveSpec, probes: Sequence) -> float:
    """Variational-inequality optimality residual at a candidate point.

    Returns min over feasible probes p of <p - x, grad_f(x)>; at the
    constrained optimum this is nonnegative for probes in the feasible set.
    """
    probes = [as_vector(p) for p in probes]
    if not probes:
        raise UsageError("need at least one feasible probe")
    x = as_vector(x_candidate)
    g = as_vector(obj.gradient(x))
    return min(float((p - x) @ g) for p in probes)


def occurrence_report(omega_log: Sequence[int], k_tilde: Sequence[int],
                      space_size: Optional[int] = None) -> dict:
    """Count occurrences of the pinning labels over a logged horizon.

    A zero count flags a finite-run risk for the infinitely-often
    recurrence assumption; this is advisory, not a violation proof.
    """
    k_tilde = list(k_tilde)
    if space_size is not None:
        bad = [i for i in set(omega_log) | set(k_tilde)
               if not 0 <= i < space_size]
        if bad:
            raise UsageError(f"labels {bad} outside sample space")
    counts = {label: 0 for label in k_tilde}
    for i in omega_log:
        if i in counts:
            counts[i] += 1
    missing = sorted(label for label, c in counts.items() if c == 0)
    return {
        "counts": counts,
        "min_count": min(counts.values()) if counts else 0,
        "flagged": missing,
    }
