"""Multi-realization experiments estimating the stochastic convergence modes.

Each realization runs the iteration on its own RNG stream derived from
``numpy.random.SeedSequence((base_seed, realization_id))``, so results are
independent of execution order and any parallel scheduling.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import AlgorithmConfig, run
from .errors import FvpoptError, UsageError
from .problems import ProblemInstance

__all__ = ["EnsembleResult", "EnsembleSummary", "run_ensemble", "summarize",
           "derived_rng"]


def derived_rng(base_seed: int, realization_id: int) -> np.random.Generator:
    """The documented seed-splitting rule for realization streams."""
    return np.random.default_rng(
        np.random.SeedSequence((base_seed, realization_id))
    )


@dataclass
class EnsembleResult:
    records: list                 # successful RunRecords
    failures: list                # (realization_id, error message) pairs

    @property
    def complete(self) -> bool:
        return not self.failures


@dataclass
class EnsembleSummary:
    """Mean-square curve and almost-sure proxy curve over an ensemble.

    The almost-sure proxy at index n is the fraction of realizations whose
    recorded errors from n onward all stay within ``tol`` — a finite-run
    estimator for almost-sure convergence, which is not finitely observable.
    """

    mse_curve: list               # (n, mean squared error) pairs
    as_proxy_curve: list          # (n, fraction with tail within tol) pairs
    realizations: int
    tol: float
    complete: bool = True


def run_ensemble(problem: ProblemInstance, config: AlgorithmConfig,
                 realizations: int, base_seed: int,
                 x0: Optional[np.ndarray] = None) -> EnsembleResult:
    """Run independent realizations of the iteration.

    One failing realization does not abort its siblings; failures are
    collected so the summary can mark the ensemble incomplete.
    """
    if realizations < 1:
        raise UsageError("need at least one realization")
    records, failures = [], []
    for r in range(realizations):
        rng = derived_rng(base_seed, r)
        try:
            rec = run(
                problem.objective, problem.operator, config,
                oracle=problem.oracle_solution, x0=x0, rng=rng,
                realization_id=r,
            )
        except FvpoptError as exc:
            failures.append((r, f"{type(exc).__name__}: {exc}"))
            continue
        records.append(rec)
    return EnsembleResult(records=records, failures=failures)


def summarize(records, tol: float, complete: bool = True) -> EnsembleSummary:
    """Aggregate per-realization errors into MSE and almost-sure proxy curves."""
    records = list(records)
    if not records:
        raise UsageError("need at least one run record")
    grid = records[0].recorded_indices
    for rec in records:
        if rec.recorded_indices != grid:
            raise UsageError(
                f"realization {rec.realization_id} has a mismatched "
                "recording grid"
            )
        if len(rec.errors) != len(grid):
            raise UsageError(
                f"realization {rec.realization_id} lacks oracle errors"
            )
    errs = np.array([rec.errors for rec in records])       # (R, N)
    mse = np.mean(errs ** 2, axis=0)
    # suffix maxima: tail supremum over recorded indices >= n
    tail_max = np.maximum.accumulate(errs[:, ::-1], axis=1)[:, ::-1]
    as_proxy = np.mean(tail_max <= tol, axis=0)
    return EnsembleSummary(
        mse_curve=[(int(n), float(v)) for n, v in zip(grid, mse)],
        as_proxy_curve=[(int(n), float(v)) for n, v in zip(grid, as_proxy)],
        realizations=len(records),
        tol=tol,
        complete=complete,
    )
