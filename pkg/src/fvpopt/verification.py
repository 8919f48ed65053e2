"""Sampled property checkers for the operator identities.

Each checker draws (omega, x, witness) triples and reports the worst signed
violation of its inequality; a nonpositive worst violation (up to the check
tolerance) passes. Sampling replaces universal quantification, so these are
falsifiers, not certificates.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import UsageError
from .operators import AveragedOperator, RandomOperator
from .space import as_vector

__all__ = [
    "PropertyReport",
    "check_quasi_nonexpansive",
    "check_lemma3_i",
    "check_lemma3_ii",
    "check_lemma3_iii",
    "check_as_implies_ms",
    "SAMPLE_SCALES",
]

# sampled points are standard normal scaled by these factors, cycled
SAMPLE_SCALES = (0.1, 1.0, 10.0)

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class PropertyReport:
    property_name: str
    samples: int
    worst_violation: float  # max of (left - right) for "left <= right"
    tol: float = DEFAULT_TOL
    witness_input: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.worst_violation <= self.tol

    def as_dict(self) -> dict:
        return {
            "property": self.property_name,
            "samples": self.samples,
            "worst_violation": self.worst_violation,
            "tol": self.tol,
            "passed": self.passed,
            "witness_input": self.witness_input,
        }


def _dim_of(op: RandomOperator) -> int:
    if not op.fvp_witnesses:
        raise UsageError("operator declares no fixed-value-point witness")
    return as_vector(op.fvp_witnesses[0]).shape[0]


def _sample_point(rng, dim, i):
    return rng.standard_normal(dim) * SAMPLE_SCALES[i % len(SAMPLE_SCALES)]


def check_quasi_nonexpansive(op: RandomOperator, samples: int,
                             rng: np.random.Generator,
                             tol: float = DEFAULT_TOL) -> PropertyReport:
    """Distances to every declared witness never increase under any
    sampled realization."""
    dim = _dim_of(op)
    witnesses = [as_vector(w) for w in op.fvp_witnesses]
    idxs = op.space.sample_indices(rng, samples)
    worst = -np.inf
    worst_input = None
    for i in range(samples):
        x = _sample_point(rng, dim, i)
        tx = op.apply(int(idxs[i]), x)
        for w in witnesses:
            v = float(np.linalg.norm(tx - w) - np.linalg.norm(x - w))
            if v > worst:
                worst = v
                worst_input = f"omega={op.space.labels[int(idxs[i])]!r}, x={x.tolist()}"
    return PropertyReport("quasi_nonexpansive", samples, worst, tol, worst_input)


def check_lemma3_ii(op: RandomOperator, eta: float, samples: int,
                    rng: np.random.Generator,
                    tol: float = DEFAULT_TOL) -> PropertyReport:
    """<x - T_avg(omega, x), x - z> dominates (eta/2) ||x - T(omega, x)||^2
    for every witness z."""
    if not 0.0 < eta <= 1.0:
        raise UsageError(f"eta={eta} must lie in (0, 1]")
    dim = _dim_of(op)
    witnesses = [as_vector(w) for w in op.fvp_witnesses]
    idxs = op.space.sample_indices(rng, samples)
    worst = -np.inf
    worst_input = None
    for i in range(samples):
        x = _sample_point(rng, dim, i)
        tx = op.apply(int(idxs[i]), x)
        move = x - tx
        rhs_sq = 0.5 * eta * float(move @ move)
        # x - T_avg x = eta * (x - Tx)
        for w in witnesses:
            lhs = eta * float(move @ (x - w))
            v = rhs_sq - lhs
            if v > worst:
                worst = v
                worst_input = f"omega={op.space.labels[int(idxs[i])]!r}, x={x.tolist()}"
    return PropertyReport("lemma3_ii", samples, worst, tol, worst_input)


def check_lemma3_iii(op: RandomOperator, eta: float, samples: int,
                     rng: np.random.Generator,
                     tol: float = DEFAULT_TOL) -> PropertyReport:
    """The averaged operator is itself quasi-nonexpansive."""
    if not 0.0 < eta <= 1.0:
        raise UsageError(f"eta={eta} must lie in (0, 1]")
    avg = AveragedOperator(base=op, eta=eta)
    dim = _dim_of(op)
    witnesses = [as_vector(w) for w in op.fvp_witnesses]
    idxs = op.space.sample_indices(rng, samples)
    worst = -np.inf
    worst_input = None
    for i in range(samples):
        x = _sample_point(rng, dim, i)
        tx = avg.apply(int(idxs[i]), x)
        for w in witnesses:
            v = float(np.linalg.norm(tx - w) - np.linalg.norm(x - w))
            if v > worst:
                worst = v
                worst_input = f"omega={op.space.labels[int(idxs[i])]!r}, x={x.tolist()}"
    return PropertyReport("lemma3_iii", samples, worst, tol, worst_input)


def check_lemma3_i(op: RandomOperator, eta: float, candidates: Sequence,
                   rng: Optional[np.random.Generator] = None,
                   panel: int = 100,
                   tol: float = DEFAULT_TOL) -> PropertyReport:
    """Fixedness under T and under the averaged operator agree pointwise.

    Each candidate is applied under a sampled panel of realizations; it is
    fixed under T iff its worst displacement is below ``tol``, and under the
    averaged operator iff below ``eta * tol`` (displacements scale exactly
    by eta). Disagreement contributes the larger displacement as violation.
    """
    if not 0.0 < eta <= 1.0:
        raise UsageError(f"eta={eta} must lie in (0, 1]")
    candidates = [as_vector(c) for c in candidates]
    if not candidates:
        raise UsageError("need at least one candidate point")
    if rng is None:
        rng = np.random.default_rng(0)
    avg = AveragedOperator(base=op, eta=eta)
    idxs = op.space.sample_indices(rng, panel)
    worst = -np.inf
    worst_input = None
    for c in candidates:
        d_base = max(
            float(np.linalg.norm(op.apply(int(i), c) - c)) for i in idxs
        )
        d_avg = max(
            float(np.linalg.norm(avg.apply(int(i), c) - c)) for i in idxs
        )
        fixed_base = d_base <= tol
        fixed_avg = d_avg <= eta * tol
        v = 0.0 if fixed_base == fixed_avg else max(d_base, d_avg)
        if v > worst:
            worst = v
            worst_input = f"candidate={c.tolist()}"
    return PropertyReport("lemma3_i", len(candidates), worst, tol, worst_input)


def check_as_implies_ms(run_errors: Sequence[Sequence[float]],
                        bound: float) -> str:
    """Desk-scale consistency check that bounded a.s. convergence shows up
    as mean-square convergence in an ensemble.

    Returns ``"pass"``, ``"fail"`` or ``"rejected-input"`` (the boundedness
    premise does not hold for some realization).
    """
    seqs = [np.asarray(e, dtype=np.float64) for e in run_errors]
    if not seqs or any(s.size == 0 for s in seqs):
        raise UsageError("need at least one nonempty error sequence")
    if any(s.shape != seqs[0].shape for s in seqs):
        raise UsageError("error sequences must share the recording grid")
    for s in seqs:
        if not np.all(np.isfinite(s)) or float(np.max(s)) > bound:
            return "rejected-input"
    errs = np.stack(seqs)                      # (R, N)
    mse = np.mean(errs ** 2, axis=0)
    tail_sup_sq = np.mean(np.max(errs, axis=1) ** 2)
    if mse[-1] > tail_sup_sq + 1e-15:
        return "fail"
    if mse[-1] > mse[0] + 1e-15:
        return "fail"
    return "pass"
