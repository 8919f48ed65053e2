"""Convex minimization over fixed-value-point sets of quasi-nonexpansive
random operators on R^d.

The iteration blends a diminishing-weight gradient step on a strongly
convex objective with an averaged step of a random operator whose common
fixed points encode the constraint set. Submodules:

- ``space``: inner-product primitives and the recursive-sequence oracle
- ``operators``: random operator catalogue with declared fixed value points
- ``objectives``: strongly convex objectives with certified constants
- ``engine``: the iteration, admissibility checks, diagnostics
- ``verification``: sampled property checkers for the operator identities
- ``montecarlo``: seeded ensembles, MSE and almost-sure proxy curves
- ``problems``: problem families with independent solution oracles
- ``cli`` / ``report``: batch front end, CSV/JSON/figure outputs
"""

from .engine import (
    AlgorithmConfig,
    RunRecord,
    StepSchedule,
    beta_interval,
    contraction_factor,
    run,
    vi_residual,
)
from .errors import (
    AdmissibilityError,
    ConfigError,
    DegenerateOracleError,
    DimensionMismatchError,
    DivergenceError,
    FvpoptError,
    UsageError,
)
from .montecarlo import EnsembleSummary, run_ensemble, summarize
from .objectives import ObjectiveSpec, make_quadratic, make_separable_sum
from .operators import (
    AveragedOperator,
    RandomOperator,
    SampleSpace,
    average,
    make_ball_projector,
    make_gossip_operator,
    make_halfspace_projector,
    make_random_selection,
    make_subgradient_projector,
)
from .problems import (
    ProblemInstance,
    build_consensus_problem,
    build_random_projection_qp,
    build_sublevel_problem,
)

__version__ = "0.1.0"
