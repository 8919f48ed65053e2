"""Batch experiment front end.

Parses a TOML config with flat sections [problem], [algorithm], [ensemble],
[output], [checks], builds the problem, runs the declared property suites
first, then the Monte Carlo ensemble, and writes the CSV trajectories, the
JSON summary and the companion figures.

Exit codes: 0 success, 1 usage/config error, 2 property-check failure,
3 numerical divergence.
"""

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import engine, montecarlo, problems, report, verification
from .engine import AlgorithmConfig, StepSchedule
from .errors import ConfigError, DivergenceError, FvpoptError
from .problems import ProblemInstance

__all__ = ["ExperimentConfig", "parse_config", "main", "entry_point"]

_PROBLEM_KEYS = {
    "random_projection_qp": {"family", "dim", "q_diag", "q_dense", "c",
                             "halfspaces", "seed"},
    "consensus": {"family", "agents", "local_dim", "local_targets", "mixing",
                  "topology", "seed"},
    "sublevel_ball": {"family", "level", "q_diag", "q_dense", "c", "seed"},
    "broken_expansion": {"family", "dim", "factor"},
}
_ALGORITHM_KEYS = {"beta", "eta", "zeta", "max_iters", "seed", "record_every"}
_ENSEMBLE_KEYS = {"realizations", "tol"}
_OUTPUT_KEYS = {"csv_path", "summary_path", "figures"}
_CHECKS_KEYS = {"suites", "samples"}
_SECTIONS = {"problem", "algorithm", "ensemble", "output", "checks"}
_SUITES = ("quasi_nonexpansive", "lemma3_i", "lemma3_ii", "lemma3_iii")


@dataclass
class ExperimentConfig:
    problem: ProblemInstance
    family: str
    algorithm: AlgorithmConfig
    realizations: int
    tol: float
    csv_path: str
    summary_path: str
    figures: bool
    checks: list = field(default_factory=list)
    check_samples: int = 2000


def _require(section: dict, key: str, section_name: str):
    if key not in section:
        raise ConfigError(f"[{section_name}] is missing required key {key!r}")
    return section[key]


def _reject_unknown(section: dict, allowed: set, section_name: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{section_name}]")


def _build_matrix(sec: dict, dim: int):
    if "q_diag" in sec and "q_dense" in sec:
        raise ConfigError("[problem] give q_diag or q_dense, not both")
    if "q_diag" in sec:
        diag = np.asarray(sec["q_diag"], dtype=np.float64)
        if diag.shape != (dim,):
            raise ConfigError(f"q_diag must have {dim} entries")
        return np.diag(diag)
    if "q_dense" in sec:
        flat = np.asarray(sec["q_dense"], dtype=np.float64)
        if flat.shape != (dim * dim,):
            raise ConfigError(f"q_dense must have {dim * dim} row-major entries")
        return flat.reshape(dim, dim)
    return np.eye(dim)


def build_problem(sec: dict) -> tuple:
    """Build a ProblemInstance from the [problem] section."""
    family = _require(sec, "family", "problem")
    if family not in _PROBLEM_KEYS:
        raise ConfigError(
            f"unknown problem family {family!r}; expected one of "
            f"{sorted(_PROBLEM_KEYS)}"
        )
    _reject_unknown(sec, _PROBLEM_KEYS[family], "problem")
    seed = int(sec.get("seed", 0))

    if family == "random_projection_qp":
        dim = int(_require(sec, "dim", "problem"))
        c = np.asarray(_require(sec, "c", "problem"), dtype=np.float64)
        Q = _build_matrix(sec, dim)
        raw = sec.get("halfspaces", [])
        halfspaces = []
        for row in raw:
            row = list(map(float, row))
            if len(row) != dim + 1:
                raise ConfigError(
                    "each halfspace row must hold the normal followed by "
                    f"the offset ({dim + 1} numbers)"
                )
            halfspaces.append((row[:dim], row[dim]))
        problem = problems.build_random_projection_qp(
            dim, halfspaces, Q, c, seed=seed
        )
    elif family == "consensus":
        m = int(_require(sec, "agents", "problem"))
        d = int(_require(sec, "local_dim", "problem"))
        targets = _require(sec, "local_targets", "problem")
        topology = sec.get("topology", "ring")
        if topology != "ring":
            raise ConfigError(f"unknown topology {topology!r}; expected 'ring'")
        problem = problems.build_consensus_problem(
            m, d, targets, mixing=float(sec.get("mixing", 1.0)), seed=seed
        )
    elif family == "sublevel_ball":
        level = float(_require(sec, "level", "problem"))
        c = np.asarray(_require(sec, "c", "problem"), dtype=np.float64)
        dim = c.shape[0]
        Q = _build_matrix(sec, dim)
        problem = problems.build_sublevel_problem(
            g=lambda x: float(np.linalg.norm(x)),
            subgrad=lambda x: x / np.linalg.norm(x),
            level=level, Q=Q, c=c, seed=seed,
        )
    else:  # broken_expansion fixture
        problem = problems.build_broken_fixture(
            dim=int(sec.get("dim", 2)), factor=float(sec.get("factor", 2.0))
        )
    return problem, family


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate an experiment config document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config document: {exc}") from exc
    for name in doc:
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
    if "problem" not in doc:
        raise ConfigError("missing required section [problem]")

    problem, family = build_problem(doc["problem"])
    obj = problem.objective

    alg = dict(doc.get("algorithm", {}))
    _reject_unknown(alg, _ALGORITHM_KEYS, "algorithm")
    beta = float(alg.get("beta", engine.default_beta(obj.rho, obj.lipschitz_k)))
    engine.validate_beta(beta, obj.rho, obj.lipschitz_k)
    eta = float(alg.get("eta", 0.5))
    if not 0.0 < eta < 1.0:
        raise ConfigError(f"eta={eta} must lie in the open interval (0, 1)")
    zeta = float(alg.get("zeta", 1.0))
    if not 0.0 < zeta <= 1.0:
        raise ConfigError(f"zeta={zeta} must lie in (0, 1]")
    algorithm = AlgorithmConfig(
        beta=beta,
        eta=eta,
        schedule=StepSchedule(kind="power", zeta=zeta),
        max_iters=int(alg.get("max_iters", 10_000)),
        seed=int(alg.get("seed", 0)),
        record_every=int(alg.get("record_every", 0)),
    )

    ens = dict(doc.get("ensemble", {}))
    _reject_unknown(ens, _ENSEMBLE_KEYS, "ensemble")
    realizations = int(ens.get("realizations", 100))
    if realizations < 1:
        raise ConfigError("realizations must be positive")
    tol = float(ens.get("tol", 1e-2))
    if tol <= 0:
        raise ConfigError("ensemble tol must be positive")

    out = dict(doc.get("output", {}))
    _reject_unknown(out, _OUTPUT_KEYS, "output")

    checks = dict(doc.get("checks", {}))
    _reject_unknown(checks, _CHECKS_KEYS, "checks")
    suites = list(checks.get("suites", []))
    for s in suites:
        if s not in _SUITES:
            raise ConfigError(
                f"unknown check suite {s!r}; expected one of {list(_SUITES)}"
            )

    return ExperimentConfig(
        problem=problem,
        family=family,
        algorithm=algorithm,
        realizations=realizations,
        tol=tol,
        csv_path=str(out.get("csv_path", "runs.csv")),
        summary_path=str(out.get("summary_path", "summary.json")),
        figures=bool(out.get("figures", True)),
        checks=suites,
        check_samples=int(checks.get("samples", 2000)),
    )


def run_checks(cfg: ExperimentConfig) -> dict:
    """Run the declared property suites against the configured operator."""
    op = cfg.problem.operator
    eta = cfg.algorithm.eta
    n = cfg.check_samples
    reports = {}
    for name in cfg.checks:
        rng = np.random.default_rng(cfg.algorithm.seed)
        if name == "quasi_nonexpansive":
            rep = verification.check_quasi_nonexpansive(op, n, rng)
        elif name == "lemma3_ii":
            rep = verification.check_lemma3_ii(op, eta, n, rng)
        elif name == "lemma3_iii":
            rep = verification.check_lemma3_iii(op, eta, n, rng)
        else:
            candidates = list(op.fvp_witnesses)
            dim = cfg.problem.objective.dim
            candidates += [rng.standard_normal(dim) for _ in range(8)]
            rep = verification.check_lemma3_i(op, eta, candidates, rng)
        reports[name] = rep
    return reports


def _summary_dict(cfg: ExperimentConfig, reports: dict,
                  summary=None, failures=()) -> dict:
    obj = cfg.problem.objective
    doc = {
        "family": cfg.family,
        "beta": cfg.algorithm.beta,
        "eta": cfg.algorithm.eta,
        "beta_interval": list(engine.beta_interval(obj.rho, obj.lipschitz_k)),
        "gamma": engine.contraction_factor(obj.rho, obj.lipschitz_k,
                                           cfg.algorithm.beta),
        "oracle_method": cfg.problem.oracle_method,
        "checks": {name: rep.as_dict() for name, rep in reports.items()},
        "realizations": cfg.realizations,
        "tol": cfg.tol,
        "ensemble_complete": None,
        "final_mse": None,
        "as_proxy_final": None,
        "failures": [list(f) for f in failures],
    }
    if summary is not None:
        doc["ensemble_complete"] = summary.complete
        doc["final_mse"] = summary.mse_curve[-1][1]
        doc["as_proxy_final"] = summary.as_proxy_curve[-1][1]
        doc["mse_curve"] = [[n, v] for n, v in summary.mse_curve]
        doc["as_proxy_curve"] = [[n, v] for n, v in summary.as_proxy_curve]
    return doc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fvpopt",
        description="Run a convergence experiment for the stochastic "
                    "fixed-value-point iteration.",
        add_help=True,
    )
    parser.add_argument("--config", type=str, default=None,
                        help="path to the TOML experiment config (required)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the base seed")
    parser.add_argument("--realizations", type=int, default=None,
                        help="override the ensemble size")
    parser.add_argument("--iters", type=int, default=None,
                        help="override the iteration budget")
    parser.add_argument("--out", type=str, default=None,
                        help="directory overriding all output paths")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    if args.config is None:
        parser.print_usage(sys.stderr)
        print("fvpopt: error: --config is required", file=sys.stderr)
        return 1

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"fvpopt: cannot read config: {exc}", file=sys.stderr)
        return 1

    try:
        cfg = parse_config(text)
        if args.seed is not None or args.iters is not None:
            alg = cfg.algorithm
            cfg.algorithm = AlgorithmConfig(
                beta=alg.beta, eta=alg.eta, schedule=alg.schedule,
                max_iters=args.iters if args.iters is not None else alg.max_iters,
                seed=args.seed if args.seed is not None else alg.seed,
                record_every=alg.record_every,
            )
        if args.realizations is not None:
            if args.realizations < 1:
                raise ConfigError("realizations must be positive")
            cfg.realizations = args.realizations
    except FvpoptError as exc:
        print(f"fvpopt: config error: {exc}", file=sys.stderr)
        return 1

    outdir = Path(args.out) if args.out else Path(".")
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / Path(cfg.csv_path).name if args.out else Path(cfg.csv_path)
    summary_path = (outdir / Path(cfg.summary_path).name if args.out
                    else Path(cfg.summary_path))

    reports = run_checks(cfg)
    failed = [name for name, rep in reports.items() if not rep.passed]
    if failed:
        report.write_summary(summary_path, _summary_dict(cfg, reports))
        print(f"fvpopt: property checks failed: {', '.join(failed)}",
              file=sys.stderr)
        return 2

    try:
        result = montecarlo.run_ensemble(
            cfg.problem, cfg.algorithm, cfg.realizations, cfg.algorithm.seed
        )
        if not result.records:
            raise DivergenceError(
                "every realization failed: " + "; ".join(
                    msg for _, msg in result.failures
                )
            )
        summary = montecarlo.summarize(result.records, cfg.tol,
                                       complete=result.complete)
    except DivergenceError as exc:
        print(f"fvpopt: numerical divergence: {exc}", file=sys.stderr)
        return 3

    report.write_csv(csv_path, result.records)
    report.write_summary(
        summary_path, _summary_dict(cfg, reports, summary, result.failures)
    )
    if cfg.figures:
        report.render_figures(csv_path.parent, summary, result.records)

    if result.failures:
        print(
            f"fvpopt: {len(result.failures)} realization(s) diverged; "
            "ensemble marked incomplete", file=sys.stderr,
        )
        return 3
    return 0


def entry_point():
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
