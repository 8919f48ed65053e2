import numpy as np
import pytest

from fvpopt.engine import AlgorithmConfig, RunRecord, StepSchedule
from fvpopt.errors import UsageError
from fvpopt.montecarlo import derived_rng, run_ensemble, summarize
from fvpopt.problems import build_broken_fixture, build_random_projection_qp


def small_problem():
    # minimize 0.5||x||^2 - <(2,2), x> over {x1 <= 0}; optimum (0, 2)
    return build_random_projection_qp(
        dim=2,
        halfspaces=[([1.0, 0.0], 0.0)],
        Q=np.eye(2),
        c=[2.0, 2.0],
    )


def small_config(max_iters=500, seed=0):
    return AlgorithmConfig(
        beta=1.0, eta=0.5,
        schedule=StepSchedule(kind="power", zeta=1.0),
        max_iters=max_iters, seed=seed,
    )


class TestDerivedRng:
    def test_reproducible(self):
        a = derived_rng(42, 3).standard_normal(4)
        b = derived_rng(42, 3).standard_normal(4)
        assert np.array_equal(a, b)

    def test_streams_differ_across_realizations(self):
        a = derived_rng(42, 0).standard_normal(4)
        b = derived_rng(42, 1).standard_normal(4)
        assert not np.array_equal(a, b)

    def test_streams_differ_across_base_seeds(self):
        a = derived_rng(0, 5).standard_normal(4)
        b = derived_rng(1, 5).standard_normal(4)
        assert not np.array_equal(a, b)


class TestRunEnsemble:
    def test_basic_shape_and_completeness(self):
        res = run_ensemble(small_problem(), small_config(), realizations=5,
                           base_seed=42)
        assert res.complete
        assert len(res.records) == 5
        assert [r.realization_id for r in res.records] == list(range(5))
        grid = res.records[0].recorded_indices
        assert all(r.recorded_indices == grid for r in res.records)

    def test_order_independent_of_count(self):
        # realization r's trajectory must not depend on how many siblings ran
        prob, cfg = small_problem(), small_config()
        few = run_ensemble(prob, cfg, realizations=2, base_seed=7)
        many = run_ensemble(prob, cfg, realizations=4, base_seed=7)
        assert np.array_equal(few.records[1].final_x, many.records[1].final_x)
        assert few.records[1].errors == many.records[1].errors

    def test_zero_realizations_rejected(self):
        with pytest.raises(UsageError):
            run_ensemble(small_problem(), small_config(), realizations=0,
                         base_seed=0)

    def test_divergence_collected_not_raised(self):
        prob = build_broken_fixture(dim=2, factor=2.0)
        # beta = 0.5 so the opening full gradient step does not zero the
        # iterate before the expansion can blow it up
        cfg = AlgorithmConfig(
            beta=0.5, eta=0.5,
            schedule=StepSchedule(kind="power", zeta=1.0),
            max_iters=200, seed=0,
        )
        res = run_ensemble(prob, cfg, realizations=3, base_seed=0,
                           x0=np.ones(2))
        assert not res.complete
        assert len(res.failures) == 3
        for rid, msg in res.failures:
            assert "DivergenceError" in msg

    def test_errors_measured_against_oracle(self):
        prob = small_problem()
        res = run_ensemble(prob, small_config(max_iters=2000),
                           realizations=3, base_seed=1)
        for rec in res.records:
            assert rec.errors[-1] <= 1e-2
            final_err = float(
                np.linalg.norm(rec.final_x - prob.oracle_solution)
            )
            assert rec.errors[-1] == pytest.approx(final_err, abs=1e-12)


class TestSummarize:
    def make_record(self, rid, grid, errors):
        return RunRecord(
            realization_id=rid,
            recorded_indices=list(grid),
            errors=list(errors),
            residuals=[0.0] * len(grid),
            c_values=[0.0] * len(grid),
            final_x=np.zeros(1),
            seed=0,
        )

    def test_hand_computed_curves(self):
        grid = [0, 1, 2]
        recs = [
            self.make_record(0, grid, [2.0, 1.0, 0.0]),
            self.make_record(1, grid, [4.0, 1.0, 2.0]),
        ]
        s = summarize(recs, tol=1.5)
        # MSE: ((4+16)/2, (1+1)/2, (0+4)/2)
        assert [v for _, v in s.mse_curve] == [10.0, 1.0, 2.0]
        # tail sup within 1.5: realization 0 from n=1 on; realization 1 never
        assert [v for _, v in s.as_proxy_curve] == [0.0, 0.5, 0.5]
        assert s.realizations == 2 and s.tol == 1.5 and s.complete

    def test_as_proxy_curve_is_nondecreasing(self):
        rng = np.random.default_rng(0)
        grid = list(range(20))
        recs = [
            self.make_record(i, grid, np.abs(rng.standard_normal(20))
                             / (1.0 + np.arange(20)))
            for i in range(10)
        ]
        s = summarize(recs, tol=0.1)
        vals = [v for _, v in s.as_proxy_curve]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_mismatched_grid_rejected(self):
        recs = [
            self.make_record(0, [0, 1], [1.0, 0.5]),
            self.make_record(1, [0, 2], [1.0, 0.5]),
        ]
        with pytest.raises(UsageError):
            summarize(recs, tol=1.0)

    def test_empty_rejected(self):
        with pytest.raises(UsageError):
            summarize([], tol=1.0)

    def test_incomplete_flag_propagates(self):
        recs = [self.make_record(0, [0], [0.0])]
        s = summarize(recs, tol=1.0, complete=False)
        assert not s.complete


class TestEnsembleDynamics:
    def test_mse_decays_on_projection_qp(self):
        prob = small_problem()
        cfg = small_config(max_iters=1000)
        res = run_ensemble(prob, cfg, realizations=20, base_seed=42)
        s = summarize(res.records, tol=1e-2, complete=res.complete)
        mse = dict(s.mse_curve)
        assert mse[1000] < 1e-3 * mse[10]
        assert s.as_proxy_curve[-1][1] == 1.0
