import numpy as np
import pytest

from fvpopt.errors import ConfigError
from fvpopt.problems import (
    build_broken_fixture,
    build_consensus_problem,
    build_random_projection_qp,
    build_sublevel_problem,
    _project_polyhedron,
)
from fvpopt.verification import check_quasi_nonexpansive


class TestPolyhedronProjection:
    def test_single_halfspace_is_closed_form(self):
        # projecting (2, 0) onto {x1 <= 0} gives (0, 0)
        p = _project_polyhedron(np.array([2.0, 0.0]), [([1.0, 0.0], 0.0)])
        assert np.allclose(p, [0.0, 0.0], atol=1e-12)

    def test_interior_point_unmoved(self):
        x = np.array([-1.0, 3.0])
        p = _project_polyhedron(x, [([1.0, 0.0], 0.0)])
        assert np.array_equal(p, x)

    def test_quadrant_corner(self):
        # projecting (1, 1) onto {x1 <= 0, x2 <= 0} gives the origin
        hs = [([1.0, 0.0], 0.0), ([0.0, 1.0], 0.0)]
        p = _project_polyhedron(np.array([1.0, 1.0]), hs)
        assert np.allclose(p, [0.0, 0.0], atol=1e-10)

    def test_wedge_needs_true_metric_projection(self):
        # {x1 + x2 <= 0, x1 - x2 <= 0}: the metric projection of (1, 0)
        # is (0, 0), while one cyclic sweep of projections stops at a
        # merely feasible point; this pins the distinction
        hs = [([1.0, 1.0], 0.0), ([1.0, -1.0], 0.0)]
        p = _project_polyhedron(np.array([1.0, 0.0]), hs)
        assert np.allclose(p, [0.0, 0.0], atol=1e-8)

    def test_no_constraints_identity(self):
        x = np.array([3.0, -1.0])
        assert np.array_equal(_project_polyhedron(x, []), x)

    def test_projection_is_idempotent(self):
        rng = np.random.default_rng(0)
        hs = [([1.0, 2.0], 1.0), ([-1.0, 0.5], 0.3)]
        for _ in range(20):
            p = _project_polyhedron(rng.standard_normal(2) * 3, hs)
            q = _project_polyhedron(p, hs)
            assert np.allclose(p, q, atol=1e-8)


class TestRandomProjectionQp:
    def test_active_constraint_optimum(self):
        # minimize 0.5||x||^2 - <(2,2), x> over {x1 <= 0}: optimum (0, 2)
        prob = build_random_projection_qp(
            2, [([1.0, 0.0], 0.0)], np.eye(2), [2.0, 2.0]
        )
        assert np.allclose(prob.oracle_solution, [0.0, 2.0], atol=1e-8)

    def test_inactive_constraints_give_unconstrained_optimum(self):
        prob = build_random_projection_qp(
            2, [([1.0, 0.0], 10.0)], np.eye(2), [1.0, -1.0]
        )
        assert np.allclose(prob.oracle_solution, [1.0, -1.0], atol=1e-8)

    def test_unconstrained_closed_form(self):
        prob = build_random_projection_qp(2, [], np.diag([2.0, 4.0]),
                                          [2.0, 4.0])
        assert np.allclose(prob.oracle_solution, [1.0, 1.0], atol=1e-12)
        assert "closed form" in prob.oracle_method

    def test_oracle_is_feasible_fixed_point(self):
        rng = np.random.default_rng(7)
        a1, a2 = rng.standard_normal(3), rng.standard_normal(3)
        prob = build_random_projection_qp(
            3, [(a1, 0.5), (a2, -0.2)], np.eye(3), rng.standard_normal(3)
        )
        for i in range(prob.operator.space.size):
            moved = prob.operator.apply(i, prob.oracle_solution)
            assert np.allclose(moved, prob.oracle_solution, atol=1e-8)

    def test_operator_is_quasi_nonexpansive(self):
        prob = build_random_projection_qp(
            2, [([1.0, 0.0], 0.0), ([0.0, 1.0], 0.0)], np.eye(2), [1.0, 1.0]
        )
        rep = check_quasi_nonexpansive(prob.operator, 2000,
                                       np.random.default_rng(0))
        assert rep.passed

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            build_random_projection_qp(3, [], np.eye(2), [0.0, 0.0])


class TestConsensus:
    def test_oracle_is_tiled_mean(self):
        targets = [[0.0, 0.0], [3.0, 6.0], [3.0, 0.0]]
        prob = build_consensus_problem(3, 2, targets)
        assert np.allclose(prob.oracle_solution, np.tile([2.0, 2.0], 3))
        assert prob.objective.dim == 6

    def test_mean_is_stacked_objective_minimizer(self):
        targets = [[1.0], [2.0], [6.0]]
        prob = build_consensus_problem(3, 1, targets)
        g = prob.objective.gradient(prob.oracle_solution)
        # the consensus-subspace optimum is where the summed local
        # gradients vanish along the subspace
        stacked = g.reshape(3, 1)
        assert np.allclose(stacked.sum(axis=0), 0.0, atol=1e-12)

    def test_disconnected_topology_rejected(self):
        # two self-contained pairs, no bridge
        edge_sets = [((0, 1),), ((2, 3),)]
        with pytest.raises(ConfigError, match="disconnected"):
            build_consensus_problem(4, 1, [[0.0]] * 4, edge_sets=edge_sets)

    def test_target_count_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            build_consensus_problem(3, 1, [[0.0], [1.0]])

    def test_operator_fixes_consensus(self):
        prob = build_consensus_problem(4, 1, [[float(i)] for i in range(4)])
        z = np.full(4, 7.5)
        for i in range(prob.operator.space.size):
            assert np.allclose(prob.operator.apply(i, z), z)


class TestSublevel:
    @staticmethod
    def norm_g(x):
        return float(np.linalg.norm(x))

    @staticmethod
    def norm_subgrad(x):
        n = np.linalg.norm(x)
        return x / n if n > 0 else np.zeros_like(x)

    def test_unit_ball_active_optimum(self):
        # minimize 0.5||x||^2 - <(3,0), x> over the unit ball: optimum (1, 0)
        prob = build_sublevel_problem(
            self.norm_g, self.norm_subgrad, 1.0, np.eye(2), [3.0, 0.0]
        )
        assert np.allclose(prob.oracle_solution, [1.0, 0.0], atol=1e-6)

    def test_interior_optimum_unconstrained(self):
        prob = build_sublevel_problem(
            self.norm_g, self.norm_subgrad, 5.0, np.eye(2), [1.0, 0.0]
        )
        assert np.allclose(prob.oracle_solution, [1.0, 0.0], atol=1e-6)

    def test_oracle_feasible(self):
        prob = build_sublevel_problem(
            self.norm_g, self.norm_subgrad, 1.0, np.eye(2), [2.0, 2.0]
        )
        assert self.norm_g(prob.oracle_solution) <= 1.0 + 1e-8

    def test_high_dimension_rejected(self):
        with pytest.raises(ConfigError, match="dim"):
            build_sublevel_problem(
                self.norm_g, self.norm_subgrad, 1.0, np.eye(4), np.zeros(4)
            )

    def test_empty_sublevel_set_rejected(self):
        # g(x) = ||x|| + 10 never dips below level 1 on the grid
        with pytest.raises(ConfigError, match="feasible"):
            build_sublevel_problem(
                lambda x: float(np.linalg.norm(x)) + 10.0,
                self.norm_subgrad, 1.0, np.eye(2), [0.0, 0.0],
            )

    def test_operator_is_quasi_nonexpansive(self):
        prob = build_sublevel_problem(
            self.norm_g, self.norm_subgrad, 1.0, np.eye(2), [3.0, 0.0]
        )
        rep = check_quasi_nonexpansive(prob.operator, 2000,
                                       np.random.default_rng(1))
        assert rep.passed


class TestBrokenFixture:
    def test_fails_quasi_nonexpansive_check(self):
        prob = build_broken_fixture()
        rep = check_quasi_nonexpansive(prob.operator, 2000,
                                       np.random.default_rng(0))
        assert not rep.passed

    def test_origin_is_still_fixed(self):
        prob = build_broken_fixture(dim=3)
        z = np.zeros(3)
        assert np.array_equal(prob.operator.apply(0, z), z)

    def test_requires_genuine_expansion(self):
        with pytest.raises(Exception):
            build_broken_fixture(factor=1.0)
