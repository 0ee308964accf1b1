import numpy as np
import pytest

from paretomm import (
    InfeasibleError,
    InvalidArgumentError,
    PngConfig,
    SizeLimitError,
    build_impossibility_instance,
    is_pareto_generic,
    is_preference_generic,
    pareto_stationarity_gap,
    png_descent,
    png_vector,
    sample_preference_generic,
)
from paretomm.baselines import rotation_map

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


def dual_projected_gradient_png(G, g0, c, iters=40_000):
    """Independent check: maximize the dual of the projection problem.

    The dual of min 0.5||g0 - v||^2 over {G v >= c} is concave in the
    multipliers lam >= 0 with v = g0 + G^T lam; projected gradient ascent
    with momentum converges for feasible problems.
    """
    n = G.shape[0]
    lam = np.zeros(n)
    prev = lam.copy()
    lip = max(np.linalg.norm(G @ G.T, 2), 1e-12)
    step = 1.0 / lip
    for k in range(iters):
        mom = lam + (k / (k + 3.0)) * (lam - prev)
        grad = c - G @ (g0 + G.T @ mom)
        prev = lam
        lam = np.maximum(mom + step * grad, 0.0)
    return g0 + G.T @ lam


class TestPngVector:
    def test_unconstrained_when_already_feasible(self, png_instance):
        # far from the stationary set the raw preference gradient satisfies
        # all alignment constraints
        x = np.array([5.0, 5.0])
        v = png_vector(png_instance.F, png_instance.f0, x, c=0.01)
        np.testing.assert_allclose(v, png_instance.f0.grad(x), atol=1e-12)

    def test_both_active_in_conflict_region(self, png_instance):
        # near the stationary segment both constraints bind and the vertex
        # solution satisfies grad f_i(x)^T v = c exactly, hence e1^T H v = 0
        H = np.array([[1.0, 1.0], [1.0, 2.0]])
        x = np.array([0.6, 0.2])
        c = 0.01
        v = png_vector(png_instance.F, png_instance.f0, x, c)
        for f in png_instance.F.objectives:
            assert f.grad(x) @ v == pytest.approx(c, abs=1e-10)
        assert E1 @ (H @ v) == pytest.approx(0.0, abs=1e-10)

    def test_single_halfspace_projection(self):
        from paretomm import ObjectiveSet, make_quadratic

        F = ObjectiveSet.from_objectives([make_quadratic(np.eye(2), -E1)])
        f0 = make_quadratic(np.eye(2), np.zeros(2))
        # at x = 0: grad f1 = e1, grad f0 = 0, constraint e1^T v >= 1
        v = png_vector(F, f0, np.zeros(2), c=1.0)
        np.testing.assert_allclose(v, E1, atol=1e-12)

    def test_infeasible_opposing_gradients(self, identity_pair):
        # on the stationary segment the two gradients are antiparallel
        with pytest.raises(InfeasibleError):
            png_vector(identity_pair.F, identity_pair.f0, np.array([0.2, 0.0]), c=1.0)

    def test_size_limit(self, identity_pair):
        from paretomm import ObjectiveSet, make_quadratic

        objs = [make_quadratic(np.eye(2), np.array([np.cos(t), np.sin(t)])) for t in np.linspace(0, 1, 21)]
        F = ObjectiveSet.from_objectives(objs)
        with pytest.raises(SizeLimitError):
            png_vector(F, identity_pair.f0, np.array([3.0, 3.0]), c=0.1)

    def test_kkt_against_dual_ascent(self, rng, png_instance):
        checked = 0
        while checked < 10:
            x = rng.normal(size=2) * 1.5
            if abs(x[1]) < 0.3:
                continue  # keep the dual well conditioned away from the segment
            G = png_instance.F.jacobian_T(x).T
            g0 = png_instance.f0.grad(x)
            c = float(rng.uniform(0.005, 0.05))
            try:
                v = png_vector(png_instance.F, png_instance.f0, x, c)
            except InfeasibleError:
                continue
            v_dual = dual_projected_gradient_png(G, g0, c)
            assert np.linalg.norm(v - v_dual) <= 1e-6 * max(1.0, np.linalg.norm(v))
            assert np.min(G @ v - c) >= -1e-9
            checked += 1


class TestPngDescent:
    def test_counterexample_avoids_optimum(self, png_instance):
        config = PngConfig(c=0.01, step=0.05, eps_stop=1e-3, max_iters=100_000)
        res = png_descent(png_instance.F, png_instance.f0, np.array([0.2, 0.9]), config)
        assert res.status == "stationary"
        assert np.linalg.norm(res.point - E1) <= 0.05
        assert np.linalg.norm(res.point) >= 0.5

    def test_identity_variant_reaches_optimum(self, identity_pair):
        config = PngConfig(c=0.01, step=0.05, eps_stop=1e-2, max_iters=100_000)
        res = png_descent(identity_pair.F, identity_pair.f0, np.array([0.2, 0.9]), config)
        assert res.status == "stationary"
        assert np.linalg.norm(res.point) <= 0.05

    def test_stationary_start_returns_immediately(self, identity_pair):
        eps = 1e-2
        config = PngConfig(c=0.05, step=0.05, eps_stop=eps, max_iters=100)
        x0 = np.array([0.0, 0.9 * eps])
        res = png_descent(identity_pair.F, identity_pair.f0, x0, config)
        assert res.status == "stationary"
        assert res.iterations == 0
        assert len(res.trajectory) == 1
        np.testing.assert_allclose(res.point, x0)

    def test_budget_status(self, png_instance):
        config = PngConfig(c=0.01, step=0.05, eps_stop=1e-3, max_iters=3)
        res = png_descent(png_instance.F, png_instance.f0, np.array([0.2, 0.9]), config)
        assert res.status == "budget-exceeded"
        assert len(res.trajectory) == 4

    def test_decreasing_eps_approaches_vertex(self, png_instance):
        dists_to_e1 = []
        for eps_stop in (1e-1, 1e-2, 1e-3):
            config = PngConfig(c=0.01, step=0.05, eps_stop=eps_stop, max_iters=100_000)
            res = png_descent(png_instance.F, png_instance.f0, np.array([0.2, 0.9]), config)
            assert res.status == "stationary"
            assert np.linalg.norm(res.point) >= 0.5
            dists_to_e1.append(np.linalg.norm(res.point - E1))
        assert dists_to_e1[0] >= dists_to_e1[1] - 1e-9
        assert dists_to_e1[1] >= dists_to_e1[2] - 1e-9


class TestGenericity:
    def test_opposing_pair_is_pareto_generic(self):
        assert is_pareto_generic([E1, -E1])

    def test_positive_orthant_pair_is_not(self):
        assert not is_pareto_generic([E1, E2])

    def test_rank_deficient_triple_is_not(self):
        assert not is_pareto_generic([E1, -E1, E1])

    def test_preference_generic_orthogonal(self):
        assert is_preference_generic(E2, [E1, -E1])

    def test_preference_in_span_rejected(self):
        assert not is_preference_generic(E1, [E1, -E1])

    def test_gate_on_pareto_genericity(self):
        assert not is_preference_generic(E2, [E1, E2])

    def test_dimension_preconditions(self):
        with pytest.raises(InvalidArgumentError):
            is_preference_generic(np.ones(2), [E1, -E1, E2])  # n > d

    def test_sampler_produces_generic_tuples(self, rng):
        for _ in range(10):
            d = int(rng.integers(2, 6))
            n = int(rng.integers(2, min(d, 4) + 1))
            v0, vs = sample_preference_generic(rng, d, n)
            assert is_preference_generic(v0, vs)


class TestImpossibilityInstance:
    def test_worked_planar_example(self):
        inst = build_impossibility_instance([E2, E1, -E1])
        np.testing.assert_allclose(inst.hessian, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(sorted(map(tuple, inst.centers)), [(-1.0, 0.0), (1.0, 0.0)])
        np.testing.assert_allclose(inst.problem.f0.grad(np.zeros(2)), E2, atol=1e-12)

    def test_gradient_of_preference_at_origin(self, rng):
        v0, vs = sample_preference_generic(rng, 4, 3)
        inst = build_impossibility_instance([v0] + list(vs))
        np.testing.assert_allclose(inst.problem.f0.grad(np.zeros(4)), v0, atol=1e-12)

    def test_origin_in_hull_and_first_order_optimal(self, rng):
        for _ in range(10):
            d = int(rng.integers(2, 6))
            n = int(rng.integers(2, min(d, 4) + 1))
            v0, vs = sample_preference_generic(rng, d, n)
            inst = build_impossibility_instance([v0] + list(vs))
            # prescribed gradients are met exactly
            for f, v in zip(inst.problem.F.objectives, inst.gradients):
                assert np.linalg.norm(f.grad(np.zeros(d)) - v) <= 1e-10
            # Hessian is positive definite
            assert np.linalg.eigvalsh(inst.hessian)[0] > 0
            # the origin is a convex combination of the centers
            _, gap = pareto_stationarity_gap(inst.problem.F, np.zeros(d))
            assert gap <= 1e-8
            # first-order optimality over the hull
            for _ in range(50):
                w = rng.dirichlet(np.ones(n))
                z = w @ inst.centers
                assert inst.v0 @ z >= -1e-10

    def test_rotation_lemma_properties(self, rng):
        for _ in range(20):
            d = int(rng.integers(2, 6))
            n = int(rng.integers(2, min(d, 4) + 1))
            v0, vs = sample_preference_generic(rng, d, n)
            R = rotation_map(v0, vs)
            sym_eigs = np.linalg.eigvalsh(0.5 * (R + R.T))
            assert sym_eigs[0] > 0
            u0 = v0 / np.linalg.norm(v0)
            for u in vs:
                assert abs(u0 @ (R @ u)) <= 1e-10 * max(1.0, np.linalg.norm(u))

    def test_non_generic_input_rejected(self):
        with pytest.raises(InvalidArgumentError):
            build_impossibility_instance([E1, E1, -E1])  # v0 in span

    def test_pmm_finds_the_origin(self, rng):
        # the constructed instance is solvable: the solver certifies a point
        # at the designated optimum
        from paretomm import SolverConfig, pmm_solve

        v0, vs = sample_preference_generic(rng, 3, 2)
        inst = build_impossibility_instance([v0] + list(vs))
        result = pmm_solve(inst.problem, SolverConfig(eps0=1e-2, eps=1e-4, newton_inner=True))
        assert result.status == "certified"
        gap_dir = result.point.x @ inst.v0 / np.linalg.norm(inst.v0)
        assert gap_dir >= -1e-4  # never below the supporting hyperplane
