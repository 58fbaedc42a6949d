import numpy as np
import pytest
from conftest import make_groups, random_psd

from editvec import (
    DEFAULT_EPSILON_POLICY,
    EmptyGroupSet,
    EpsilonPolicy,
    NonFiniteInput,
    SingularDenominator,
    ZeroDenominatorForm,
    rayleigh_quotient,
    regularize,
    scatter_between,
    scatter_pair,
    scatter_within,
    top_generalized_eigenpair,
)
from editvec.linalg import cholesky_with_policy


class TestScatterBetween:
    def test_hand_example(self):
        groups = make_groups([[(0, 0), (2, 0)], [(4, 0), (6, 0)]])
        s = scatter_between(groups)
        # m0=(1,0), m1=(5,0), global mean (3,0): (-2)^2 + 2^2 = 8
        assert np.allclose(s, [[8.0, 0.0], [0.0, 0.0]], atol=1e-15)

    def test_shared_mean_gives_zero(self):
        groups = make_groups([[(1, 2), (3, 4)], [(0, 3), (4, 3)]])
        s = scatter_between(groups)
        assert np.allclose(s, 0.0, atol=1e-15)

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(5)
        members = [rng.standard_normal((k, 4)) for k in (3, 5, 2)]
        groups = make_groups(members)
        s = scatter_between(groups)
        all_points = np.vstack(members)
        gbar = all_points.mean(axis=0)
        naive = np.zeros((4, 4))
        for g in members:
            d = g.mean(axis=0) - gbar
            naive += np.outer(d, d)
        assert np.allclose(s, naive, atol=1e-12)

    def test_weighted_variant(self):
        rng = np.random.default_rng(6)
        members = [rng.standard_normal((k, 3)) for k in (4, 7)]
        groups = make_groups(members)
        s = scatter_between(groups, weighted=True)
        all_points = np.vstack(members)
        gbar = all_points.mean(axis=0)
        naive = np.zeros((3, 3))
        for g in members:
            d = g.mean(axis=0) - gbar
            naive += len(g) * np.outer(d, d)
        assert np.allclose(s, naive, atol=1e-12)

    def test_single_group_rejected(self):
        groups = make_groups([[(0, 0), (1, 1)]])
        with pytest.raises(EmptyGroupSet):
            scatter_between(groups)

    def test_exactly_symmetric(self):
        rng = np.random.default_rng(7)
        groups = make_groups([rng.standard_normal((5, 6)) for _ in range(3)])
        s = scatter_between(groups)
        assert np.array_equal(s, s.T)


class TestScatterWithin:
    def test_hand_example(self):
        groups = make_groups(
            [
                [(0, 0), (2, 0), (1, 1), (1, -1)],
                [(4, 0), (6, 0), (5, 1), (5, -1)],
            ]
        )
        v = scatter_within(groups)
        assert np.allclose(v, [[4.0, 0.0], [0.0, 4.0]], atol=1e-15)

    def test_singleton_groups_give_zero(self):
        groups = make_groups([[(1.0, 2.0)], [(3.0, 4.0)]])
        v = scatter_within(groups)
        assert np.allclose(v, 0.0, atol=1e-15)

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(8)
        members = [rng.standard_normal((k, 4)) for k in (6, 3, 4)]
        groups = make_groups(members)
        v = scatter_within(groups)
        naive = np.zeros((4, 4))
        for g in members:
            m = g.mean(axis=0)
            for row in g:
                naive += np.outer(row - m, row - m)
        assert np.allclose(v, naive, atol=1e-12)


class TestTotalScatterIdentity:
    def test_weighted_between_plus_within_is_total(self):
        rng = np.random.default_rng(9)
        members = [rng.standard_normal((k, 5)) for k in (8, 3, 6, 2)]
        groups = make_groups(members)
        pair = scatter_pair(groups, weighted=True)
        all_points = np.vstack(members)
        centered = all_points - all_points.mean(axis=0)
        total = centered.T @ centered
        assert np.allclose(pair.between + pair.within, total, atol=1e-9)


class TestRegularize:
    def test_zero_matrix(self):
        out = regularize(np.zeros((2, 2)), 0.5)
        assert np.allclose(out, [[0.5, 0.0], [0.0, 0.5]], atol=1e-15)

    def test_epsilon_zero_is_identity_op(self):
        m = np.array([[1.0, 2.0], [2.0, 5.0]])
        assert np.array_equal(regularize(m, 0.0), m)

    def test_diagonal_shift(self):
        out = regularize(np.diag([4.0, 4.0]), 1e-6)
        assert np.allclose(out, np.diag([4.000001, 4.000001]), atol=1e-15)


class TestRayleighQuotient:
    NUM = np.array([[8.0, 0.0], [0.0, 0.0]])
    DEN = np.array([[4.0, 0.0], [0.0, 4.0]])

    def test_hand_values(self):
        assert rayleigh_quotient(np.array([1.0, 0.0]), self.NUM, self.DEN) == pytest.approx(2.0)
        assert rayleigh_quotient(np.array([0.0, 1.0]), self.NUM, self.DEN) == pytest.approx(0.0)

    def test_scale_invariance(self):
        mu = np.array([0.3, -0.7])
        a = rayleigh_quotient(mu, self.NUM, self.DEN)
        b = rayleigh_quotient(3.0 * mu, self.NUM, self.DEN)
        assert a == pytest.approx(b, abs=1e-14)

    def test_zero_denominator_form(self):
        den = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(ZeroDenominatorForm):
            rayleigh_quotient(np.array([0.0, 1.0]), self.NUM, den)


class TestEpsilonPolicy:
    def test_relative_base(self):
        policy = EpsilonPolicy()
        den = np.diag([4.0, 4.0])
        assert policy.first_epsilon(den) == pytest.approx(1e-6 * 8.0 / 2.0)

    def test_growth(self):
        policy = EpsilonPolicy()
        den = np.diag([2.0, 2.0])
        eps0 = policy.first_epsilon(den)
        assert policy.next_epsilon(eps0, den) == pytest.approx(10.0 * eps0)

    def test_zero_trace_fallback(self):
        policy = EpsilonPolicy()
        assert policy.first_epsilon(np.zeros((3, 3))) == pytest.approx(1e-6)

    def test_fixed_policy_does_not_escalate(self):
        policy = EpsilonPolicy.fixed(0.0)
        # indefinite matrix: cholesky can never succeed, and a fixed
        # policy must not try larger ridges
        with pytest.raises(SingularDenominator):
            cholesky_with_policy(np.array([[-1.0, 0.0], [0.0, -1.0]]), policy)

    def test_escalation_recovers_singular_matrix(self):
        _, eps = cholesky_with_policy(np.zeros((2, 2)), DEFAULT_EPSILON_POLICY)
        assert eps > 0.0

    def test_bare_float_means_fixed(self):
        _, eps = cholesky_with_policy(np.diag([1.0, 1.0]), 0.25)
        assert eps == 0.25

    def test_invalid_policy_parameters(self):
        from editvec import InvalidConfig

        with pytest.raises(InvalidConfig):
            EpsilonPolicy(growth=0.5)
        with pytest.raises(InvalidConfig):
            EpsilonPolicy(initial=-1.0)


class TestTopGeneralizedEigenpair:
    def test_hand_example(self):
        num = np.array([[8.0, 0.0], [0.0, 0.0]])
        den = np.array([[4.0, 0.0], [0.0, 4.0]])
        sol = top_generalized_eigenpair(num, den, 0.0)
        assert sol.eigenvalue == pytest.approx(2.0, abs=1e-12)
        assert np.allclose(sol.direction, [1.0, 0.0], atol=1e-12)
        assert sol.epsilon_used == 0.0

    def test_isotropic_tie_break(self):
        sol = top_generalized_eigenpair(np.eye(3), np.eye(3), 0.0)
        assert sol.eigenvalue == pytest.approx(1.0, abs=1e-12)
        # ties resolve toward the earliest standard basis vector
        assert np.allclose(sol.direction, [1.0, 0.0, 0.0], atol=1e-9)

    def test_unit_norm_and_sign_convention(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            num = random_psd(rng, 4)
            den = random_psd(rng, 4)
            sol = top_generalized_eigenpair(num, den)
            assert abs(np.linalg.norm(sol.direction) - 1.0) <= 1e-12
            nonzero = sol.direction[np.abs(sol.direction) > 0]
            assert nonzero[0] > 0

    def test_residual_bound(self):
        rng = np.random.default_rng(11)
        for dim in (2, 3, 4, 5, 6):
            for _ in range(10):
                num = random_psd(rng, dim)
                den = random_psd(rng, dim)
                sol = top_generalized_eigenpair(num, den)
                assert sol.residual <= 1e-8

    def test_eigenvalue_is_max_rayleigh_quotient(self):
        rng = np.random.default_rng(12)
        num = random_psd(rng, 3)
        den = random_psd(rng, 3)
        sol = top_generalized_eigenpair(num, den)
        ridged = den + sol.epsilon_used * np.eye(3)
        assert rayleigh_quotient(sol.direction, num, ridged) == pytest.approx(
            sol.eigenvalue, rel=1e-10
        )
        for _ in range(50):
            mu = rng.standard_normal(3)
            assert rayleigh_quotient(mu, num, ridged) <= sol.eigenvalue + 1e-9

    def test_rank_deficient_numerator(self):
        rng = np.random.default_rng(13)
        num = random_psd(rng, 5, rank=1)
        den = random_psd(rng, 5)
        sol = top_generalized_eigenpair(num, den)
        assert sol.eigenvalue > 0.0
        assert sol.residual <= 1e-8

    def test_zero_numerator(self):
        sol = top_generalized_eigenpair(np.zeros((3, 3)), np.eye(3), 0.0)
        assert sol.eigenvalue == 0.0
        assert abs(np.linalg.norm(sol.direction) - 1.0) <= 1e-12

    def test_dimension_mismatch(self):
        from editvec import DimensionMismatch

        with pytest.raises(DimensionMismatch):
            top_generalized_eigenpair(np.eye(2), np.eye(3))

    def test_asymmetric_input_rejected(self):
        m = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            top_generalized_eigenpair(m, np.eye(2))

    def test_non_finite_rejected(self):
        m = np.array([[np.nan, 0.0], [0.0, 1.0]])
        with pytest.raises(NonFiniteInput):
            top_generalized_eigenpair(m, np.eye(2))

    def test_indefinite_denominator_exhausts_policy(self):
        num = np.eye(2)
        den = np.array([[-100.0, 0.0], [0.0, -100.0]])
        with pytest.raises(SingularDenominator):
            top_generalized_eigenpair(num, den, EpsilonPolicy(initial=1e-10))
