import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oppwelfare import (
    LOG,
    DomainError,
    NumericError,
    PowerUtility,
    SecondOrderTransform,
    Society,
    WeightVector,
    WelfareParams,
    bregman_divergence,
    cgf,
    cgf_derivative,
    exponential_transform,
    identity_transform,
    kl_divergence,
    optimal_weights,
    phi_theta,
    phi_theta_inverse,
    transform_converge,
    transform_permute,
    transform_scale,
    type_utilities,
    variational_objective,
    welfare_mean_divergence,
    welfare_mean_variance,
    welfare_primal,
    welfare_second_order,
    welfare_variational,
)
from oppwelfare.testkit import SocietyGenerator, generate, oracle_welfare

LN2 = math.log(2)
THETAS = [1e-4, 1e-2, 0.1, 1.0, 5.0, 50.0]
seeds = st.integers(0, 2**31 - 1)


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(a))


class TestWelfareParams:
    def test_rho(self):
        assert WelfareParams(0.0).rho == 1.0
        assert WelfareParams(math.inf).rho == 0.0

    @pytest.mark.parametrize("theta", [-1.0, math.nan])
    def test_domain(self, theta):
        with pytest.raises(DomainError):
            WelfareParams(theta)


class TestPhiTheta:
    def test_identity_at_zero(self):
        assert phi_theta(0.37, 0.0) == 0.37

    @pytest.mark.parametrize("theta", [1e-3, 1.0, 40.0])
    def test_value_at_origin(self, theta):
        assert phi_theta(0.0, theta) == -1.0

    def test_inverse_pair(self):
        assert phi_theta_inverse(phi_theta(0.7, 2.5), 2.5) == pytest.approx(0.7, abs=1e-12)

    def test_inverse_domain(self):
        with pytest.raises(DomainError):
            phi_theta_inverse(0.0, 1.0)


class TestPrimal:
    def test_utilitarian_example(self, rich_poor):
        assert welfare_primal(rich_poor, LOG, 0.0) == pytest.approx(0.5 * LN2, abs=1e-15)

    def test_two_level_at_one(self, two_level):
        assert welfare_primal(two_level, LOG, 1.0) == pytest.approx(-math.log(0.75), abs=1e-15)

    def test_maximin(self, rich_poor):
        assert welfare_primal(rich_poor, LOG, math.inf) == pytest.approx(0.4 * LN2, abs=1e-15)

    def test_zero_share_types_are_ignored(self):
        s = Society.from_rows([1.0, 0.0], [{2.0: 1.0}, {1.0: 1.0}])
        assert welfare_primal(s, LOG, math.inf) == LN2

    @settings(max_examples=50, deadline=None)
    @given(seeds, st.sampled_from(THETAS + [0.0, math.inf]))
    def test_matches_extended_precision(self, seed, theta):
        s = generate(seed)
        assert close(welfare_primal(s, LOG, theta), oracle_welfare(s, LOG, theta), 1e-13)

    @settings(max_examples=50, deadline=None)
    @given(seeds, st.sampled_from(THETAS))
    def test_between_min_and_mean(self, seed, theta):
        s = generate(seed)
        U = type_utilities(s, LOG)
        v = welfare_primal(s, LOG, theta)
        assert U.min() - 1e-12 <= v <= welfare_primal(s, LOG, 0.0) + 1e-12

    @settings(max_examples=30, deadline=None)
    @given(seeds, st.sampled_from(THETAS + [0.0]))
    def test_nonnegative_utility_gives_nonnegative_welfare(self, seed, theta):
        s = generate(seed, SocietyGenerator(income_range=(1.0, 100.0)))
        assert welfare_primal(s, LOG, theta) >= 0.0
        assert welfare_primal(s, PowerUtility(0.5), theta) >= 0.0

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_continuous_at_small_theta_switch(self, seed):
        s = generate(seed)
        sw = WelfareParams().theta_small_switch
        below = welfare_primal(s, LOG, float(np.nextafter(sw, 0.0)))
        assert abs(below - welfare_primal(s, LOG, sw)) <= 1e-9

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_theta_limits(self, seed):
        s = generate(seed)
        assert abs(welfare_primal(s, LOG, 1e-9) - welfare_primal(s, LOG, 0.0)) <= 1e-8
        assert abs(welfare_primal(s, LOG, 1e4) - type_utilities(s, LOG).min()) <= 1e-3

    @settings(max_examples=30, deadline=None)
    @given(seeds, st.sampled_from([0.0, 0.5, 3.0, math.inf]), st.sampled_from([0.1, 3.0, 1000.0]))
    def test_log_scale_shift(self, seed, theta, lam):
        s = generate(seed)
        assert abs(welfare_primal(transform_scale(s, lam), LOG, theta) - welfare_primal(s, LOG, theta) - math.log(lam)) <= 1e-10


class TestSecondOrder:
    def test_identity_is_utilitarian(self, rich_poor):
        assert welfare_second_order(rich_poor, LOG, identity_transform()) == pytest.approx(0.5 * LN2, abs=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from(THETAS))
    def test_raw_exponential_matches_primal(self, seed, theta):
        s = generate(seed)
        raw = welfare_second_order(s, LOG, exponential_transform(theta, normalized=False))
        assert close(raw, welfare_primal(s, LOG, theta), 1e-10)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from(THETAS))
    def test_centered_exponential_matches_primal(self, seed, theta):
        s = generate(seed)
        phi = exponential_transform(theta, center=float(type_utilities(s, LOG).min()))
        assert close(welfare_second_order(s, LOG, phi), welfare_primal(s, LOG, theta), 1e-12)

    def test_concave_transform_bounds(self):
        for seed in range(20):
            s = generate(seed, SocietyGenerator(income_range=(1.0, 100.0)))
            sqrt = SecondOrderTransform(math.sqrt, lambda v: v * v, "sqrt")
            U = type_utilities(s, LOG)
            v = welfare_second_order(s, LOG, sqrt)
            assert U.min() - 1e-12 <= v <= welfare_primal(s, LOG, 0.0) + 1e-12

    def test_inversion_failure_is_numeric_error(self, two_level):
        bad = SecondOrderTransform(lambda t: t, lambda v: math.sqrt(-1.0 - v), "broken")
        with pytest.raises(NumericError, match="broken"):
            welfare_second_order(two_level, LOG, bad)


class TestOptimalWeights:
    def test_theta_zero_is_shares(self, rich_poor):
        assert optimal_weights(rich_poor, LOG, 0.0).weights == (0.2, 0.8)

    def test_two_level(self, two_level):
        np.testing.assert_allclose(optimal_weights(two_level, LOG, 1.0).array, (2 / 3, 1 / 3), atol=1e-15)

    def test_large_theta_concentrates(self, two_level):
        assert optimal_weights(two_level, LOG, 50.0)["low"] >= 0.999

    def test_infinite_theta(self, rich_poor):
        assert optimal_weights(rich_poor, LOG, math.inf).weights == (0.0, 1.0)

    def test_weight_spread_ordering(self):
        s = Society.from_rows([0.5, 0.5], [{1.0: 0.5, 3.0: 0.5}, {2.0: 1.0}], labels=["worse", "better"])
        grid = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
        w = [optimal_weights(s, LOG, th) for th in grid]
        for lo, hi in zip(w, w[1:]):
            assert hi["worse"] > lo["worse"] >= lo["better"] > hi["better"]

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from(THETAS))
    def test_sum_to_one(self, seed, theta):
        assert abs(math.fsum(optimal_weights(generate(seed), LOG, theta).weights) - 1.0) <= 1e-12


class TestVariational:
    def test_two_level(self, two_level):
        value, w = welfare_variational(two_level, LOG, 1.0)
        assert value == pytest.approx(-math.log(0.75), abs=1e-10)
        np.testing.assert_allclose(w.array, (2 / 3, 1 / 3), atol=1e-6)

    def test_equal_opportunity(self, equal_opportunity):
        value, w = welfare_variational(equal_opportunity, LOG, 2.0)
        assert value == pytest.approx(type_utilities(equal_opportunity, LOG)[0], abs=1e-14)
        np.testing.assert_allclose(w.array, equal_opportunity.shares, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from(THETAS))
    def test_agrees_with_closed_form(self, seed, theta):
        s = generate(seed)
        value, w = welfare_variational(s, LOG, theta)
        star = optimal_weights(s, LOG, theta)
        assert abs(value - welfare_primal(s, LOG, theta)) <= 1e-8
        assert np.max(np.abs(w.array - star.array)) <= 1e-6
        assert variational_objective(w, s, LOG, theta) >= variational_objective(star, s, LOG, theta) - 1e-8

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from(THETAS))
    def test_duality(self, seed, theta):
        s = generate(seed)
        star = optimal_weights(s, LOG, theta)
        assert close(variational_objective(star, s, LOG, theta), welfare_primal(s, LOG, theta), 1e-10)

    def test_non_convergence_reported(self, two_level):
        with pytest.raises(NumericError, match="did not converge"):
            welfare_variational(two_level, LOG, 1e-3, max_iter=2)

    def test_needs_finite_positive_theta(self, two_level):
        with pytest.raises(DomainError):
            welfare_variational(two_level, LOG, 0.0)


class TestKL:
    def test_self(self):
        assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_point_mass(self):
        assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(LN2, abs=1e-15)

    def test_value(self):
        expected = 0.2 * math.log(0.4) + 0.8 * math.log(1.6)
        assert kl_divergence([0.2, 0.8], [0.5, 0.5]) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.19274, abs=1e-5)

    def test_absolute_continuity(self):
        with pytest.raises(DomainError):
            kl_divergence([0.5, 0.5], [1.0, 0.0])

    def test_accepts_weight_vectors(self):
        p = WeightVector(("a", "b"), (0.2, 0.8))
        q = WeightVector(("a", "b"), (0.5, 0.5))
        assert kl_divergence(p, q) > 0


class TestBregmanAndCGF:
    def test_bregman_zero_on_diagonal(self):
        assert bregman_divergence((math.exp, math.exp), 0.3, 0.3) == 0.0

    @given(st.floats(-10, 10), st.floats(-10, 10))
    def test_bregman_square(self, x, y):
        assert bregman_divergence((lambda t: t * t, lambda t: 2 * t), x, y) == pytest.approx((x - y) ** 2, abs=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from(THETAS))
    def test_bregman_of_cgf_is_welfare_gap(self, seed, theta):
        s = generate(seed)
        gen = (lambda t: cgf(s, LOG, t), lambda t: cgf_derivative(s, LOG, t))
        gap = welfare_primal(s, LOG, 0.0) - welfare_primal(s, LOG, theta)
        assert abs(bregman_divergence(gen, -theta, 0.0) - theta * gap) <= 1e-10 * max(1.0, theta)

    def test_cgf_at_zero(self, rich_poor):
        assert cgf(rich_poor, LOG, 0.0) == 0.0

    def test_cgf_single_type(self):
        s = Society.from_rows([1.0], [{3.0: 1.0}])
        assert cgf(s, LOG, 2.5) == pytest.approx(2.5 * math.log(3.0), rel=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_cgf_slope_at_zero(self, seed):
        s = generate(seed)
        h = 1e-5
        fd = (cgf(s, LOG, h) - cgf(s, LOG, -h)) / (2 * h)
        assert abs(fd - welfare_primal(s, LOG, 0.0)) <= 1e-8


class TestMeanVariance:
    def test_zero_theta_is_exact(self, rich_poor):
        assert welfare_mean_variance(rich_poor, LOG, 0.0) == welfare_primal(rich_poor, LOG, 0.0)

    def test_equal_opportunity(self, equal_opportunity):
        U = type_utilities(equal_opportunity, LOG)[0]
        for theta in (0.1, 10.0):
            assert welfare_mean_variance(equal_opportunity, LOG, theta) == pytest.approx(U, abs=1e-15)

    def test_third_order_error(self):
        s = Society.from_rows([0.2, 0.5, 0.3], [{1.0: 1.0}, {2.0: 1.0}, {7.0: 1.0}])
        err = [abs(welfare_primal(s, LOG, t) - welfare_mean_variance(s, LOG, t)) for t in (0.005, 0.01)]
        assert 0.15 <= err[0] / err[1] <= 0.35


class TestMeanDivergence:
    def test_two_level(self, two_level):
        md = welfare_mean_divergence(two_level, LOG, 1.0)
        assert md.efficiency == pytest.approx(0.3465736, abs=1e-7)
        assert md.iop_term == pytest.approx(0.0588915, abs=1e-7)
        assert md.welfare == pytest.approx(0.2876821, abs=1e-7)

    def test_equal_opportunity(self, equal_opportunity):
        md = welfare_mean_divergence(equal_opportunity, LOG, 3.0)
        assert md.iop_term == 0.0
        assert md.welfare == type_utilities(equal_opportunity, LOG)[0]

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from(THETAS))
    def test_positive_loss_and_agreement(self, seed, theta):
        s = generate(seed, SocietyGenerator(min_types=2, distinct_utilities=True))
        md = welfare_mean_divergence(s, LOG, theta)
        assert md.iop_term > 0
        assert close(md.welfare, welfare_primal(s, LOG, theta), 1e-10)


class TestAxioms:
    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from(THETAS + [0.0, math.inf]), st.randoms(use_true_random=False))
    def test_permutation_invariance_uniform_shares(self, seed, theta, rnd):
        s = generate(seed, SocietyGenerator(uniform_shares=True))
        perm = list(range(len(s)))
        rnd.shuffle(perm)
        assert welfare_primal(transform_permute(s, perm), LOG, theta) == welfare_primal(s, LOG, theta)

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.floats(0.0, 0.99))
    def test_convergence_never_hurts(self, seed, alpha):
        s = generate(seed, SocietyGenerator(min_types=2, uniform_shares=True))
        a, b = s.labels[0], s.labels[1]
        c = transform_converge(s, a, b, alpha)
        for theta in (0.0, 0.1, 1.0, 10.0, math.inf):
            assert welfare_primal(c, LOG, theta) >= welfare_primal(s, LOG, theta) - 1e-12

    def test_strictly_decreasing_in_theta(self):
        s = Society.from_rows([0.3, 0.7], [{1.0: 1.0}, {1.5: 1.0}])
        values = [welfare_primal(s, LOG, th) for th in np.linspace(0, 10, 101)]
        assert all(a > b for a, b in zip(values, values[1:]))
