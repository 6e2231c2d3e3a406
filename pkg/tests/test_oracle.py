import math

import numpy as np
import pytest

from rspb.augustin import augustin_fixed_point
from rspb.errors import BudgetExceededError, PreconditionError
from rspb.gaussian import AwgnParams, awgn_parametric, theta_of_rho
from rspb.measures import bern, bsc, uniform_dist
from rspb.oracle import (
    DiscreteProduct,
    GaussianProduct,
    awgn_exact_tilted_moments,
    brute_spe,
    discrete_llr_rule,
    exact_np_tradeoff,
    fd_derivative_check,
    gaussian_kl,
    gaussian_llr_rule,
    independent_triple,
    mc_error_probability,
    third_moment_inequality_check,
)
from rspb.spe import spe_parametric
from conftest import random_channel, random_dist

W, Q = bern(0.1), bern(0.5)
R_CRIT = 0.25 * math.log(0.5) + 0.75 * math.log(1.5)


def test_np_binomial_anchor():
    curve = exact_np_tradeoff([W] * 10, [Q] * 10)
    # accepting the two most likely counts gives the quoted error pair
    idx = int(np.argmin(np.abs(curve.type_i - 11 / 1024)))
    assert curve.type_i[idx] == pytest.approx(11 / 1024, rel=1e-12)
    assert curve.type_ii[idx] == pytest.approx(1 - 0.9**10 - 0.9**9, rel=1e-12)
    assert curve.type_ii_at(11 / 1024) == pytest.approx(1 - 0.9**10 - 0.9**9, rel=1e-12)


def test_np_curve_shape_invariants(rng):
    curve = exact_np_tradeoff([W] * 8, [Q] * 8)
    assert np.all(np.diff(curve.type_i) >= -1e-15)
    assert np.all(np.diff(curve.type_ii) <= 1e-15)
    assert curve.type_i[0] == 0.0
    assert curve.type_ii[-1] == pytest.approx(0.0, abs=1e-12)


def test_np_equal_pair_is_diagonal():
    curve = exact_np_tradeoff([Q] * 3, [Q] * 3)
    assert np.allclose(curve.type_i + curve.type_ii, 1.0, atol=1e-12)


def test_np_single_two_point_has_few_points():
    curve = exact_np_tradeoff([W], [Q])
    assert curve.type_i.size <= 3


def test_np_budget_error():
    rng = np.random.default_rng(3)
    w = [random_dist(rng, 5, 1e-3) for _ in range(9)]
    q = [random_dist(rng, 5, 1e-3) for _ in range(9)]
    with pytest.raises(BudgetExceededError):
        exact_np_tradeoff(w, q, budget=50)


def test_mc_always_accept_has_zero_miss():
    dist = DiscreteProduct((W,) * 4)
    est = mc_error_probability(lambda s: np.ones(len(s), bool), dist, 10_000, 7)
    assert est.mean == 0.0 and est.half_width_95 == 0.0


def test_mc_reproducible_and_matches_exact():
    n = 10
    rule = discrete_llr_rule([W] * n, [Q] * n, threshold=10 * math.log(1.8) - 2.5 * math.log(9) + 1e-12)
    # exact acceptance under Q of {k <= 2} is 56/1024
    dist_q = DiscreteProduct((Q,) * n)
    est1 = mc_error_probability(rule, dist_q, 200_000, 42, error_side="false_alarm")
    est2 = mc_error_probability(rule, dist_q, 200_000, 42, error_side="false_alarm")
    assert est1 == est2
    exact = 56 / 1024
    assert abs(est1.mean - exact) <= 3 * est1.half_width_95
    dist_w = DiscreteProduct((W,) * n)
    miss = mc_error_probability(rule, dist_w, 200_000, 43, error_side="miss")
    exact_miss = 1 - sum(math.comb(n, k) * 0.1**k * 0.9 ** (n - k) for k in range(3))
    assert abs(miss.mean - exact_miss) <= 3 * miss.half_width_95
    assert miss.half_width_95 == pytest.approx(
        1.96 * math.sqrt(miss.mean * (1 - miss.mean) / miss.trials), rel=1e-12
    )


def test_mc_requires_enough_trials():
    with pytest.raises(PreconditionError):
        mc_error_probability(lambda s: np.ones(len(s), bool), DiscreteProduct((W,)), 100, 0)


def test_fd_derivative_examples():
    assert fd_derivative_check(lambda x: x * x, 1.0, 1e-4) == pytest.approx(2.0, abs=1e-8)
    info = lambda r: augustin_fixed_point(r, uniform_dist(2), bsc(0.1)).information
    from rspb.augustin import augustin_info_derivative

    assert fd_derivative_check(info, 0.5, 1e-4) == pytest.approx(
        augustin_info_derivative(0.5, uniform_dist(2), bsc(0.1)), abs=1e-5
    )
    # orders above one are unsupported, so the boundary derivative gets a
    # second-order one-sided stencil instead of the central one
    h = 1e-4
    one_sided = (3 * info(1.0) - 4 * info(1.0 - h) + info(1.0 - 2 * h)) / (2 * h)
    assert one_sided == pytest.approx(0.5 * 0.09 * math.log(9.0) ** 2, abs=1e-5)


def test_third_moment_examples():
    probs = np.array([0.5, 0.5])
    vals = np.array([-1.0, 1.0])
    lhs, rhs, holds = third_moment_inequality_check(probs, vals, vals, vals)
    assert holds and lhs == pytest.approx(27.0) and rhs == pytest.approx(27.0)
    lhs, rhs, holds = third_moment_inequality_check([1.0], [1.0], [2.0], [3.0])
    assert holds and lhs == 216.0 and rhs == 324.0


def test_third_moment_random_triples(rng):
    for _ in range(1000):
        parts = []
        for _ in range(3):
            size = int(rng.integers(1, 5))
            parts.append((rng.normal(0.0, 2.0, size), rng.dirichlet(np.ones(size))))
        probs, a, b, c = independent_triple(
            parts[0][0], parts[0][1], parts[1][0], parts[1][1], parts[2][0], parts[2][1]
        )
        _, _, holds = third_moment_inequality_check(probs, a, b, c)
        assert holds


def test_brute_spe_matches_parametric():
    val = brute_spe(uniform_dist(2), bsc(0.1), R_CRIT, 4096)
    pt = spe_parametric(uniform_dist(2), bsc(0.1), R_CRIT)
    assert val <= pt.exponent + 1e-10
    assert pt.exponent - val <= 1e-5


def test_brute_spe_random_instances(rng):
    for _ in range(4):
        n_in = int(rng.integers(2, 4))
        channel = random_channel(rng, n_in, 2)
        p = random_dist(rng, n_in)
        low = augustin_fixed_point(1e-6, p, channel).information
        high = augustin_fixed_point(1.0, p, channel).information
        if high - low < 1e-3:
            continue
        rate = low + float(rng.uniform(0.25, 0.75)) * (high - low)
        pt = spe_parametric(p, channel, rate)
        val = brute_spe(p, channel, rate, 4096)
        assert val <= pt.exponent + 1e-10
        assert pt.exponent - val <= 1e-4


def test_brute_spe_ternary_output_path(rng):
    channel = random_channel(rng, 2, 3)
    p = uniform_dist(2)
    low = augustin_fixed_point(1e-6, p, channel).information
    high = augustin_fixed_point(1.0, p, channel).information
    rate = 0.5 * (low + high)
    pt = spe_parametric(p, channel, rate)
    val = brute_spe(p, channel, rate, 256)
    assert val <= pt.exponent + 1e-9
    assert pt.exponent - val <= 1e-3


def test_brute_spe_edges():
    assert brute_spe(uniform_dist(2), bsc(0.1), 5.0, 512) == 0.0
    coarse = brute_spe(uniform_dist(2), bsc(0.1), R_CRIT, 512)
    fine = brute_spe(uniform_dist(2), bsc(0.1), R_CRIT, 1024)
    # nested order grids; the parabolic q touch-up can wiggle at rounding level
    assert fine >= coarse - 1e-12


def test_gaussian_exact_moments_match_closed_forms():
    params = AwgnParams(1.0, 1.0)
    point = awgn_parametric(0.5, params)
    a2, a3 = awgn_exact_tilted_moments(0.5, 1.0, params)
    assert a2 == pytest.approx(point.a2, rel=1e-9)
    assert a3 <= point.a3_bound
    assert a3 > 0


def test_gaussian_kl_and_rule():
    assert gaussian_kl(0.0, 1.0, 0.0, 1.0) == 0.0
    assert gaussian_kl(1.0, 1.0, 0.0, 1.0) == pytest.approx(0.5)
    params = AwgnParams(1.0, 1.0)
    theta = theta_of_rho(0.5, params)
    n = 8
    rule = gaussian_llr_rule(np.ones(n), params, theta, threshold=-math.inf)
    samples = GaussianProduct(np.ones(n), 1.0).sample(np.random.default_rng(0), 100)
    assert rule(samples).all()


def test_gaussian_threshold_test_budget_by_monte_carlo():
    # no finite enumeration exists for Gaussian products, so the threshold
    # test's Q-side budget is checked by simulation instead
    from rspb.gaussian import gaussian_closed_forms
    from rspb.htbe import threshold_gamma

    params = AwgnParams(1.0, 1.0)
    rho, n, beta = 0.5, 32, 2.0
    theta = theta_of_rho(rho, params)
    point = awgn_parametric(rho, params)
    ht = point.ht_params()
    _, mu_t, v_t = gaussian_closed_forms(rho, 1.0, theta, params)
    tilt_mean = (
        -(v_t + (mu_t - 1.0) ** 2) / (2 * params.sigma2)
        + (v_t + mu_t**2) / (2 * theta)
        + 0.5 * math.log(theta / params.sigma2)
    )
    gamma = threshold_gamma(rho, n, beta, ht)
    rule = gaussian_llr_rule(
        np.ones(n), params, theta, threshold=n * tilt_mean + gamma
    )
    d1_tq = gaussian_kl(mu_t, v_t, 0.0, theta)
    budget = beta * math.exp(-n * d1_tq)
    est = mc_error_probability(
        rule, GaussianProduct(np.zeros(n), theta), 400_000, 11, error_side="false_alarm"
    )
    assert est.mean <= budget + 3 * est.half_width_95
