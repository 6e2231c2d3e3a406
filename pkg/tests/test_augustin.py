import json
import math

import numpy as np
import pytest

from rspb.augustin import (
    ConstraintSet,
    augustin_capacity,
    augustin_fixed_point,
    augustin_info_derivative,
    augustin_information_grid,
    haroutunian_rate,
    read_constraint,
)
from rspb.errors import FeasibilityError, InvalidOrderError, NonConvergenceError
from rspb.measures import (
    DiscreteChannel,
    bern,
    bsc,
    conditional_renyi_divergence,
    point_mass,
    renyi_divergence,
    uniform_dist,
    zchannel,
)
from rspb.oracle import fd_derivative_check
from conftest import random_channel, random_dist

U2 = uniform_dist(2)
I_HALF = -2.0 * math.log(2.0 / math.sqrt(5.0))
I_ONE = math.log(2.0) - (-0.1 * math.log(0.1) - 0.9 * math.log(0.9))
R_CRIT = 0.25 * math.log(0.5) + 0.75 * math.log(1.5)


def test_point_mass_input_gives_channel_row():
    sol = augustin_fixed_point(0.7, point_mass(1, 2), bsc(0.1))
    assert sol.mean.allclose(bern(0.9), tol=1e-12)
    assert sol.information == pytest.approx(0.0, abs=1e-12)


def test_bsc_fixed_point_anchors():
    sol = augustin_fixed_point(0.5, U2, bsc(0.1))
    assert sol.mean.allclose(bern(0.5), tol=1e-12)
    assert sol.information == pytest.approx(I_HALF, abs=1e-12)
    sol1 = augustin_fixed_point(1.0, U2, bsc(0.1))
    assert sol1.mean.allclose(bern(0.5), tol=1e-15)
    assert sol1.information == pytest.approx(I_ONE, abs=1e-12)


def test_fixed_point_contract(rng):
    for _ in range(30):
        n_in = int(rng.integers(2, 5))
        n_out = int(rng.integers(2, 6))
        rho = float(rng.uniform(0.05, 0.95))
        channel = random_channel(rng, n_in, n_out)
        p = random_dist(rng, n_in)
        sol = augustin_fixed_point(rho, p, channel)
        assert sol.residual <= 1e-12
        assert sol.alt_identity_residual <= 1e-9
        # reported information equals the conditional divergence at the mean
        direct = conditional_renyi_divergence(rho, channel, sol.mean, p)
        assert sol.information == pytest.approx(direct, abs=1e-10)
        # one more application of the map moves the mean by at most tol
        again = augustin_fixed_point(rho, p, channel, q0=sol.mean.masses)
        assert 0.5 * np.abs(again.mean.masses - sol.mean.masses).sum() <= 2e-12


def test_rho_above_one_rejected():
    with pytest.raises(InvalidOrderError):
        augustin_fixed_point(1.2, U2, bsc(0.1))
    with pytest.raises(InvalidOrderError):
        haroutunian_rate(1.5, U2, bsc(0.1))


def test_non_convergence_reports_residual():
    with pytest.raises(NonConvergenceError) as err:
        augustin_fixed_point(0.5, U2, zchannel(0.5), tol=1e-15, max_iter=2)
    assert err.value.residual > 0


def test_information_grid_matches_single_solves(rng):
    channel = random_channel(rng, 3, 4)
    p = random_dist(rng, 3)
    grid = np.array([0.1, 0.3, 0.55, 0.8, 0.95, 1.0])
    info = augustin_information_grid(grid, p, channel)
    for r, v in zip(grid, info):
        assert v == pytest.approx(augustin_fixed_point(float(r), p, channel).information, abs=1e-11)
    assert np.all(np.diff(info) >= -1e-11)


def test_two_sided_divergence_bound(rng):
    # D_rho(W||Q|P) - I_rho >= D_min(1,rho)(mean || Q) for random Q
    for rho in (0.3, 0.8, 1.0):
        channel = random_channel(rng, 3, 4)
        p = random_dist(rng, 3)
        sol = augustin_fixed_point(rho, p, channel)
        for _ in range(50):
            q = random_dist(rng, 4)
            slack = conditional_renyi_divergence(rho, channel, q, p) - sol.information
            lower = renyi_divergence(min(1.0, rho), sol.mean, q)
            assert slack >= lower - 1e-9


def test_derivative_order_one_closed_form():
    # half the input-averaged variance of the log ratio against the mixture
    expected = 0.5 * 0.09 * math.log(9.0) ** 2
    assert augustin_info_derivative(1.0, U2, bsc(0.1)) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.2172508, abs=1e-7)


def test_derivative_point_mass_is_zero():
    assert augustin_info_derivative(0.6, point_mass(0, 2), bsc(0.1)) == pytest.approx(0.0, abs=1e-12)


def test_derivative_matches_finite_difference():
    def info(r):
        return augustin_fixed_point(r, U2, bsc(0.1)).information

    fd = fd_derivative_check(info, 0.5, 1e-4)
    assert augustin_info_derivative(0.5, U2, bsc(0.1)) == pytest.approx(fd, abs=1e-5)


def test_haroutunian_rate_anchors_and_monotone():
    assert haroutunian_rate(0.5, U2, bsc(0.1)) == pytest.approx(R_CRIT, abs=1e-12)
    near_one = haroutunian_rate(1.0 - 1e-9, U2, bsc(0.1))
    assert near_one == pytest.approx(I_ONE, abs=1e-6)
    assert haroutunian_rate(0.4, point_mass(0, 2), bsc(0.1)) == pytest.approx(0.0, abs=1e-12)
    grid = np.linspace(0.05, 0.95, 10)
    vals = [haroutunian_rate(float(r), U2, bsc(0.1)) for r in grid]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_haroutunian_monotone_random(rng):
    channel = random_channel(rng, 3, 3)
    p = random_dist(rng, 3)
    grid = np.linspace(0.1, 0.9, 9)
    vals = [haroutunian_rate(float(r), p, channel) for r in grid]
    assert all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))


def test_capacity_symmetric_anchor():
    res = augustin_capacity(0.5, bsc(0.1))
    assert res.certified and res.certificate_gap <= 1e-8
    assert res.capacity == pytest.approx(I_HALF, abs=1e-10)
    assert res.center.allclose(bern(0.5), tol=1e-9)
    assert res.optimizer.allclose(uniform_dist(2), tol=1e-6)
    res1 = augustin_capacity(1.0, bsc(0.1))
    assert res1.capacity == pytest.approx(I_ONE, abs=1e-10)


def test_capacity_single_input_channel_is_zero():
    one = DiscreteChannel((bern(0.3),))
    res = augustin_capacity(0.5, one)
    assert res.capacity == pytest.approx(0.0, abs=1e-12)


def test_capacity_single_and_list_constraints():
    single = augustin_capacity(0.5, bsc(0.1), ConstraintSet.single(bern(0.3)))
    direct = augustin_fixed_point(0.5, bern(0.3), bsc(0.1))
    assert single.capacity == pytest.approx(direct.information, abs=1e-12)
    listed = augustin_capacity(
        0.5, bsc(0.1), ConstraintSet.explicit([uniform_dist(2), point_mass(0, 2)])
    )
    assert listed.capacity == pytest.approx(I_HALF, abs=1e-12)
    assert listed.optimizer.allclose(uniform_dist(2))


def test_capacity_z_channel_certified():
    # order-one capacity of the half-flip Z channel is ln(5/4)
    res = augustin_capacity(1.0, zchannel(0.5), tol=1e-8)
    assert res.certified
    assert res.capacity == pytest.approx(math.log(1.25), abs=1e-8)
    res_half = augustin_capacity(0.5, zchannel(0.5), tol=1e-8)
    assert res_half.certified
    gap = max(
        renyi_divergence(0.5, row, res_half.center) for row in zchannel(0.5).rows
    ) - res_half.capacity
    assert gap <= 1e-8


def test_capacity_cost_constraint_binds():
    # forbid most of the informative input; capacity drops accordingly
    costs = [0.0, 1.0]
    res = augustin_capacity(
        1.0, bsc(0.1), ConstraintSet.cost(costs, 0.2), tol=1e-7
    )
    assert res.certified
    assert res.optimizer.masses[1] == pytest.approx(0.2, abs=1e-6)
    free = augustin_capacity(1.0, bsc(0.1))
    assert res.capacity < free.capacity
    # slack budget reduces to the unconstrained optimum
    slack = augustin_capacity(1.0, bsc(0.1), ConstraintSet.cost(costs, 0.9), tol=1e-7)
    assert slack.capacity == pytest.approx(free.capacity, abs=1e-7)


def test_cost_constraint_feasibility():
    with pytest.raises(FeasibilityError):
        ConstraintSet.cost([1.0, 2.0], 0.5)


def test_constraint_file_parsing(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"kind": "all"}))
    assert read_constraint(f).kind == "all"
    f.write_text(json.dumps({"kind": "cost", "costs": [0.0, 1.0], "budget": 0.5}))
    c = read_constraint(f)
    assert c.kind == "cost" and c.budget == 0.5
    f.write_text(json.dumps({"kind": "mystery"}))
    with pytest.raises(ValueError):
        read_constraint(f)
