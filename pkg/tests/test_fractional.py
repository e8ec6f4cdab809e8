import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mwrc.core import NonConvergenceError, PowerLimits, Scheme
from mwrc.fractional import alternating_gee2, dinkelbach, golden_section_max, maximize_gee1
from mwrc.gee import PowerCost, gee1_params_for, gee2_params_for
from mwrc.monotonic import gee2_global
from mwrc.oracle import grid_search_gee

COST = PowerCost(3.0, 1.0, 1.0)
LIM10 = PowerLimits.symmetric(10.0)


def _log_over_affine():
    f = lambda x: math.log2(1 + x)  # noqa: E731
    g = lambda x: x + 1  # noqa: E731

    def inner(lam):
        return golden_section_max(lambda x: f(x) - lam * g(x), 0.0, 10.0, tol=1e-12)[0]

    return f, g, inner


def test_golden_section_finds_concave_max():
    x, v = golden_section_max(lambda x: -(x - 2.5) ** 2, 0.0, 10.0, tol=1e-12)
    assert x == pytest.approx(2.5, abs=1e-6) and v == pytest.approx(0.0, abs=1e-12)


def test_dinkelbach_log_over_affine():
    f, g, inner = _log_over_affine()
    res = dinkelbach(f, g, inner, eps=1e-12)
    assert res.converged
    assert res.x_star == pytest.approx(math.e - 1, abs=1e-5)
    assert res.lambda_star == pytest.approx(1 / (math.e * math.log(2)), abs=1e-9)
    assert res.lambda_star == pytest.approx(0.530744, abs=1e-5)
    assert all(b > a for a, b in zip(res.lambdas, res.lambdas[1:]))


def test_dinkelbach_constant_ratio():
    res = dinkelbach(lambda x: x + 1, lambda x: x + 1, lambda lam: 3.0)
    assert res.lambda_star == pytest.approx(1.0)
    assert res.iterations <= 2


def test_dinkelbach_iteration_cap():
    f, g, inner = _log_over_affine()
    with pytest.raises(NonConvergenceError):
        dinkelbach(f, g, inner, eps=-1.0, max_iter=3)


def test_gee1_df_reference_instance():
    rep = maximize_gee1(gee1_params_for(Scheme.DF), COST, LIM10)
    _, grid = grid_search_gee(Scheme.DF, COST, LIM10, 1001)
    assert rep.gee == pytest.approx(0.3957, abs=1e-4)
    assert rep.gee == pytest.approx(0.39566836, abs=1e-8)
    assert rep.gee >= grid
    rate = rep.gee * COST.consumed(rep.profile.p_s, rep.profile.p_r)
    assert rate == pytest.approx(1.28, abs=0.01)


def test_gee1_huge_circuit_power_uses_full_power():
    rep = maximize_gee1(gee1_params_for(Scheme.DF), PowerCost(3, 1, 1e9), LIM10)
    # full source power; the uplink limits, so the relay stops where the downlink meets it
    assert rep.profile.p_s == pytest.approx(10.0, rel=1e-6)
    assert rep.profile.p_r == pytest.approx(31 ** (2 / 3) - 1, rel=1e-6)
    rate = rep.gee * PowerCost(3, 1, 1e9).consumed(rep.profile.p_s, rep.profile.p_r)
    assert rate == pytest.approx(math.log2(31), rel=1e-6)


def test_gee1_tiny_box_goes_to_zero():
    rep = maximize_gee1(gee1_params_for(Scheme.DF), COST, PowerLimits.symmetric(1e-9))
    assert rep.gee < 1e-8


def test_alternating_matches_global_nnc():
    params = gee2_params_for(Scheme.NNC)
    alt = alternating_gee2(params, COST, LIM10, p_r_init=10.0)
    glob = gee2_global(params, COST, LIM10)
    assert alt.gee == pytest.approx(glob.gee, rel=1e-4)
    assert alt.gee == pytest.approx(0.2154283, abs=1e-7)


def test_alternating_from_silent_relay_is_degenerate():
    params = gee2_params_for(Scheme.NNC)
    rep = alternating_gee2(params, COST, LIM10, p_r_init=0.0, retry_degenerate=False)
    assert rep.gee == 0.0
    assert (rep.profile.p_s, rep.profile.p_r) == (0.0, 0.0)
    assert alternating_gee2(params, COST, LIM10, p_r_init=0.0).gee > 0.2


@given(st.sampled_from([Scheme.NNC, Scheme.AF_SND, Scheme.AF_IAN]), st.floats(0.5, 2.0),
       st.floats(3.0, 6.0), st.floats(1.0, 3.0), st.floats(0.1, 3.0), st.floats(0.1, 30.0),
       st.floats(0.0, 1.0))
def test_alternating_trajectory_nondecreasing(scheme, n, phi, psi, p_c, p_max, init):
    limits = PowerLimits.symmetric(p_max)
    rep = alternating_gee2(gee2_params_for(scheme, n, n), PowerCost(phi, psi, p_c), limits,
                           p_r_init=init * p_max)
    assert all(b >= a for a, b in zip(rep.trajectory, rep.trajectory[1:]))
    assert rep.profile.within(limits)
