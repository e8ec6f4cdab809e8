import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from mwrc.core import PowerLimits, Scheme
from mwrc.game import (
    GameSpec,
    br_relay,
    br_sources,
    brd,
    is_nash,
    saturation_power_sources,
)
from mwrc.gee import Gee1Params, PowerCost, PowerProfile

COST = PowerCost(3.0, 1.0, 1.0, 0.75, 0.25)
LIM10 = PowerLimits.symmetric(10.0)


def spec(scheme, cost=COST, limits=LIM10):
    return GameSpec.for_scheme(scheme, cost, limits)


def test_df_saturation_power():
    s = spec(Scheme.DF, PowerCost(3.0, 1.0, 1.0, 1.0, 0.25), PowerLimits(1e3, 1e3))
    p_bar = saturation_power_sources(s, 1e3)
    assert p_bar == pytest.approx(1.106, abs=1e-3)
    # stationarity of (1/3)(1+3p) ln(1+3p) - p = 1
    assert (1 + 3 * p_bar) * math.log1p(3 * p_bar) / 3 - p_bar == pytest.approx(1.0, abs=1e-12)
    grid = np.linspace(0.0, 5.0, 500_001)
    u = np.log2(1 + 3 * grid) / (grid + 1.0)
    assert grid[np.argmax(u)] == pytest.approx(p_bar, abs=2e-5)
    assert br_sources(s, 1e3) == pytest.approx(p_bar, rel=1e-12)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_silent_opponent_gives_zero(scheme):
    s = spec(scheme)
    assert br_sources(s, 0.0) == 0.0
    assert br_relay(s, 0.0) == 0.0


def test_relay_response_mirrors_sources_response():
    cost = PowerCost(3.0, 1.0, 1.0, 0.4, 0.4)
    lim = PowerLimits(7.0, 7.0)
    a = GameSpec(Scheme.DF, Gee1Params(1.5, 1.0, 1.0, 3.0), cost, lim)
    b = GameSpec(Scheme.DF, Gee1Params(1.0, 3.0, 1.5, 1.0), cost, lim)
    for x in (0.1, 1.0, 5.0, 7.0):
        assert br_relay(b, x) == pytest.approx(br_sources(a, x), rel=1e-12)


def test_nnc_relay_response_matches_scan():
    s = spec(Scheme.NNC)
    best = br_relay(s, 10.0)
    u_r = lambda p: -s.utilities(10.0, p)[1]  # noqa: E731
    grid = np.linspace(0.0, 10.0, 10_001)
    i = int(np.argmin([u_r(p) for p in grid]))
    ref = optimize.minimize_scalar(u_r, bounds=(grid[max(i - 1, 0)], grid[min(i + 1, 10_000)]),
                                   method="bounded", options={"xatol": 1e-10}).x
    assert best == pytest.approx(ref, abs=1e-6)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_trivial_equilibrium(scheme):
    s = spec(scheme)
    assert is_nash(s, PowerProfile(0.0, 0.0))
    tr = brd(s, p_r_init=0.0)
    assert tr.profile == PowerProfile(0.0, 0.0)
    assert tr.converged


def test_df_dynamics_reach_equilibrium():
    s = spec(Scheme.DF)
    tr = brd(s, p_r_init=10.0)
    assert tr.converged
    assert is_nash(s, tr.profile, tol=1e-6)
    p_s = [x[0] for x in tr.sequence]
    p_r = [x[1] for x in tr.sequence]
    assert all(np.diff(p_s) <= 1e-12) or all(np.diff(p_s) >= -1e-12)
    assert all(np.diff(p_r) <= 1e-12) or all(np.diff(p_r) >= -1e-12)
    assert s.gee(*tr.profile.__dict__.values()) > 0


def test_df_equilibria_depend_on_start():
    s = spec(Scheme.DF)
    values = {round(s.gee(*brd(s, p_r_init=x).sequence[-1][:2]), 9) for x in (0.05, 10.0)}
    assert len(values) == 2
    nnc = spec(Scheme.NNC)
    values = {round(nnc.gee(*brd(nnc, p_r_init=x).sequence[-1][:2]), 6) for x in (0.05, 1.0, 10.0)}
    assert len(values) == 1


def test_saturated_corner_is_equilibrium():
    cost = PowerCost(3.0, 1.0, 0.02, 0.01, 0.01)
    lim = PowerLimits(0.01, 0.01)
    for scheme in (Scheme.NNC, Scheme.AF_SND, Scheme.AF_IAN):
        s = GameSpec.for_scheme(scheme, cost, lim)
        assert br_sources(s, lim.p_r_max) == lim.p_s_max
        assert br_relay(s, lim.p_s_max) == lim.p_r_max
        assert is_nash(s, PowerProfile(lim.p_s_max, lim.p_r_max))


def test_brd_input_validation():
    s = spec(Scheme.NNC)
    with pytest.raises(ValueError):
        brd(s)
    with pytest.raises(ValueError):
        brd(s, p_s_init=1.0, p_r_init=1.0)
    with pytest.raises(ValueError):
        brd(s, p_r_init=11.0)


def test_spec_checks_parameter_family():
    with pytest.raises(ValueError):
        GameSpec(Scheme.NNC, Gee1Params(1.5, 1, 1, 3), COST, LIM10)


game_inputs = st.tuples(st.sampled_from(list(Scheme)), st.floats(0.05, 2.0), st.floats(0.05, 2.0),
                        st.floats(0.1, 50.0), st.floats(0.1, 50.0))


@given(game_inputs)
def test_best_responses_are_nondecreasing(args):
    scheme, pcs, pcr, ps_max, pr_max = args
    s = GameSpec.for_scheme(scheme, PowerCost(3.0, 1.0, 1.0, pcs, pcr), PowerLimits(ps_max, pr_max))
    b_s = [br_sources(s, x) for x in np.linspace(0, pr_max, 25)]
    b_r = [br_relay(s, x) for x in np.linspace(0, ps_max, 25)]
    assert np.all(np.diff(b_s) >= -1e-12) and np.all(np.diff(b_r) >= -1e-12)


@given(game_inputs, st.floats(0.0, 1.0), st.booleans())
def test_dynamics_move_monotonically(args, frac, relay_start):
    scheme, pcs, pcr, ps_max, pr_max = args
    s = GameSpec.for_scheme(scheme, PowerCost(3.0, 1.0, 1.0, pcs, pcr), PowerLimits(ps_max, pr_max))
    tr = brd(s, p_r_init=frac * pr_max) if relay_start else brd(s, p_s_init=frac * ps_max)
    for k in (0, 1):
        d = np.diff([x[k] for x in tr.sequence])
        assert np.all(d <= 1e-9) or np.all(d >= -1e-9)
    assert is_nash(s, tr.profile, tol=1e-6)
