import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mwrc import rates
from mwrc.core import DegenerateRegion, PowerLimits, Scheme, SymmetricChannel
from mwrc.gee import PowerCost, gee_value, PowerProfile
from mwrc.oracle import (
    RateRegion,
    af_snd_region,
    df_region,
    grid_search_gee,
    lp_max_sum_rate,
    nnc_q0_sweep,
    nnc_region,
    outer_bound_region,
)

CH10 = SymmetricChannel(10.0, 10.0)


def test_pair_constraints():
    reg = RateRegion()
    for pair in ((0, 1), (1, 2), (0, 2)):
        reg.add(pair, 2.0)
    assert lp_max_sum_rate(reg) == pytest.approx(3.0)


def test_box():
    reg = RateRegion()
    for k in range(3):
        reg.add((k,), 0.7)
    assert lp_max_sum_rate(reg) == pytest.approx(2.1)


def test_af_snd_region_value():
    assert lp_max_sum_rate(af_snd_region(CH10)) == pytest.approx(3.833006, abs=1e-6)


def test_unbounded_region_is_rejected():
    with pytest.raises(DegenerateRegion):
        lp_max_sum_rate(RateRegion().add((0, 1), 1.0))
    with pytest.raises(DegenerateRegion):
        lp_max_sum_rate(RateRegion())


def test_region_contains():
    reg = outer_bound_region(CH10)
    assert reg.contains([1.0, 1.0, 1.0])
    assert not reg.contains([4.0, 4.0, 0.0])
    assert not reg.contains([-1.0, 0.0, 0.0])


def test_grid_of_two_is_corner_search():
    cost = PowerCost()
    lim = PowerLimits(3.0, 5.0)
    prof, val = grid_search_gee(Scheme.NNC, cost, lim, 2)
    corners = [(0, 0), (0, 5), (3, 0), (3, 5)]
    vals = [gee_value(Scheme.NNC, PowerProfile(*c), cost) for c in corners]
    assert val == pytest.approx(max(vals))
    assert (prof.p_s, prof.p_r) == corners[int(np.argmax(vals))]


def test_q0_sweep_finds_closed_form():
    q, r = nnc_q0_sweep(CH10)
    assert q == pytest.approx(2.1, rel=1e-3)
    assert r == pytest.approx(rates.nnc_rate(CH10).value, abs=1e-6)


def test_q0_extremes_kill_the_rate():
    assert lp_max_sum_rate(nnc_region(CH10, 1e12)) < 1e-9
    assert lp_max_sum_rate(nnc_region(CH10, 1e-12)) == 0.0


channels = st.builds(SymmetricChannel, st.floats(1e-2, 1e3), st.floats(1e-2, 1e3),
                     st.floats(0.1, 10.0), st.floats(0.1, 10.0))


@given(channels)
def test_lp_matches_closed_forms(ch):
    assert lp_max_sum_rate(outer_bound_region(ch)) == pytest.approx(rates.outer_bound(ch).value, abs=1e-9)
    assert lp_max_sum_rate(df_region(ch)) == pytest.approx(rates.df_rate(ch).value, abs=1e-9)
    assert lp_max_sum_rate(af_snd_region(ch)) == pytest.approx(rates.af_snd_rate(ch).value, abs=1e-9)
    nnc = rates.nnc_rate(ch)
    assert lp_max_sum_rate(nnc_region(ch, nnc.q0_opt)) == pytest.approx(nnc.value, abs=1e-9)


@given(st.sampled_from([Scheme.NNC, Scheme.AF_SND, Scheme.AF_IAN, Scheme.DF]), st.floats(0.2, 20.0),
       st.floats(0.2, 3.0))
def test_grid_never_beats_solvers(scheme, p_max, p_c):
    from mwrc.verify import cooperative_gee

    cost = PowerCost(3.0, 1.0, p_c)
    lim = PowerLimits.symmetric(p_max)
    _, grid = grid_search_gee(scheme, cost, lim, 201)
    assert grid <= cooperative_gee(scheme, cost, lim)[0] + 1e-12
