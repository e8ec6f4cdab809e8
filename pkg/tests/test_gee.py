import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mwrc import rates
from mwrc.core import Scheme, SymmetricChannel, UnsupportedScheme
from mwrc.gee import (
    Gee1Params,
    PowerCost,
    PowerProfile,
    gee1_numerator,
    gee1_params_for,
    gee2_numerator,
    gee2_params_for,
    gee_value,
    utilities,
)

COST = PowerCost(3.0, 1.0, 1.0, 0.75, 0.25)


def test_min_form_table():
    assert gee1_params_for(Scheme.DF) == Gee1Params(1.5, 1.0, 1.0, 3.0)
    assert gee1_params_for(Scheme.OUTER_BOUND) == Gee1Params(1.5, 1.0, 3.0, 1.0)
    with pytest.raises(UnsupportedScheme):
        gee1_params_for(Scheme.NNC)


def test_min_form_numerator_matches_rates():
    ch = SymmetricChannel(10.0, 10.0)
    assert gee1_numerator(gee1_params_for("DF"), 10, 10) == pytest.approx(rates.df_rate(ch).value)
    assert gee1_numerator(gee1_params_for("OuterBound"), 10, 10) == pytest.approx(
        rates.outer_bound(ch).value)


def test_product_form_table():
    nnc = gee2_params_for(Scheme.NNC)
    assert (nnc.alpha, nnc.a, nnc.b, nnc.c) == (1.5, 1.0, 0.5, 0.5)
    assert nnc.d() == pytest.approx(1.0)
    snd = gee2_params_for(Scheme.AF_SND)
    assert (snd.alpha, snd.a, snd.b, snd.c) == (1.5, 1.5, 0.5, 0.5)
    assert snd.d() == pytest.approx(2 / 3)
    assert gee2_params_for(Scheme.AF_IAN).d() == pytest.approx(1.0)
    with pytest.raises(UnsupportedScheme):
        gee2_params_for(Scheme.DF)


def test_product_form_matches_rates_on_random_channels():
    rng = np.random.default_rng(0)
    for _ in range(100):
        ps, pr, ns, nr = 10 ** rng.uniform(-2, 2, 4)
        ch = SymmetricChannel(ps, pr, ns, nr)
        for s in (Scheme.NNC, Scheme.AF_SND, Scheme.AF_IAN):
            got = gee2_numerator(gee2_params_for(s, ns, nr), ps, pr)
            assert got == pytest.approx(rates.sum_rate(s, ch).value, rel=1e-12, abs=1e-15)


def test_gee_value_examples():
    assert gee_value("DF", PowerProfile(10, 10), COST) == pytest.approx(0.120834, abs=1e-6)
    # 4.346329 / 41; the tabulated 0.106005 inherits the rounding of the NNC rate
    assert gee_value("NNC", PowerProfile(10, 10), COST) == pytest.approx(0.106008, abs=1e-6)
    for s in Scheme:
        assert gee_value(s, PowerProfile(0, 0), COST) == 0.0


def test_utilities_examples():
    u_s, u_r = utilities("DF", PowerProfile(10, 10), COST)
    assert u_s == pytest.approx(0.46086, abs=1e-5)
    assert u_r == pytest.approx(0.48334, abs=1e-5)
    for s in (Scheme.NNC, Scheme.AF_SND, Scheme.AF_IAN):
        assert utilities(s, PowerProfile(0, 3.0), COST) == (0.0, 0.0)


def test_cost_validation():
    with pytest.raises(ValueError):
        PowerCost(phi=2.0)
    with pytest.raises(ValueError):
        PowerCost(psi=0.5)
    with pytest.raises(ValueError):
        PowerCost(p_c=0.0)
    with pytest.raises(ValueError):
        PowerProfile(-1.0, 0.0)


@given(st.floats(0.01, 5.0), st.floats(0.1, 10.0))
def test_numerator_does_not_depend_on_circuit_power(p_c_s, p_r):
    grid = np.linspace(0, 10, 101)
    a = [utilities("NNC", PowerProfile(x, p_r), PowerCost(p_c_s=p_c_s))[0] * (x + p_c_s) for x in grid]
    b = [utilities("NNC", PowerProfile(x, p_r), PowerCost(p_c_s=1.0))[0] * (x + 1.0) for x in grid]
    assert np.argmax(a) == np.argmax(b)
