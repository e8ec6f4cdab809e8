"""One test per acceptance criterion; each prints a PASS/FAIL line."""
import pytest

from mwrc import verify


@pytest.fixture
def report(capsys):
    def show(res):
        with capsys.disabled():
            print("\n" + res.line())
        return res

    return show


def test_01_df_capacity_threshold(report):
    assert report(verify.check_theorem1_threshold()).passed


def test_02_df_nnc_crossing(report):
    assert report(verify.check_df_nnc_crossing()).passed


def test_03_high_snr_gaps_nnc_af_snd(report):
    assert report(verify.check_theorem2_gaps()).passed


def test_04_high_snr_gap_af_ian(report):
    assert report(verify.check_af_ian_gap()).passed


def test_05_degrees_of_freedom(report):
    assert report(verify.check_dof()).passed


def test_05b_degrees_of_freedom_slope(report):
    assert report(verify.check_dof_slope()).passed


def test_06_rate_orderings(report):
    assert report(verify.check_rate_orderings()).passed


def test_07_oracle_equivalence(report):
    assert report(verify.check_oracle_equivalence()).passed


@pytest.mark.slow
def test_08_solver_agreement(report):
    assert report(verify.check_solver_agreement()).passed


def test_09_dinkelbach_analytic(report):
    assert report(verify.check_dinkelbach_analytic()).passed


def test_10_game_suite(report):
    assert report(verify.check_game_suite()).passed


def test_11a_gee_saturation_and_df_lead(report):
    assert report(verify.check_gee_saturation()).passed


def test_11b_competitive_gap(report):
    assert report(verify.check_competitive_gap()).passed


@pytest.mark.slow
def test_11c_board_to_board_ranking(report):
    assert report(verify.check_b2b_ranking()).passed
