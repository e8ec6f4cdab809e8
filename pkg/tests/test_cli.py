import csv
import py_compile

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwrc import cli


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def run(tmp_path, *argv):
    return cli.main([*argv[:1], "--out-dir", str(tmp_path), *argv[1:]])


def test_rates_sweep(tmp_path):
    assert run(tmp_path, "rates") == 0
    rows = read_rows(tmp_path / "rates.csv")
    assert list(rows[0]) == list(cli.COLUMNS)
    assert len(rows) == 101 * 5
    table = {(float(r["snr_db"]), r["scheme"]): float(r["sum_rate_bps_hz"]) for r in rows}
    assert table[(10.0, "DF")] == pytest.approx(4.95420, abs=1e-5)
    for x in {k[0] for k in table}:
        assert table[(x, "NNC")] >= table[(x, "AfSnd")] >= table[(x, "AfIan")]
        assert all(table[(x, "OuterBound")] >= table[(x, s)] - 1e-12
                   for s in ("NNC", "AfSnd", "AfIan", "DF"))
    py_compile.compile(str(tmp_path / "rates_plot.py"), doraise=True)


def test_metadata_header(tmp_path):
    run(tmp_path, "rates", "--snr-step", "10")
    head = [ln for ln in (tmp_path / "rates.csv").read_text().splitlines() if ln.startswith("#")]
    assert any("P_S = P_R = SNR * N" in ln for ln in head)
    assert any("config.snr_step: 10.0" in ln for ln in head)


def test_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["gee-coop", "--out-dir", str(a), "--snr-stop", "4", "--snr-step", "2", "--jobs", "1"]) == 0
    assert cli.main(["gee-coop", "--out-dir", str(b), "--snr-stop", "4", "--snr-step", "2", "--jobs", "3"]) == 0
    strip = lambda p: [ln for ln in p.read_text().splitlines() if not ln.startswith("# config.")]  # noqa: E731
    assert strip(a / "gee_coop.csv") == strip(b / "gee_coop.csv")


def test_gee_coop_claims(tmp_path):
    assert run(tmp_path, "gee-coop", "--snr-start", "5", "--snr-stop", "30", "--snr-step", "5") == 0
    rows = read_rows(tmp_path / "gee_coop.csv")
    by = {}
    for r in rows:
        by.setdefault((r["scheme"], r["solver"]), []).append(float(r["gee"]))
    for vals in by.values():
        assert max(vals) - min(vals) <= 1e-6
    for s in ("NNC", "AfSnd", "AfIan"):
        for a, m in zip(by[(s, "alternating")], by[(s, "monotonic")]):
            assert a == pytest.approx(m, rel=1e-4)
    df = by[("DF", "dinkelbach")]
    for s in ("NNC", "AfSnd", "AfIan"):
        assert all(d > v for d, v in zip(df, by[(s, "alternating")]))


def test_game_sweep(tmp_path):
    assert run(tmp_path, "game", "--snr-start", "10", "--snr-stop", "10", "--inits", "0,0.01,1") == 0
    rows = read_rows(tmp_path / "game.csv")
    gee = {(r["scheme"], r["solver"]): float(r["gee"]) for r in rows}
    for s in ("NNC", "AfSnd", "AfIan", "DF"):
        assert gee[(s, "brd_init_0")] == 0.0
    gap = lambda s: 1 - gee[(s, "brd_init_1")] / gee[(s, "cooperative")]  # noqa: E731
    assert gap("DF") < 0.1 * min(gap(s) for s in ("NNC", "AfSnd", "AfIan"))
    assert gee[("DF", "brd_init_0.01")] != pytest.approx(gee[("DF", "brd_init_1")], rel=1e-6)
    assert gee[("NNC", "brd_init_0.01")] == pytest.approx(gee[("NNC", "brd_init_1")], rel=1e-6)


def test_b2b_sweep(tmp_path):
    assert run(tmp_path, "b2b", "--snr-start", "20", "--snr-stop", "20") == 0
    rows = read_rows(tmp_path / "b2b.csv")
    gee = {r["scheme"]: float(r["gee"]) for r in rows}
    assert set(gee) == {"OuterBound", "NNC", "AfSnd", "AfIan", "DF", "NNC-pessimistic"}
    assert max(gee, key=lambda s: gee[s] if s != "OuterBound" else 0) == "AfSnd"
    assert 1e9 < gee["AfSnd"] < 1e11  # bit/J


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nsnr_start = 0\nsnr-stop = 10\nsnr_step = 5\nschemes = DF\n")
    assert run(tmp_path, "rates", "--config", str(cfg), "--snr-stop", "5") == 0
    rows = read_rows(tmp_path / "rates.csv")
    assert [(r["snr_db"], r["scheme"]) for r in rows] == [("0", "DF"), ("5", "DF")]


@pytest.mark.parametrize("argv", [
    ["rates", "--snr-step", "0"],
    ["rates", "--snr-start", "5", "--snr-stop", "0"],
    ["rates", "--schemes", "CF"],
    ["rates", "--noise", "-1"],
    ["rates", "--jobs", "0"],
    ["game", "--inits", "2"],
    ["gee-coop", "--phi", "1"],
    ["rates", "--bogus"],
    ["verify", "--check", "nope"],
])
def test_config_errors_exit_2(tmp_path, argv):
    assert run(tmp_path, *argv) == 2


def test_bad_config_file_exit_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    for text in ("unknown_key = 1\n", "snr_step = abc\n", "no equals sign\n"):
        cfg.write_text(text)
        assert run(tmp_path, "rates", "--config", str(cfg)) == 2
    assert run(tmp_path, "rates", "--config", str(tmp_path / "missing.cfg")) == 2


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    assert cli.main(["rates", "--snr-step", "25"]) == 0
    assert (tmp_path / "env" / "rates.csv").exists()


def test_verify_exit_codes(capsys):
    assert cli.main(["verify", "--check", "theorem2_gaps", "--check", "af_ian_gap"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert cli.main(["verify", "--check", "df_nnc_crossing"]) == 1
    assert "FAIL" in capsys.readouterr().out


@settings(max_examples=20)
@given(st.floats(-20, 40), st.floats(0.0, 10.0), st.floats(0.1, 5.0))
def test_snr_grid(start, span, step):
    grid = cli.snr_grid(start, start + span, step)
    assert grid[0] == pytest.approx(start)
    assert grid[-1] <= start + span + 1e-9
    assert len(grid) == int(span / step + 1e-9) + 1
