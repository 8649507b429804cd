import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twostage.cli import run_cli
from twostage.config import ConfigError, ScenarioConfig, format_config, parse_config, parse_grid
from twostage.results import CSV_HEADER, SeRecord, ci95_half_width, read_results, write_results
from twostage.scenario import Method, run_se_vs_snr


def test_empty_config_gives_defaults():
    cfg = parse_config("")
    assert cfg == ScenarioConfig()
    assert (cfg.N_t, cfg.N_r, cfg.N_c, cfg.N_s, cfg.S, cfg.L) == (64, 16, 4, 3, 512, 6)
    assert (cfg.f_c_GHz, cfg.P_t_dBm, cfg.speed_mps, cfg.N_cl, cfg.t_p) == (28.0, 30.0, 5.0, 3, 16)


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\nN_t = 32  # fewer antennas\n")
    assert cfg.N_t == 32


def test_invariant_error_names_line():
    with pytest.raises(ConfigError) as err:
        parse_config("speed_mps = 4\nN_c = 20\n")
    assert "N_s ≤ N_c ≤ N_r" in str(err.value)
    assert err.value.line == 2


def test_unknown_key_names_line():
    with pytest.raises(ConfigError) as err:
        parse_config("N_t = 8\nantennas = 4\n")
    assert err.value.line == 2 and "antennas" in str(err.value)


def test_unparsable_value_names_line():
    with pytest.raises(ConfigError) as err:
        parse_config("N_t = eight\n")
    assert err.value.line == 1


def test_config_file_path(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("trials = 12\nsnr_grid_dB = -5:5:5\n")
    cfg = parse_config(path)
    assert cfg.trials == 12 and cfg.snr_grid_dB == (-5.0, 0.0, 5.0)


def test_overrides_apply_after_text():
    assert parse_config("seed = 1", {"seed": 9}).seed == 9
    with pytest.raises(ConfigError):
        parse_config(None, {"nope": 1})


def test_grid_parsing():
    assert parse_grid("-10:20:5") == (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    assert parse_grid("1, 2.5") == (1.0, 2.5)
    with pytest.raises(ValueError):
        parse_grid("0:10:0")


def test_speed_roundtrips_through_echo():
    cfg = parse_config("speed_mps = 5")
    assert parse_config(format_config(cfg)) == cfg


@settings(max_examples=50, deadline=None)
@given(
    st.integers(2, 64),
    st.floats(-50, 50, allow_nan=False),
    st.floats(0.1, 30),
    st.integers(0, 2**64 - 1),
    st.lists(st.floats(-40, 40, allow_nan=False), min_size=1, max_size=5),
)
def test_echo_roundtrip_is_exact(N_t, p_t, speed, seed, grid):
    cfg = ScenarioConfig(N_t=N_t, N_s=2, P_t_dBm=p_t, speed_mps=speed, seed=seed, snr_grid_dB=tuple(grid))
    assert parse_config(format_config(cfg)) == cfg


def test_echo_lists_every_field():
    text = format_config(ScenarioConfig())
    keys = [line.split(" = ")[0] for line in text.splitlines()]
    assert keys == [f.name for f in dataclasses.fields(ScenarioConfig)]


def record(exp="se_vs_snr", sweep=0.0, method="ideal_dbf", mean=1.0, ci=0.1):
    return SeRecord(exp, sweep, method, mean, 10, ci)


def test_single_record_file(tmp_path):
    path = tmp_path / "r.csv"
    write_results([record()], path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 2


def test_rows_are_sorted_regardless_of_input_order(tmp_path):
    recs = [record(sweep=s, method=m) for s in (5.0, -5.0, 0.0) for m in ("hbf_proxy", "ideal_dbf")]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_results(recs, a)
    write_results(recs[::-1], b)
    assert a.read_bytes() == b.read_bytes()
    keys = [(r.experiment, r.sweep_value, r.method) for r in read_results(a)]
    assert keys == sorted(keys)


def test_nine_significant_digits(tmp_path):
    path = tmp_path / "r.csv"
    write_results([record(mean=1 / 3, ci=2 / 3)], path)
    row = path.read_text().splitlines()[1].split(",")
    assert row[3] == "0.333333333" and row[5] == "0.666666667"


def test_empty_records_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_results([], tmp_path / "r.csv")


def test_ci_column_recomputes_from_trial_data():
    cfg = ScenarioConfig(N_t=8, N_r=4, N_c=2, N_s=1, S=8, L=2, blocks_per_window=2, trials=8, snr_grid_dB=(0.0, 10.0))
    res = run_se_vs_snr(cfg)
    for p in range(2):
        for j, m in enumerate(res.methods):
            rec = res.records[p * len(res.methods) + j]
            values = res.trial_values[(p, m)]
            expected = 1.96 * np.std(values, ddof=1) / np.sqrt(values.size)
            assert rec.ci95_half_width == pytest.approx(expected, rel=1e-12)
            if m is Method.IDEAL_DBF:
                assert values.size == cfg.trials
    assert ci95_half_width([1.0]) == 0.0


SMALL_CFG = "N_t = 8\nN_r = 4\nN_c = 2\nN_s = 1\nS = 8\nL = 2\nblocks_per_window = 2\ntime_points = 2\n"


def test_cli_writes_results_and_manifest(tmp_path):
    cfg_path = tmp_path / "small.cfg"
    cfg_path.write_text(SMALL_CFG)
    out = tmp_path / "out"
    code = run_cli(["se-vs-time", "--config", str(cfg_path), "--trials", "3", "--seed", "4", "--out", str(out)])
    assert code == 0
    rows = read_results(out / "results.csv")
    assert {r.method for r in rows} == {m.value for m in Method}
    manifest = (out / "manifest.txt").read_text()
    assert "# seed = 4" in manifest
    # the manifest alone reproduces the run
    again = tmp_path / "again"
    assert run_cli(["se-vs-time", "--config", str(out / "manifest.txt"), "--out", str(again)]) == 0
    assert (again / "results.csv").read_bytes() == (out / "results.csv").read_bytes()


def test_cli_negative_snr_grid(tmp_path):
    cfg_path = tmp_path / "small.cfg"
    cfg_path.write_text(SMALL_CFG)
    out = tmp_path / "out"
    code = run_cli(["se-vs-snr", "--config", str(cfg_path), "--trials", "2", "--snr-grid", "-10:0:10", "--out", str(out)])
    assert code == 0
    assert sorted({r.sweep_value for r in read_results(out / "results.csv")}) == [-10.0, 0.0]


def test_cli_defaults_are_recorded(tmp_path, monkeypatch):
    from twostage import cli

    captured = {}

    def fake_runner(cfg):
        captured["cfg"] = cfg
        return run_se_vs_snr(parse_config(SMALL_CFG, {"trials": 2, "snr_grid_dB": (0.0,)}))

    monkeypatch.setitem(cli._RUNNERS, "se-vs-snr", fake_runner)
    assert run_cli(["se-vs-snr", "--out", str(tmp_path)]) == 0
    assert captured["cfg"] == ScenarioConfig()
    assert "# config_source = defaults" in (tmp_path / "manifest.txt").read_text()


@pytest.mark.parametrize(
    "argv",
    [["nonsense"], ["se-vs-time", "--config", "/no/such/file"], ["se-vs-snr", "--trials", "0"],
     ["se-vs-snr", "--snr-grid", "5:1:1"]],
)
def test_cli_errors_return_nonzero(argv, capsys):
    assert run_cli(argv) != 0
    assert "error" in capsys.readouterr().err


def test_cli_unwritable_out_dir(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg_path = tmp_path / "small.cfg"
    cfg_path.write_text(SMALL_CFG)
    assert run_cli(["se-vs-snr", "--config", str(cfg_path), "--out", str(blocker / "sub")]) != 0


def test_selftest_passes(capsys):
    assert run_cli(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 4
