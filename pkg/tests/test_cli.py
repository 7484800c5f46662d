import json

import pytest

from app import build_parser, main
from config import RunConfig
from utils.errors import ConfigError


def test_g_table(capsys):
    assert main(["g", "--t", "0,1"]) == 0
    out = capsys.readouterr().out
    assert "minus_2g" in out


def test_g_csv_rows(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["--t", "0.5,1,2", "--format", "csv", "--out", str(out), "g"]) == 0
    lines = out.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "t,g,g_prime,minus_2g"
    assert len(lines) == 4


def test_g_json(capsys):
    assert main(["--t", "0", "--format", "json", "g"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema"] == 1
    assert "generated" in payload
    assert payload["rows"][0]["g"] == 0.0
    assert payload["rows"][0]["g_prime"] is None


def test_locate_zeros_writes_file(tmp_path):
    out = tmp_path / "z.txt"
    assert main(["--out", str(out), "locate-zeros", "15"]) == 0
    values = [line for line in out.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]
    assert len(values) == 1
    assert float(values[0]) == pytest.approx(14.134725, abs=1e-6)


def test_locate_zeros_empty(tmp_path):
    out = tmp_path / "empty.txt"
    assert main(["--out", str(out), "locate-zeros", "0"]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines and all(line.startswith("#") for line in lines)


def test_locate_zeros_unwritable_path():
    assert main(["--out", "/nonexistent-dir/z.txt", "locate-zeros", "15"]) == 3


def test_unknown_check_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["verify", "everything"])
    assert info.value.code == 2


def test_bad_tolerance_is_config_error():
    assert main(["--tol", "0.5", "g"]) == 2


def test_missing_zero_table_is_config_error(tmp_path):
    assert main(["--zeros", str(tmp_path / "missing.txt"), "sample", "1.0"]) == 2


def test_unparseable_zero_table_is_io_error(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("14.134725142\nnot-a-number\n", encoding="utf-8")
    assert main(["--zeros", str(bad), "sample", "1.0"]) == 3


def test_sample_rows_and_exclusion(tmp_path):
    out = tmp_path / "s.json"
    assert main(["--format", "json", "--out", str(out), "sample", "1.0",
                 "--z", "1,2,3,4,5,6,7,8,9,14.134725142"]) == 0
    rows = json.loads(out.read_text(encoding="utf-8"))["rows"]
    assert len(rows) == 10
    assert rows[-1]["excluded"] and rows[-1]["re"] is None
    assert not rows[0]["excluded"]


def test_sample_at_t_zero(tmp_path):
    out = tmp_path / "s0.csv"
    assert main(["--format", "csv", "--out", str(out), "sample", "0", "--z", "1:10:10"]) == 0
    lines = out.read_text(encoding="utf-8").strip().splitlines()[1:]
    assert len(lines) == 10
    assert all(float(line.split(",")[3]) == 0.0 for line in lines)


def test_verify_theta_passes(capsys):
    assert main(["verify", "theta"]) == 0
    out = capsys.readouterr().out
    assert "✓ theta" in out


def test_run_config_validation():
    RunConfig(t_values=[1.0, 5.0]).validate()
    with pytest.raises(ConfigError):
        RunConfig(t_values=[25.0]).validate()
    with pytest.raises(ConfigError):
        RunConfig(output_format="xml").validate()
    with pytest.raises(ConfigError):
        RunConfig(threads=0).validate()


def test_options_after_subcommand(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["g", "--t", "0.5,1", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "t,g,g_prime,minus_2g"
    assert len(lines) == 3


def test_subcommand_does_not_reset_global_options():
    args = build_parser().parse_args(["--format", "csv", "--threads", "3", "g"])
    assert args.format == "csv"
    assert args.threads == 3
    assert args.t is None
    args = build_parser().parse_args(["--format", "csv", "g", "--threads", "2"])
    assert args.format == "csv"
    assert args.threads == 2


@pytest.mark.parametrize("alias, name", [
    ("eq401", "zero-limit"),
    ("eq402", "special-value"),
    ("prop21", "expansion"),
    ("eq302", "zero-sum"),
    ("norm", "norm"),
    ("thm14", "norm-identity"),
    ("cor16", "weil-identity"),
    ("all", "all"),
])
def test_verify_accepts_equation_aliases(alias, name):
    assert build_parser().parse_args(["verify", alias]).which == name
