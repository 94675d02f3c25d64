"""Command-line interface: exit codes, output contract, determinism.

Most tests drive ``main`` in-process for speed; one test goes through the
installed console script to confirm the packaging entry point works.
"""

import math
import shutil
import subprocess

import pytest

from fedsysid.cli import main
from fedsysid.harness import read_records, write_records
from tests.test_harness import _planted_record

GOOD_CONFIG = """\
system = synthetic
alpha = 1e-3
M = 1, 2
N_i = 2
T = 3
rounds = 3
seeds = 0, 1
"""


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(GOOD_CONFIG)
    return str(path)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def test_validate_ok(config_path, capsys):
    assert main(["validate", config_path]) == 0
    out = capsys.readouterr().out
    assert out.startswith("ok: system=synthetic sweep=M=[1, 2] seeds=2 rounds=3 id=")


def test_validate_accepts_config_flag(config_path, capsys):
    assert main(["validate", "--config", config_path]) == 0
    assert capsys.readouterr().out.startswith("ok:")


def test_validate_rejects_conflicting_paths(config_path, capsys):
    code = main(["validate", config_path, "--config", "/elsewhere.cfg"])
    assert code == 2
    err = capsys.readouterr().err
    assert err.startswith("error: ConfigError:")
    assert err.count("\n") == 1


def test_validate_bad_config_value(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("system = synthetic\nalpha = 0\n")
    assert main(["validate", str(path)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error: ConfigError: alpha: must be > 0")


def test_validate_missing_file(capsys):
    assert main(["validate", "/no/such/place.cfg"]) == 2
    assert capsys.readouterr().err.startswith("error: ConfigError: cannot read config")


def test_missing_config_argument(capsys):
    assert main(["validate"]) == 2
    err = capsys.readouterr().err
    assert "a config file is required" in err


def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error: ConfigError: arguments:")
    assert err.count("\n") == 1


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def test_run_writes_csv_and_reports(config_path, tmp_path, capsys):
    out = tmp_path / "run.csv"
    assert main(["run", config_path, "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert f"wrote 12 records to {out}" in stdout
    assert len(read_records(str(out))) == 12


def test_run_reruns_and_thread_counts_are_byte_identical(config_path, tmp_path, capsys):
    paths = [tmp_path / name for name in ("a.csv", "b.csv", "c.csv")]
    assert main(["run", config_path, "--out", str(paths[0])]) == 0
    assert main(["run", config_path, "--out", str(paths[1])]) == 0
    assert main(["run", config_path, "--out", str(paths[2]), "--threads", "2"]) == 0
    capsys.readouterr()
    blobs = [p.read_bytes() for p in paths]
    assert blobs[0] == blobs[1] == blobs[2]


def test_run_seeds_override_changes_row_count(config_path, tmp_path, capsys):
    out = tmp_path / "seeded.csv"
    assert main(["run", config_path, "--out", str(out), "--seeds", "5"]) == 0
    capsys.readouterr()
    records = read_records(str(out))
    assert len(records) == 6  # 2 sweep values x 1 seed x 3 rounds
    assert {r.seed for r in records} == {5}


def test_run_rejects_bad_threads_and_seeds(config_path, capsys):
    assert main(["run", config_path, "--threads", "0"]) == 2
    assert capsys.readouterr().err.startswith("error: ConfigError: threads:")
    assert main(["run", config_path, "--seeds", "a,b"]) == 2
    assert capsys.readouterr().err.startswith("error: ConfigError: seeds:")


def test_run_runtime_failure_exits_one(tmp_path, capsys):
    # Absurd heterogeneity makes the pendulum simulation blow its state
    # bound: a runtime failure, not a config failure.
    path = tmp_path / "explode.cfg"
    path.write_text(
        "system = pendulum\nalpha = 1e-2\nM = 2\nN_i = 2\nT = 3\n"
        "epsilon = 1e9\nrounds = 2\nseeds = 0\n"
        f"output_path = {tmp_path / 'explode.csv'}\n"
    )
    assert main(["run", str(path)]) == 1
    assert capsys.readouterr().err.startswith("error: SimulationDiverged:")


# ---------------------------------------------------------------------------
# diagnose
# ---------------------------------------------------------------------------


def test_diagnose_prints_one_line_per_run(config_path, capsys):
    assert main(["diagnose", config_path, "--seeds", "0,1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4  # 2 sweep values x 2 seeds
    for line in lines:
        assert line.startswith("M=")
        for token in (
            "seed=", "s_phi=", "p_phi=", "lambda_min_client=",
            "lambda_min_pooled=", "pooled_threshold=", "gram_ok=",
            "sample_size_ok=", "bound_value=", "observed_error=",
        ):
            assert token in line, token


def test_diagnose_reports_degenerate_runs(tmp_path, capsys):
    # One trajectory of two steps cannot excite five features.
    path = tmp_path / "thin.cfg"
    path.write_text(
        "system = synthetic\nalpha = 1e-3\nM = 1\nN_i = 1\nT = 2\nseeds = 0\n"
    )
    assert main(["diagnose", str(path)]) == 0
    out = capsys.readouterr().out
    assert "degenerate:" in out


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------


def test_scaling_reports_planted_slope(tmp_path, capsys):
    records = []
    for m in (1, 4, 16):
        for seed in (0, 1):
            records.append(_planted_record(m, seed, 1, 999.0))
            records.append(_planted_record(m, seed, 2, 0.5 / math.sqrt(m)))
    csv_path = tmp_path / "scaling.csv"
    write_records(records, str(csv_path))
    assert main(["scaling", str(csv_path)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("slope=-0.5 r_squared=1")
    assert lines[1].startswith("M=1 ")
    assert lines[2].startswith("M=4 ")
    assert lines[3].startswith("M=16 ")


def test_scaling_insufficient_data_exits_one(tmp_path, capsys):
    records = [_planted_record(m, 0, 1, 0.5) for m in (1, 4)]
    csv_path = tmp_path / "thin.csv"
    write_records(records, str(csv_path))
    assert main(["scaling", str(csv_path)]) == 1
    assert capsys.readouterr().err.startswith("error: InsufficientData:")


def test_scaling_missing_file_exits_two(capsys):
    assert main(["scaling", "/no/such.csv"]) == 2
    assert capsys.readouterr().err.startswith("error: FileNotFoundError:")


# ---------------------------------------------------------------------------
# console script
# ---------------------------------------------------------------------------


def test_console_script_entry_point(config_path):
    exe = shutil.which("fedsysid")
    if exe is None:
        pytest.skip("console script not installed")
    proc = subprocess.run(
        [exe, "validate", config_path], capture_output=True, text=True, timeout=60
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("ok: system=synthetic")
