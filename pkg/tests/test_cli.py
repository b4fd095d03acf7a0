"""Config parsing, dispatch, CSV emission, and exit-code mapping."""

import os
import subprocess
import sys

import pytest

from semiweyl import cli
from semiweyl.errors import ConfigError, NumericalError

# cheap configs: enough rows to be meaningful, nothing slower than a second
CHEAP = {
    "trace_formula": "h_min = 0.1\nh_count = 6\n",
    "weyl_law": "h_min = 0.01\nh_count = 6\n",
    "funcalc_check": "modes = 10\nquadrature_nodes = 60\nextension_order = 4\n",
    "moyal_check": "k_max = 0\nh_count = 6\n",
    "extension_check": "shell_count = 4\n",
    "class_check": "j_max = 2\nh_count = 6\n",
}


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# ---------------------------------------------------------------------------
# parsing


def test_partial_config_fills_defaults():
    cfg = cli.parse_config("experiment = weyl_law\nE = 1.0\ndelta = 0.25")
    assert cfg.experiment == "weyl_law"
    assert cfg.potential == "free_torus_1d"
    assert (cfg.h_max, cfg.h_min, cfg.h_count) == (0.2, 0.001, 8)
    assert cfg.modes is None  # funcalc keys stay unset for other experiments


def test_comments_and_blank_lines_are_ignored():
    cfg = cli.parse_config(
        "# full-line comment\n\nexperiment = weyl_law\nE = 2.0  # inline\n")
    assert cfg.E == 2.0


def test_out_of_range_delta_names_line_and_key():
    with pytest.raises(ConfigError, match=r"line 2: key 'delta'.*\[0, 1/2\)"):
        cli.parse_config("experiment = weyl_law\ndelta = 0.6")


def test_empty_document_requires_experiment():
    with pytest.raises(ConfigError, match="experiment key required"):
        cli.parse_config("")


def test_unknown_key_names_line_and_key():
    with pytest.raises(ConfigError, match="line 2: unknown key 'wibble'"):
        cli.parse_config("experiment = weyl_law\nwibble = 3")


def test_key_from_another_experiment_is_rejected():
    with pytest.raises(ConfigError, match="'c' is not used by experiment"):
        cli.parse_config("experiment = weyl_law\nc = 1.5")


def test_malformed_number_names_line_and_key():
    with pytest.raises(ConfigError, match="line 2: key 'E': malformed"):
        cli.parse_config("experiment = weyl_law\nE = banana")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate key 'E'"):
        cli.parse_config("experiment = weyl_law\nE = 1.0\nE = 2.0")


def test_line_without_assignment_rejected():
    with pytest.raises(ConfigError, match="line 2: expected 'key = value'"):
        cli.parse_config("experiment = weyl_law\njust some words")


def test_command_experiment_must_match_config():
    with pytest.raises(ConfigError, match="asked for 'weyl_law'"):
        cli.parse_config("experiment = moyal_check",
                         default_experiment="weyl_law")


def test_custom_coefficients():
    cfg = cli.parse_config(
        "experiment = trace_formula\ncoeff_1 = 0.25\ncoeff_-1 = 0.25")
    assert cfg.potential == "custom"
    assert cfg.dimension == 1
    assert cfg.coeffs == (((-1,), 0.25 + 0j), ((1,), 0.25 + 0j))
    with pytest.raises(ConfigError, match="not both"):
        cli.parse_config("experiment = weyl_law\npotential = half_cos_1d\n"
                         "coeff_1 = 0.25\ncoeff_-1 = 0.25")
    with pytest.raises(ConfigError, match="mode has 1 indices"):
        cli.parse_config("experiment = weyl_law\ndimension = 2\ncoeff_1 = 0.5")
    with pytest.raises(ConfigError, match="only used with coeff"):
        cli.parse_config("experiment = weyl_law\ndimension = 2")


def test_echo_round_trips():
    for text in ("experiment = weyl_law\nE = 1.0\ndelta = 0.25",
                 "experiment = trace_formula\ncoeff_2 = 0.1\ncoeff_-2 = 0.1",
                 "experiment = funcalc_check\nweighting = jet\nseed = 9"):
        cfg = cli.parse_config(text)
        assert cli.parse_config(cli.config_echo(cfg)) == cfg


# ---------------------------------------------------------------------------
# running


@pytest.mark.parametrize("experiment", sorted(cli.EXPERIMENTS))
def test_each_experiment_writes_schema_and_meta(experiment, tmp_path):
    cfg_path = _write(tmp_path, "run.cfg",
                      "experiment = %s\n%s" % (experiment, CHEAP[experiment]))
    out = str(tmp_path / "out")
    assert cli.main([experiment, "--config", cfg_path, "--out", out]) == 0
    lines = open(os.path.join(out, experiment + ".csv")).read().splitlines()
    assert lines[0] == cli.SCHEMAS[experiment]
    assert len(lines) >= 2
    width = len(lines[0].split(","))
    assert all(len(row.split(",")) == width for row in lines[1:])
    meta = open(os.path.join(out, "meta")).read()
    echoed = cli.parse_config(meta)
    assert echoed.experiment == experiment
    assert echoed.out == out
    assert "# versions: semiweyl" in meta


def test_cells_carry_seventeen_significant_digits(tmp_path):
    cfg_path = _write(tmp_path, "w.cfg",
                      "experiment = weyl_law\n" + CHEAP["weyl_law"])
    out = str(tmp_path / "out")
    assert cli.main(["weyl_law", "--config", cfg_path, "--out", out]) == 0
    first = open(os.path.join(out, "weyl_law.csv")).read().splitlines()[1]
    assert first.split(",")[0] == format(0.2, ".17g")


def test_rerun_is_byte_identical(tmp_path):
    cfg_path = _write(tmp_path, "w.cfg",
                      "experiment = weyl_law\n" + CHEAP["weyl_law"])
    outs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        assert cli.main(["weyl_law", "--config", cfg_path, "--out", out]) == 0
        outs.append(open(os.path.join(out, "weyl_law.csv"), "rb").read())
    assert outs[0] == outs[1]


def test_seeded_sampling_is_byte_identical(tmp_path):
    # 2-d potential routes the shell volume through Monte Carlo when seeded
    cfg_path = _write(tmp_path, "w2.cfg",
                      "experiment = weyl_law\npotential = half_cos_2d\n"
                      "E = 0.3\nh_max = 0.5\nh_min = 0.25\nh_count = 6\n")
    outs = []
    for name in ("a", "b"):
        out = str(tmp_path / name)
        assert cli.main(["weyl_law", "--config", cfg_path, "--out", out,
                         "--seed", "7"]) == 0
        outs.append(open(os.path.join(out, "weyl_law.csv"), "rb").read())
    assert outs[0] == outs[1]
    assert "seed = 7" in open(os.path.join(out, "meta")).read()


def test_disjoint_window_emits_all_zero_rows(tmp_path):
    cfg_path = _write(tmp_path, "t.cfg",
                      "experiment = trace_formula\nE = -3.0\nc = 0.5\n"
                      + CHEAP["trace_formula"])
    out = str(tmp_path / "out")
    assert cli.main(["trace_formula", "--config", cfg_path, "--out", out]) == 0
    rows = open(os.path.join(out, "trace_formula.csv")).read().splitlines()[1:]
    for row in rows:
        _, lhs, rhs, rem, vol, _ = row.split(",")
        assert lhs == rhs == rem == vol == "0"


# ---------------------------------------------------------------------------
# exit codes


def test_config_error_exits_2(tmp_path, capsys):
    cfg_path = _write(tmp_path, "bad.cfg", "experiment = weyl_law\ndelta = 0.6")
    assert cli.main(["weyl_law", "--config", cfg_path]) == 2
    assert "error: config:" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path):
    assert cli.main(["weyl_law", "--config",
                     str(tmp_path / "nope.cfg")]) == 2


def test_resolution_error_exits_4(tmp_path, capsys):
    # localizer momentum box wider than the dual grid of the mode cutoff
    cfg_path = _write(tmp_path, "r.cfg",
                      "experiment = trace_formula\n"
                      "b_momentum_support = -5, 5\n" + CHEAP["trace_formula"])
    assert cli.main(["trace_formula", "--config", cfg_path,
                     "--out", str(tmp_path)]) == 4
    assert "error: resolution:" in capsys.readouterr().err


def test_numerical_error_exits_3(tmp_path, capsys, monkeypatch):
    def boom(cfg):
        raise NumericalError("synthetic failure")

    monkeypatch.setitem(cli._RUNNERS, "weyl_law", boom)
    cfg_path = _write(tmp_path, "w.cfg", "experiment = weyl_law\n")
    assert cli.main(["weyl_law", "--config", cfg_path,
                     "--out", str(tmp_path)]) == 3
    assert "error: numerical: synthetic failure" in capsys.readouterr().err


def test_threads_flag_pins_blas_pools(tmp_path, monkeypatch):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        monkeypatch.delenv(var, raising=False)
    cfg_path = _write(tmp_path, "e.cfg",
                      "experiment = extension_check\nshell_count = 4\n")
    assert cli.main(["extension_check", "--config", cfg_path, "--out",
                     str(tmp_path / "out"), "--threads", "2"]) == 0
    assert os.environ["OMP_NUM_THREADS"] == "2"
    assert os.environ["OPENBLAS_NUM_THREADS"] == "2"


def test_console_script_end_to_end(tmp_path):
    cfg_path = _write(tmp_path, "e.cfg",
                      "experiment = extension_check\nshell_count = 4\n")
    out = str(tmp_path / "out")
    proc = subprocess.run(
        [sys.executable, "-m", "semiweyl.cli", "extension_check",
         "--config", cfg_path, "--out", out],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert os.path.exists(os.path.join(out, "extension_check.csv"))
    bad = subprocess.run(
        [sys.executable, "-m", "semiweyl.cli", "no_such_experiment",
         "--config", cfg_path], capture_output=True, text=True)
    assert bad.returncode == 2
