import io

import numpy as np
import pytest

from crpower.allocation import AvgTxAvgInt, ImperfectBoth, PeakTxAvgInt, PerfectBoth
from crpower.cli import (
    DEFAULTS,
    SWEEP_HEADER,
    build_problem,
    cmd_figure,
    cmd_solve,
    cmd_sweep,
    from_db,
    main,
    parse_scenario_file,
    sweep_rows,
)
from crpower.errors import ScenarioParseError


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.txt"
    path.write_text(
        "# quick test scenario\n"
        "p_d = 1.0\n"
        "p_f = 0.0\n"
        "q_avg_db = -8  # loose interference budget\n"
        "mc_count = 2000\n"
        "seed = 5\n"
    )
    return path


class TestParsing:
    def test_defaults_and_overrides(self, scenario_file):
        params = parse_scenario_file(scenario_file)
        assert params["p_d"] == 1.0
        assert params["mc_count"] == 2000
        assert params["n0"] == DEFAULTS["n0"]

    def test_unknown_key_reports_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("n0 = 0.1\nbogus_key = 3\n")
        with pytest.raises(ScenarioParseError, match="line 2"):
            parse_scenario_file(path)

    def test_malformed_line_reports_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("\n\nnot a kv pair\n")
        with pytest.raises(ScenarioParseError, match="line 3"):
            parse_scenario_file(path)

    def test_bad_enum_value(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("csi = psychic\n")
        with pytest.raises(ScenarioParseError, match="line 1"):
            parse_scenario_file(path)

    def test_db_conversion(self):
        assert from_db(0.0) == 1.0
        assert from_db(-10.0) == pytest.approx(0.1)

    def test_build_problem_maps_regime_and_csi(self):
        params = dict(DEFAULTS, regime="peak_avg", csi="imp_both",
                      sigma_h2=0.2, sigma_g2=0.3, p_pk_db=-4.0)
        scenario, config = build_problem(params)
        assert isinstance(scenario.regime, PeakTxAvgInt)
        assert scenario.regime.p_pk0 == pytest.approx(from_db(-4.0))
        assert scenario.csi == ImperfectBoth(sigma_h2=0.2, sigma_g2=0.3)
        assert config.eps == DEFAULTS["eps"]

    def test_build_problem_default_regime(self):
        scenario, _ = build_problem(dict(DEFAULTS))
        assert isinstance(scenario.regime, AvgTxAvgInt)
        assert isinstance(scenario.csi, PerfectBoth)


class TestSolveCommand:
    def test_ok_exit_and_positive_ee(self, scenario_file):
        out = io.StringIO()
        assert cmd_solve(scenario_file, out=out) == 0
        text = out.getvalue()
        assert "status = ok" in text
        ee = float(next(l for l in text.splitlines() if l.startswith("ee_star")).split("=")[1])
        assert ee > 0.0

    def test_byte_identical_reruns(self, scenario_file):
        a, b = io.StringIO(), io.StringIO()
        cmd_solve(scenario_file, out=a)
        cmd_solve(scenario_file, out=b)
        assert a.getvalue() == b.getvalue()

    def test_vanishing_interference_budget_squeezes_power(self, tmp_path):
        path = tmp_path / "squeeze.txt"
        path.write_text("q_avg_db = -200\nmc_count = 1000\nseed = 3\n")
        out = io.StringIO()
        cmd_solve(path, out=out)
        fields = dict(
            line.split(" = ") for line in out.getvalue().strip().splitlines()
        )
        assert float(fields["p0_avg"]) <= 1e-6
        assert float(fields["p1_avg"]) <= 1e-6
        assert float(fields["ee_star"]) <= 1e-3


class TestSweepCommand:
    def test_header_exact(self, scenario_file):
        out = io.StringIO()
        cmd_sweep(scenario_file, "p_d", [0.8, 1.0], out=out)
        lines = out.getvalue().splitlines()
        assert lines[0] == SWEEP_HEADER
        assert len(lines) == 3

    def test_detection_sweep_nondecreasing(self, scenario_file):
        params = parse_scenario_file(scenario_file)
        rows = sweep_rows(params, "p_d", [0.5, 0.75, 1.0])
        ees = [r["ee"] for r in rows]
        assert all(b >= a - 1e-9 for a, b in zip(ees, ees[1:]))
        assert all(r["status"] == "ok" for r in rows)

    def test_unknown_key_rejected(self, scenario_file):
        params = parse_scenario_file(scenario_file)
        with pytest.raises(ValueError, match="non-sweepable|unknown"):
            sweep_rows(params, "csi", [1.0])
        with pytest.raises(ValueError):
            sweep_rows(params, "frobnicate", [1.0])

    def test_csv_byte_identical_reruns(self, scenario_file):
        a, b = io.StringIO(), io.StringIO()
        cmd_sweep(scenario_file, "n0", [0.1, 0.4], out=a)
        cmd_sweep(scenario_file, "n0", [0.1, 0.4], out=b)
        assert a.getvalue() == b.getvalue()


class TestFigureCommand:
    def test_figure_2_files_and_monotone_bound(self, tmp_path):
        out = io.StringIO()
        assert cmd_figure(2, tmp_path, out=out) == 0
        csv = (tmp_path / "fig2_bound.csv").read_text().splitlines()
        assert csv[0] == "sweep_value,bound"
        vals = np.array([float(l.split(",")[1]) for l in csv[1:]])
        assert np.all(np.diff(vals) <= 1e-12) and np.all(vals >= 0.0)
        manifest = (tmp_path / "fig2_manifest.txt").read_text()
        assert "base.p_d = 0.8" in manifest
        assert "sweep_values" in manifest

    def test_unknown_figure_id(self, tmp_path):
        with pytest.raises(ValueError):
            cmd_figure(1, tmp_path)


class TestMain:
    def test_solve_roundtrip(self, scenario_file, capsys):
        assert main(["solve", str(scenario_file)]) == 0
        assert "ee_star" in capsys.readouterr().out

    def test_sweep_roundtrip(self, scenario_file, capsys):
        assert main(["sweep", str(scenario_file), "--key", "p_f", "--values", "0.0,0.2"]) == 0
        out = capsys.readouterr().out
        assert out.startswith(SWEEP_HEADER)

    def test_parse_error_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("nope\n")
        assert main(["solve", str(path)]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_file_exit_code(self, capsys):
        assert main(["solve", "/nonexistent/file.txt"]) == 2


def test_tampered_tolerance_fails_self_consistency():
    from crpower.checks import _check_dinkelbach

    ok, detail = _check_dinkelbach(seed=7, eps=1.0)
    assert not ok
    ok, _ = _check_dinkelbach(seed=7, eps=1e-6)
    assert ok


def test_validate_default_seed_all_checks_pass(capsys):
    from crpower.cli import cmd_validate

    assert cmd_validate() == 0
    out = capsys.readouterr().out
    assert "CHECKS FAILED" not in out
    assert out.count("[ok]") == 9
