"""
Integration tests for the circle-lab command line.
"""
import json

import pytest

from circle_lab.cli.main import main
from circle_lab.monitoring import performance_tracker


def _report(output_dir) -> dict:
    with open(output_dir / "report.json", encoding="utf-8") as f:
        return json.load(f)


@pytest.mark.integration
class TestCommandRuns:
    """Run whole commands and inspect what they write."""

    def test_moments_exact(self, output_dir, capsys):
        code = main(
            ["moments", "--family", "kth_powers", "--k", "3", "--N", "4", "--p", "4", "--exact",
             "--output-dir", str(output_dir)]
        )
        assert code == 0
        assert capsys.readouterr().out.strip() == "28"

        report = _report(output_dir)
        assert report["op"] == "moments"
        assert report["values"]["exact"]["exact"] == 28
        assert report["values"]["quadrature"]["value"] == pytest.approx(28, rel=1e-9)
        assert report["values"]["fourier"]["value"] == pytest.approx(28, rel=1e-9)
        assert report["config"]["family"] == "kth_powers"
        assert report["config"]["exact"] is True
        assert report["values"]["chain"]["first_holds"] is True
        assert report["values"]["chain"]["second_holds"] is True
        assert (output_dir / "timings.json").exists()

    def test_divisor_moment(self, output_dir, capsys):
        code = main(["divisor", "--Q", "2", "--X", "4", "--output-dir", str(output_dir)])
        assert code == 0
        assert capsys.readouterr().out.strip().endswith("= 14")
        assert _report(output_dir)["values"] == {"moment": 14}

    def test_vinogradov(self, output_dir, capsys):
        code = main(["vinogradov", "--k", "2", "--s", "2", "--N", "5", "--output-dir", str(output_dir)])
        assert code == 0
        assert capsys.readouterr().out.strip() == "J_{2,2}(5) = 45 (diagonal 45)"

    def test_arcs_writes_csv(self, output_dir, capsys):
        code = main(
            ["arcs", "--k", "3", "--N", "16", "--Q", "2", "--alpha", "0", "0.3", "--output-dir", str(output_dir)]
        )
        assert code == 0
        assert capsys.readouterr().out.strip() == "Major(1,1), Minor"
        lines = (output_dir / "arcs.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "alpha,major,a,q"
        assert len(lines) == 3

    def test_repcount_table(self, output_dir):
        code = main(
            ["repcount", "--family", "kth_powers", "--k", "3", "--N", "4", "--s", "2",
             "--output-dir", str(output_dir)]
        )
        assert code == 0
        assert _report(output_dir)["values"]["sum_squares"] == 28
        lines = (output_dir / "repcount.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "u_1,count"
        assert lines[1] == "2,1"

    def test_exponents(self, output_dir, capsys):
        code = main(["exponents", "--family", "kth_powers", "--k", "3", "--output-dir", str(output_dir)])
        assert code == 0
        out = capsys.readouterr().out
        assert "truncated p>6" in out
        assert "full p>18" in out

    def test_config_file(self, tmp_path, output_dir, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"Q": 2, "X": 4, "B": 2}), encoding="utf-8")
        code = main(["divisor", "--config", str(config), "--output-dir", str(output_dir)])
        assert code == 0
        assert _report(output_dir)["values"] == {"moment": 24}
        assert _report(output_dir)["config"]["B"] == 2

    def test_reruns_are_byte_identical(self, output_dir):
        argv = ["gauss", "--k", "2", "--a", "1", "--b", "0", "--q", "7", "--output-dir", str(output_dir)]
        assert main(argv) == 0
        first = (output_dir / "report.json").read_bytes()
        assert main(argv) == 0
        assert (output_dir / "report.json").read_bytes() == first

    def test_command_duration_logged(self, output_dir, mocker):
        logged = mocker.patch("circle_lab.cli.main.log_performance")
        assert main(["gauss", "--k", "2", "--a", "1", "--b", "0", "--q", "7", "--output-dir", str(output_dir)]) == 0
        operation, duration_ms = logged.call_args.args
        assert operation == "gauss"
        assert duration_ms >= 0

    def test_save_table(self, output_dir, tmp_path):
        dump = tmp_path / "table.bin"
        code = main(
            ["gridsample", "--family", "kth_powers", "--k", "3", "--N", "4", "--samples", "8",
             "--save-table", str(dump), "--output-dir", str(output_dir)]
        )
        assert code == 0
        assert dump.exists()
        assert _report(output_dir)["values"]["saved_to"] == str(dump)


@pytest.mark.integration
class TestSavedTables:
    """Tables written with --save-table feed later runs through --table."""

    MOMENTS = ["moments", "--family", "kth_powers", "--k", "3", "--N", "8", "--p", "4"]

    def test_moments_from_saved_table(self, tmp_path, capsys):
        dump = tmp_path / "cubes.bin"
        first, second = tmp_path / "first", tmp_path / "second"
        assert main(self.MOMENTS + ["--save-table", str(dump), "--output-dir", str(first)]) == 0
        assert main(self.MOMENTS + ["--table", str(dump), "--output-dir", str(second)]) == 0

        sampled, loaded = _report(first)["values"], _report(second)["values"]
        assert loaded["grid"] == sampled["grid"]
        assert loaded["quadrature"]["value"] == pytest.approx(sampled["quadrature"]["value"], rel=1e-5)
        assert _report(second)["config"]["table"] == str(dump)

    def test_tomas_stein_from_saved_table(self, tmp_path):
        dump = tmp_path / "cubes.bin"
        assert main(self.MOMENTS + ["--save-table", str(dump), "--output-dir", str(tmp_path / "a")]) == 0
        argv = ["tomas-stein", "--family", "kth_powers", "--k", "3", "--N", "8", "--table", str(dump)]
        assert main(argv + ["--output-dir", str(tmp_path / "b")]) == 0
        assert _report(tmp_path / "b")["values"]["holds"] is True

    def test_scale_must_match(self, tmp_path, capsys):
        dump = tmp_path / "cubes.bin"
        assert main(self.MOMENTS + ["--save-table", str(dump), "--output-dir", str(tmp_path / "a")]) == 0
        argv = ["levelset", "--family", "kth_powers", "--k", "3", "--N", "16", "--lambda-frac", "0.5"]
        assert main(argv + ["--table", str(dump), "--output-dir", str(tmp_path / "b")]) == 2
        assert "N=8" in capsys.readouterr().err


@pytest.mark.integration
class TestExitCodes:
    """Precondition failures exit 2, budget failures exit 3."""

    def test_missing_flag(self, output_dir, capsys):
        code = main(["moments", "--family", "kth_powers", "--k", "3", "--output-dir", str(output_dir)])
        assert code == 2
        assert "--N" in capsys.readouterr().err
        assert not (output_dir / "report.json").exists()

    def test_no_command(self):
        assert main([]) == 2

    def test_precondition_failure(self, output_dir, capsys):
        code = main(["divisor", "--Q", "2", "--X", "4", "--mode", "tail", "--output-dir", str(output_dir)])
        assert code == 2
        assert "InvalidRange" in capsys.readouterr().err

    def test_odd_exact_moment(self, output_dir):
        code = main(
            ["moments", "--family", "kth_powers", "--k", "3", "--N", "4", "--p", "3", "--exact",
             "--output-dir", str(output_dir)]
        )
        assert code == 2

    def test_budget_exceeded(self, output_dir, capsys):
        code = main(
            ["moments", "--family", "kth_powers", "--k", "3", "--N", "4", "--p", "4", "--budget", "100",
             "--output-dir", str(output_dir)]
        )
        assert code == 3
        assert "BudgetExceeded" in capsys.readouterr().err

    def test_budget_override_is_restored(self, output_dir):
        from circle_lab.settings import get_settings

        before = get_settings().budget
        main(["moments", "--family", "kth_powers", "--k", "3", "--N", "4", "--p", "4", "--budget", "100",
              "--output-dir", str(output_dir)])
        assert get_settings().budget == before

    def test_bad_config_file(self, tmp_path, output_dir):
        config = tmp_path / "missing.json"
        assert main(["divisor", "--config", str(config), "--output-dir", str(output_dir)]) == 2

    def test_failed_tomas_stein_check(self, output_dir, capsys, monkeypatch):
        argv = ["tomas-stein", "--family", "kth_powers", "--k", "3", "--N", "4", "--output-dir", str(output_dir)]
        assert main(argv) == 0

        monkeypatch.setattr("circle_lab.restriction.levelsets.TOMAS_STEIN_SLACK", -1.0)
        assert main(argv) == 1
        assert "ToleranceCheckFailure" in capsys.readouterr().err
        assert _report(output_dir)["values"]["holds"] is False

    def test_failed_moment_chain(self, output_dir, capsys, monkeypatch):
        monkeypatch.setattr(
            "circle_lab.cli.commands.even_moment_chain",
            lambda a, sys, s: {"first_holds": True, "second_holds": False},
        )
        code = main(
            ["moments", "--family", "kth_powers", "--k", "3", "--N", "4", "--p", "4", "--exact",
             "--output-dir", str(output_dir)]
        )
        assert code == 1
        assert capsys.readouterr().out.strip() == "28"
        assert (output_dir / "report.json").exists()

    def test_failed_weyl_scan(self, output_dir, monkeypatch):
        monkeypatch.setattr(
            "circle_lab.cli.commands.weyl_minor_scan",
            lambda *args: {"rows": [], "tau": 0.25, "passes": False},
        )
        assert main(["weyl-scan", "--k", "3", "--N-list", "16", "32", "--output-dir", str(output_dir)]) == 1


@pytest.mark.integration
@pytest.mark.smoke
class TestSelftest:
    """Test the built-in identity checks."""

    def test_selftest_passes(self, capsys):
        assert main(["--selftest"]) == 0
        assert performance_tracker.get_stats()["selftest"]["count"] == 1
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert out.strip().endswith("checks passed")
