"""
Unit tests for the experiment configuration model.
"""
from pathlib import Path

import pytest
from pydantic import ValidationError

from circle_lab.cli.main import build_parser, load_config
from circle_lab.cli.models import COMMANDS, REQUIRED, ExperimentConfig
from circle_lab.cli.commands import HANDLERS
from circle_lab.restriction import CoefficientRule, Variant
from circle_lab.surfaces import Family, SurfaceSystem


@pytest.mark.unit
class TestExperimentConfig:
    """Test validation of ExperimentConfig."""

    def test_every_command_has_a_handler(self):
        assert set(COMMANDS) == set(HANDLERS)
        assert len(COMMANDS) == 24

    def test_minimal_config(self):
        cfg = ExperimentConfig(command="divisor", Q=2, X=4)
        assert cfg.B == 1
        assert cfg.seed == 0
        assert cfg.output_dir == Path("results")

    def test_unknown_command(self):
        with pytest.raises(ValidationError, match="unknown command"):
            ExperimentConfig(command="fourier")

    @pytest.mark.parametrize("command", ["moments", "arcs", "piece-check", "scaling"])
    def test_missing_required_fields(self, command):
        with pytest.raises(ValidationError) as exc:
            ExperimentConfig(command=command)
        for name in REQUIRED[command]:
            assert "--" + name.replace("_", "-") in str(exc.value)

    def test_extra_fields_forbidden(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(command="divisor", Q=2, X=4, colour="red")

    def test_frozen(self):
        cfg = ExperimentConfig(command="divisor", Q=2, X=4)
        with pytest.raises(ValidationError):
            cfg.Q = 3

    def test_field_ranges(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(command="divisor", Q=0, X=4)
        with pytest.raises(ValidationError):
            ExperimentConfig(command="weyl-scan", k=3, N_list=[8, 0])

    def test_family_needs_k(self):
        with pytest.raises(ValidationError, match="needs --k"):
            ExperimentConfig(command="moments", family="kth_powers", N=4, p=4)

    def test_monomial_curve_needs_exponents(self):
        with pytest.raises(ValidationError, match="needs --exponents"):
            ExperimentConfig(command="exponents", family="monomial_curve")


@pytest.mark.unit
class TestConfigSurfaces:
    """Test surface() and resolved()."""

    def test_kth_powers(self):
        cfg = ExperimentConfig(command="moments", family=Family.KTH_POWERS, k=3, N=4, p=4)
        assert cfg.surface() == SurfaceSystem.kth_powers(3)

    def test_paraboloid(self):
        cfg = ExperimentConfig(command="gridsample", family="k_paraboloid", k=3, d=2, N=2)
        sys = cfg.surface()
        assert sys == SurfaceSystem.k_paraboloid(2, 3)
        assert sys.r == 3

    def test_monomial_curve(self):
        cfg = ExperimentConfig(command="exponents", family="monomial_curve", exponents=[1, 2, 3])
        assert cfg.surface() == SurfaceSystem.monomial_curve([1, 2, 3])

    def test_weight_follows_profile(self):
        cfg = ExperimentConfig(command="weylsum", k=3, N=8, alpha=[0.1], profile="exp_bump")
        assert cfg.weight().N == 8
        assert cfg.weight(16).profile == cfg.profile

    def test_resolved_fills_defaults(self):
        data = ExperimentConfig(command="moments", family="kth_powers", k=3, N=4, p=4).resolved()
        assert data["family"] == "kth_powers"
        assert data["coefficients"] == CoefficientRule.ALL_ONES.value
        assert data["variant"] == Variant.PLAIN.value
        assert data["theta"] == [0.0]
        assert data["output_dir"] == "results"


@pytest.mark.unit
class TestLoadConfig:
    """Test merging of flags with a JSON config file."""

    def test_flags_only(self):
        args = build_parser().parse_args(["divisor", "--Q", "2", "--X", "4", "--B", "2"])
        cfg = load_config(args)
        assert (cfg.command, cfg.Q, cfg.X, cfg.B) == ("divisor", 2, 4, 2)

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text('{"Q": 2, "X": 4, "B": 3}', encoding="utf-8")
        args = build_parser().parse_args(["divisor", "--config", str(path), "--X", "10"])
        cfg = load_config(args)
        assert (cfg.Q, cfg.X, cfg.B) == (2, 10, 3)

    def test_coefficient_switch(self):
        args = build_parser().parse_args(
            ["moments", "--family", "kth_powers", "--k", "3", "--N", "4", "--p", "4", "--random-unit"]
        )
        assert load_config(args).coefficients is CoefficientRule.RANDOM_UNIT

    def test_unknown_key_in_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text('{"Q": 2, "X": 4, "nonsense": 1}', encoding="utf-8")
        args = build_parser().parse_args(["divisor", "--config", str(path)])
        with pytest.raises(ValidationError):
            load_config(args)
