"""
Unit tests for settings, the error hierarchy, logging and monitoring.
"""
import logging

import pytest

from circle_lab import errors
from circle_lab.logger import ROOT_LOGGER_NAME, setup_logging
from circle_lab.monitoring import (
    get_monitoring_stats,
    initialize_sentry,
    performance_tracker,
    track_performance,
    track_performance_decorator,
)
from circle_lab.settings import Settings, get_settings
from circle_lab.version import format_version_info, get_release_info, get_version


@pytest.mark.unit
class TestSettings:
    """Test environment-driven settings."""

    def test_test_environment(self):
        settings = get_settings()
        assert settings.environment == "test"
        assert settings.enable_sentry is False
        assert settings.is_development is False

    def test_defaults(self):
        settings = Settings(_env_file=None)
        assert settings.budget == 2**27
        assert settings.mollifier_c1 == 0.125
        assert settings.threads is None

    def test_environment_override(self, settings_env):
        settings = settings_env(budget=1000, threads=2)
        assert settings.budget == 1000
        assert settings.threads == 2
        assert get_settings() is settings

    def test_validation(self, monkeypatch):
        monkeypatch.setenv("CIRCLE_LAB_BUDGET", "0")
        with pytest.raises(ValueError):
            Settings(_env_file=None)

    def test_output_dir_created(self, tmp_path):
        target = get_settings().ensure_output_dir(tmp_path / "out")
        assert target.is_dir()

    def test_sentry_needs_dsn(self, settings_env, monkeypatch):
        monkeypatch.delenv("SENTRY_DSN", raising=False)
        settings = settings_env(enable_sentry="true")
        assert settings.get_sentry_config() is None
        assert initialize_sentry() is False

    def test_sentry_initialized_with_dsn(self, settings_env, monkeypatch, mocker):
        monkeypatch.setenv("SENTRY_DSN", "https://key@example.invalid/1")
        settings_env(enable_sentry="true")
        init = mocker.patch("circle_lab.monitoring.sentry_sdk.init")
        assert initialize_sentry() is True
        kwargs = init.call_args.kwargs
        assert kwargs["dsn"] == "https://key@example.invalid/1"
        assert kwargs["environment"] == "test"


@pytest.mark.unit
class TestErrors:
    """Test exit codes and context."""

    @pytest.mark.parametrize(
        "cls, code",
        [
            (errors.DimensionMismatch, 2),
            (errors.InvalidRange, 2),
            (errors.TableFormatError, 2),
            (errors.BudgetExceeded, 3),
            (errors.QuadratureFailure, 1),
            (errors.ToleranceCheckFailure, 1),
        ],
    )
    def test_exit_codes(self, cls, code):
        assert cls("boom").exit_code == code

    def test_preconditions_are_value_errors(self):
        assert issubclass(errors.InvalidRange, ValueError)
        assert not issubclass(errors.BudgetExceeded, ValueError)

    def test_to_dict(self):
        error = errors.GridMismatch("dims differ", context={"dims": [4, 8]})
        assert error.to_dict() == {
            "error": "GridMismatch",
            "message": "dims differ",
            "exit_code": 2,
            "context": {"dims": [4, 8]},
        }

    def test_check_budget(self):
        errors.check_budget(10, 10, "points")
        with pytest.raises(errors.BudgetExceeded) as info:
            errors.check_budget(11, 10, "points")
        assert info.value.context == {"required": 11, "budget": 10, "what": "points"}


@pytest.mark.unit
class TestMonitoring:
    """Test performance tracking."""

    def test_track_performance(self):
        with track_performance("op", size=3):
            pass
        with track_performance("op"):
            pass
        stats = performance_tracker.get_stats()["op"]
        assert stats["count"] == 2
        assert stats["min_ms"] <= stats["avg_ms"] <= stats["max_ms"]

    def test_decorator(self):
        @track_performance_decorator("decorated")
        def double(x):
            return 2 * x

        assert double(4) == 8
        assert performance_tracker.get_stats()["decorated"]["count"] == 1

    def test_tracking_can_be_disabled(self, settings_env):
        settings_env(enable_performance_tracking="false")
        with track_performance("silent"):
            pass
        assert "silent" not in performance_tracker.get_stats()

    def test_monitoring_stats(self):
        stats = get_monitoring_stats()
        assert stats["environment"] == "test"
        assert stats["sentry_enabled"] is False

    def test_recorded_on_error(self):
        with pytest.raises(RuntimeError):
            with track_performance("failing"):
                raise RuntimeError("x")
        assert performance_tracker.get_stats()["failing"]["count"] == 1


@pytest.mark.unit
class TestLoggingAndVersion:
    """Test logger setup and version info."""

    def test_package_logger(self):
        logger = setup_logging()
        assert logger.name == ROOT_LOGGER_NAME
        assert logger.propagate is False
        assert logging.getLogger("circle_lab.arith").parent is logger

    def test_rebuild_keeps_one_console_handler(self):
        logger = setup_logging(force=True)
        assert len([h for h in logger.handlers if isinstance(h, logging.StreamHandler)]) == 1

    def test_version(self):
        info = get_release_info()
        assert info["version"] == get_version()
        assert "numpy" in format_version_info()
